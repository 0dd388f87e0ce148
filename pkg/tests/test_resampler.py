import math
from fractions import Fraction

import numpy as np
import pytest

from scalesteg import (
    ChannelSpec,
    PixelGrid,
    build_tap_plan,
    effective_support,
    interpolation_block,
    kernel_value,
    output_extent,
    resize,
)
from scalesteg.resampler import round_half_away

ALL_CHANNELS = [
    ("nearest", False),
    ("bilinear", False),
    ("bilinear", True),
    ("bicubic", False),
    ("bicubic", True),
]


def spec(fam, aa, sf):
    return ChannelSpec(fam, aa, Fraction(str(sf)))


# ---------------------------------------------------------------- kernels


def test_kernel_peaks_and_edges():
    assert kernel_value("bilinear", False, 0.5, 0.0) == 1.0
    assert kernel_value("bilinear", False, 0.5, 1.0) == 0.0
    assert kernel_value("bicubic", False, 1, 1.0) == 0.0
    assert kernel_value("bicubic", False, 1, 2.0) == 0.0
    assert kernel_value("bicubic", False, 1, 0.0) == 1.0


def test_kernel_antialias_stretch():
    # 0.5 * tri(0.5 * 0.5) = 0.5 * 0.75
    assert kernel_value("bilinear", True, 0.5, 0.5) == pytest.approx(0.375, abs=1e-15)


def test_nearest_tie_prefers_lower_index():
    assert kernel_value("nearest", False, 0.5, 0.5) == 1.0  # c - lower_index = +0.5
    assert kernel_value("nearest", False, 0.5, -0.5) == 0.0


def test_channel_spec_validation():
    with pytest.raises(ValueError):
        ChannelSpec("nearest", True, Fraction(1, 2))
    with pytest.raises(ValueError):
        ChannelSpec("bilinear", False, Fraction(3, 2))
    with pytest.raises(ValueError):
        ChannelSpec("lanczos", False, Fraction(1, 2))


def test_output_extent_exact_rational():
    assert output_extent(Fraction(1, 10), 60) == 6  # float ceil would give 7
    assert output_extent(0.3, 512) == 154
    assert output_extent(0.7, 10) == 7
    assert output_extent(1, 33) == 33


def test_round_half_away():
    assert round_half_away(2.5) == 3
    assert round_half_away(-2.5) == -3
    assert round_half_away(2.49) == 2
    assert round_half_away(146.49999999999997) == 147  # snapped true tie


# ---------------------------------------------------------------- tap plans


def test_std_bilinear_half_taps():
    plan = build_tap_plan(spec("bilinear", False, 0.5), 4, 2)
    idx, w = plan.row(0)
    assert idx.tolist() == [0, 1]
    assert w.tolist() == [0.5, 0.5]


def test_aa_bilinear_half_interior_profile():
    plan = build_tap_plan(spec("bilinear", True, 0.5), 8, 4)
    idx, w = plan.row(1)
    assert idx.tolist() == [1, 2, 3, 4]
    assert np.allclose(w, [0.125, 0.375, 0.375, 0.125], atol=1e-15)


def test_aa_bilinear_half_edge_folds():
    # u=0 centers at 0.5; the raw tap at -1 folds onto index 0
    plan = build_tap_plan(spec("bilinear", True, 0.5), 8, 4)
    idx, w = plan.row(0)
    assert idx.tolist() == [0, 1, 2]
    assert np.allclose(w, [0.5, 0.375, 0.125], atol=1e-15)
    assert not plan.interior[0] and plan.interior[1]


def test_nearest_half_integer_center():
    plan = build_tap_plan(spec("nearest", False, 0.5), 4, 2)
    idx, w = plan.row(1)  # center 2.5, tie toward the lower index
    assert idx.tolist() == [2] and w.tolist() == [1.0]


def test_extent_mismatch_rejected():
    with pytest.raises(ValueError, match="extent mismatch"):
        build_tap_plan(spec("bilinear", False, 0.5), 8, 5)


@pytest.mark.parametrize("fam,aa", ALL_CHANNELS)
@pytest.mark.parametrize("sf", ["0.3", "0.5", "0.7", "0.9", "1"])
def test_partition_of_unity(fam, aa, sf):
    if fam == "nearest" and aa:
        return
    s = spec(fam, aa, sf)
    plan = build_tap_plan(s, 64, output_extent(s.sf, 64))
    for u in range(plan.dst_extent):
        _, w = plan.row(u)
        assert abs(w.sum() - 1.0) < 1e-12


# ---------------------------------------------------------------- resize


def test_resize_row_example():
    g = PixelGrid(np.array([[10, 20, 30, 40]], dtype=np.uint8))
    out = resize(g, spec("bilinear", False, 0.5))
    assert out.pixels.tolist() == [[15, 35]]


@pytest.mark.parametrize("fam,aa", ALL_CHANNELS)
@pytest.mark.parametrize("sf", ["0.3", "0.5", "0.7"])
def test_constant_preserved(fam, aa, sf):
    g = PixelGrid(np.full((40, 40), 128, dtype=np.uint8))
    out = resize(g, spec(fam, aa, sf))
    assert np.all(out.pixels == 128)


@pytest.mark.parametrize("fam,aa", [("nearest", False), ("bilinear", False), ("bilinear", True)])
def test_monotone_range_nonnegative_kernels(rng, fam, aa):
    g = PixelGrid(rng.integers(40, 200, size=(50, 50), dtype=np.uint8))
    out = resize(g, spec(fam, aa, 0.7))
    assert out.pixels.min() >= g.pixels.min()
    assert out.pixels.max() <= g.pixels.max()


def test_bicubic_clamps_overshoot():
    g = np.zeros((20, 20), dtype=np.uint8)
    g[:, 10:] = 255
    out = resize(PixelGrid(g), spec("bicubic", False, 0.7))
    assert out.pixels.min() >= 0 and out.pixels.max() <= 255


def test_identity_at_sf_one(cover64):
    for fam, aa in ALL_CHANNELS:
        if fam == "nearest" and aa:
            continue
        assert resize(cover64, spec(fam, aa, 1)) == cover64


def test_resize_separability_matches_direct(rng):
    # independent direct 2-D evaluation on a small case
    g = rng.integers(0, 256, size=(12, 12), dtype=np.uint8)
    s = spec("bicubic", True, 0.5)
    vplan = build_tap_plan(s, 12, 6)
    out = resize(PixelGrid(g), s).pixels
    for u in range(6):
        for v in range(6):
            vi, vw = vplan.row(u)
            hi, hw = vplan.row(v)
            val = float(vw @ g[np.ix_(vi, hi)].astype(float) @ hw)
            assert abs(val - round_half_away(val)) <= 0.5 + 1e-9
            assert out[u, v] == min(255, max(0, round_half_away(val)))


# ------------------------------------------------------ interpolation blocks


def test_block_sizes_match_reference_table():
    assert interpolation_block(spec("bilinear", False, 0.5), (64, 64), 10, 10).shape == (2, 2)
    assert interpolation_block(spec("bilinear", True, 0.5), (64, 64), 10, 10).shape == (4, 4)
    assert interpolation_block(spec("bicubic", True, 0.25), (128, 128), 8, 8).shape == (16, 16)


def test_block_weight_matrix_is_outer_product():
    b = interpolation_block(spec("bilinear", True, 0.5), (64, 64), 10, 12)
    assert b.weights.shape == b.shape
    assert abs(b.weights.sum() - 1.0) < 1e-12


def test_effective_support_values():
    assert effective_support(spec("bilinear", False, 0.2)) == 2
    assert effective_support(spec("bicubic", False, 0.7)) == 4
    assert effective_support(spec("bilinear", True, 0.5)) == 4
    assert effective_support(spec("bilinear", True, 0.2)) == 9
    assert effective_support(spec("bicubic", True, 0.2)) == 17
    assert effective_support(spec("bicubic", True, 0.25)) == 16
    assert effective_support(spec("nearest", False, 0.5)) == 1

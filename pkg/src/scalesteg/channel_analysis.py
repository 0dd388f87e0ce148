"""Embedding geometry for a scaling channel.

Splits the scaled image into an embeddable lattice (sampling interval s)
and idle pixels, assigns each lattice site a supporting block of at most
2x2 cover pixels exclusively involved in that site's interpolation
(involvement count 1), and derives per-direction modification masks,
weight sums, variation bounds and wet flags.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .pixelgrid import PixelGrid
from .resampler import (
    ChannelSpec,
    TapPlan,
    build_tap_plan,
    effective_support,
    output_extent,
    resize,
    round_half_away,
)

__all__ = [
    "DesignParams",
    "EmbedSite",
    "EmbedPlan",
    "PlanDiagnostics",
    "design_params",
    "compute_dpi",
    "lattice_for",
    "build_embed_plan",
    "verify_plan",
]

SQRT3 = math.sqrt(3.0)

# Reference design parameters per channel and scaling factor, a payload-first
# tuning: interpolation support p per axis, sampling interval s, expected
# count N of exclusively-involved pixels in a supporting block, and a nominal
# ternary-rate label (metadata only; rate_bound is always sqrt(3)/s^2).
#   {(family, antialiasing): {Fraction(sf): (p, s, N, rate_label)}}
_REFERENCE_DESIGN = {
    ("bilinear", False): {
        Fraction("0.1"): (2, 1, 4, "sqrt(3)"),
        Fraction("0.2"): (2, 1, 4, "sqrt(3)"),
        Fraction("0.25"): (2, 1, 4, "sqrt(3)"),
        Fraction("0.3"): (2, 1, 4, "sqrt(3)"),
        Fraction("0.4"): (2, 1, 4, "sqrt(3)"),
        Fraction("0.5"): (2, 1, 4, "sqrt(3)"),
        Fraction("0.6"): (2, 2, 4, "sqrt(3)/4"),
        Fraction("0.7"): (2, 2, 4, "sqrt(3)/4"),
        Fraction("0.75"): (2, 2, 4, "sqrt(3)/4"),
        Fraction("0.8"): (2, 2, 4, "sqrt(3)/4"),
        Fraction("0.9"): (2, 2, 4, "sqrt(3)/4"),
    },
    ("bicubic", False): {
        Fraction("0.1"): (4, 1, 4, "sqrt(3)"),
        Fraction("0.2"): (4, 1, 4, "sqrt(3)"),
        Fraction("0.25"): (4, 1, 4, "sqrt(3)"),
        Fraction("0.3"): (4, 2, 4, "sqrt(3)/4"),
        Fraction("0.4"): (4, 2, 4, "sqrt(3)/4"),
        Fraction("0.5"): (4, 2, 4, "sqrt(3)/4"),
        Fraction("0.6"): (4, 2, 4, "sqrt(3)/4"),
        Fraction("0.7"): (4, 2, 4, "sqrt(3)/4"),
        Fraction("0.75"): (4, 3, 4, "sqrt(3)/9"),
        Fraction("0.8"): (4, 3, 4, "sqrt(3)/9"),
        Fraction("0.9"): (4, 3, 4, "sqrt(3)/9"),
    },
    ("bilinear", True): {
        Fraction("0.1"): (20, 10, 4, "sqrt(3)/100"),
        Fraction("0.2"): (9, 5, 4, "sqrt(3)/16"),
        Fraction("0.25"): (8, 4, 4, "sqrt(3)/16"),
        Fraction("0.3"): (7, 4, 4, "sqrt(3)/16"),
        Fraction("0.4"): (5, 3, 4, "sqrt(3)/9"),
        Fraction("0.5"): (4, 2, 4, "sqrt(3)/4"),
        Fraction("0.6"): (5, 3, 4, "sqrt(3)/9"),
        Fraction("0.7"): (3, 2, 4, "sqrt(3)/4"),
        Fraction("0.75"): (3, 2, 2, "sqrt(3)/4"),
        Fraction("0.8"): (3, 2, 1, "sqrt(3)/4"),
        Fraction("0.9"): (3, 2, 1, "sqrt(3)/4"),
    },
    ("bicubic", True): {
        Fraction("0.1"): (40, 20, 4, "sqrt(3)/400"),
        Fraction("0.2"): (17, 9, 4, "sqrt(3)/81"),
        Fraction("0.25"): (16, 8, 4, "sqrt(3)/64"),
        Fraction("0.3"): (14, 7, 4, "sqrt(3)/49"),
        Fraction("0.4"): (10, 5, 4, "sqrt(3)/25"),
        Fraction("0.5"): (8, 4, 4, "sqrt(3)/16"),
        Fraction("0.6"): (7, 4, 4, "sqrt(3)/16"),
        Fraction("0.7"): (6, 3, 2, "sqrt(3)/9"),
        Fraction("0.75"): (6, 3, 2, "sqrt(3)/9"),
        Fraction("0.8"): (5, 3, 2, "sqrt(3)/9"),
        Fraction("0.9"): (5, 3, 1, "sqrt(3)/9"),
    },
}


@dataclass(frozen=True)
class DesignParams:
    p: int  # interpolation support per axis
    s: int  # sampling interval in the scaled image
    n_target: int  # expected count of exclusively-involved support pixels
    rate_bound: float  # achievable rate, bits per pre-scaled-image pixel
    rate_label: str = ""  # printed reference figure, metadata only


def _axis_supports_disjoint(plan: TapPlan, s: int) -> bool:
    """True when along one axis the center-2 tap sets of lattice rows spaced
    s apart never collide."""
    interior = np.flatnonzero(plan.interior)
    if interior.size == 0:
        return True
    us = list(range(interior[0], interior[-1] + 1, s))
    prev_hi = None
    for u in us:
        idx, w = plan.row(u)
        c2 = _center_two(idx, w, plan.centers[u])
        if prev_hi is not None and c2[0] <= prev_hi:
            return False
        prev_hi = c2[-1]
    return True


def design_params(spec: ChannelSpec, cover_extent: int = 512) -> DesignParams:
    """Reference design parameters for a channel.

    Listed scaling factors are served from the reference table (a
    payload-first tuning); unlisted ones fall back to geometry: p from the
    resampler support, s = ceil(p/2) for anti-aliasing kernels, and the
    smallest interval keeping center-2x2 supports disjoint otherwise.
    """
    if spec.family == "nearest":
        return DesignParams(1, 1, 1, SQRT3, "sqrt(3)")
    table = _REFERENCE_DESIGN[(spec.family, spec.antialiasing)]
    if spec.sf in table:
        p, s, n, label = table[spec.sf]
        return DesignParams(p, s, n, SQRT3 / (s * s), label)
    p = effective_support(spec)
    if spec.aa_active:
        s = max(1, math.ceil(p / 2))
    else:
        dst = output_extent(spec.sf, cover_extent)
        plan = build_tap_plan(spec, cover_extent, dst)
        s = 1
        while s < max(2, p + 1) and not _axis_supports_disjoint(plan, s):
            s += 1
    return DesignParams(p, s, 4, SQRT3 / (s * s), "")


def compute_dpi(spec: ChannelSpec, cover_dims: tuple[int, int], embeddable_set) -> np.ndarray:
    """Involvement count per cover pixel: in how many embeddable outputs'
    interpolation blocks (nonzero taps) does it appear."""
    h, w = cover_dims
    vplan = build_tap_plan(spec, h, output_extent(spec.sf, h))
    hplan = build_tap_plan(spec, w, output_extent(spec.sf, w))
    dpi = np.zeros((h, w), dtype=np.int64)
    for (u, v) in embeddable_set:
        vi, _ = vplan.row(int(u))
        hi_, _ = hplan.row(int(v))
        dpi[np.ix_(vi, hi_)] += 1
    return dpi


def _center_two(idx: np.ndarray, w: np.ndarray, center: float) -> np.ndarray:
    """The (up to) two tap indices nearest the backward-mapped center;
    half-integer ties fall toward the lower index."""
    if len(idx) == 1:
        return idx.copy()
    # stable argsort on (distance, index): equal distances pick lower index
    order = np.lexsort((idx, np.abs(idx - center)))
    return np.sort(idx[order[:2]])


@dataclass
class EmbedSite:
    """One embeddable output pixel with its supporting-block bookkeeping."""

    y_coord: tuple[int, int]
    y_value: int
    support: tuple[tuple[int, int], ...]  # cover coordinates, dPI == 1
    weights: tuple[float, ...]  # full-block weight of each support pixel
    mask_plus: tuple[bool, ...]
    mask_minus: tuple[bool, ...]
    omega_plus: float
    omega_minus: float
    bound_plus: int
    bound_minus: int
    wet_plus: bool
    wet_minus: bool
    block_rows: np.ndarray = field(repr=False, default=None)
    block_cols: np.ndarray = field(repr=False, default=None)
    block_wv: np.ndarray = field(repr=False, default=None)  # vertical taps
    block_wh: np.ndarray = field(repr=False, default=None)  # horizontal taps

    @property
    def block_weights(self) -> np.ndarray:
        return np.outer(self.block_wv, self.block_wh)

    @property
    def wet_both(self) -> bool:
        return self.wet_plus and self.wet_minus

    def to_json_obj(self) -> dict:
        return {
            "y": list(self.y_coord),
            "support": [list(c) for c in self.support],
            "weights": list(self.weights),
            "mask_plus": [int(b) for b in self.mask_plus],
            "mask_minus": [int(b) for b in self.mask_minus],
            "omega_plus": self.omega_plus,
            "omega_minus": self.omega_minus,
            "bound_plus": self.bound_plus,
            "bound_minus": self.bound_minus,
            "wet_plus": self.wet_plus,
            "wet_minus": self.wet_minus,
        }


@dataclass
class EmbedPlan:
    """Embedding geometry for one (cover, channel) pair.  Construction is
    deterministic and pure; the only after-the-fact mutation is the
    pipeline demoting a site direction to wet when its bound proves
    unrealizable."""

    channel: ChannelSpec
    cover_dims: tuple[int, int]
    scaled_dims: tuple[int, int]
    s: int
    offsets: tuple[int, int]
    lattice_rows: np.ndarray
    lattice_cols: np.ndarray
    sites: list[EmbedSite]
    capacity_bits: int
    scaled: PixelGrid = field(repr=False, default=None)

    @property
    def n_sites(self) -> int:
        return len(self.sites)

    def lattice_coords(self) -> np.ndarray:
        """(n_sites, 2) site coordinates in the scaled image, row-major."""
        uu, vv = np.meshgrid(self.lattice_rows, self.lattice_cols, indexing="ij")
        return np.stack([uu.ravel(), vv.ravel()], axis=1)

    def support_sizes(self) -> np.ndarray:
        return np.array([len(s.support) for s in self.sites], dtype=np.int64)

    def wet_counts(self) -> tuple[int, int, int]:
        wp = sum(s.wet_plus for s in self.sites)
        wm = sum(s.wet_minus for s in self.sites)
        wb = sum(s.wet_both for s in self.sites)
        return wp, wm, wb

    def to_json_obj(self) -> dict:
        return {
            "channel": self.channel.to_json_obj(),
            "cover_dims": list(self.cover_dims),
            "scaled_dims": list(self.scaled_dims),
            "s": self.s,
            "offsets": list(self.offsets),
            "lattice_shape": [len(self.lattice_rows), len(self.lattice_cols)],
            "capacity_bits": self.capacity_bits,
            "sites": [s.to_json_obj() for s in self.sites],
        }


def _settle_direction(vals: np.ndarray, weights: np.ndarray, usable: np.ndarray,
                      direction: int, y_value: int, cap: int,
                      ) -> tuple[np.ndarray, float, int, bool]:
    """Pick the modifiable subset and variation bound for one direction.

    With bound D a pixel is modifiable when x + direction*D stays in
    [0,255]; D is adequate when ceil(1/omega) <= D, i.e. the masked weight
    can carry a full unit of output change.  The smallest adequate D wins,
    and D never exceeds the channel's cap.  A direction is wet (empty
    mask) when no capped D works or when the change would push the scaled
    pixel itself out of range.
    """
    if not (0 <= y_value + direction <= 255):
        empty = np.zeros_like(usable, dtype=bool)
        return empty, 0.0, 0, True
    for bound in range(1, cap + 1):
        mask = usable & (vals + direction * bound >= 0) & (vals + direction * bound <= 255)
        omega = float(weights[mask].sum())
        if omega > 0 and math.ceil(1.0 / omega) <= bound:
            return mask, omega, bound, False
    empty = np.zeros_like(usable, dtype=bool)
    return empty, 0.0, 0, True


def _channel_bound_cap(best_omega: float) -> int:
    """Per-channel cap on the variation bound: 2 wherever the best interior
    supporting block carries weight >= 0.5 (so the classic cap is coherent),
    otherwise the smallest bound that can carry a unit of change at all
    (wide anti-aliasing kernels: central 2x2 weight ~0.23-0.33 needs 3..5).
    """
    if best_omega <= 0:
        return 2
    return max(2, math.ceil(1.0 / best_omega - 1e-9))


def _axis_lattice(plan: TapPlan, s: int, off_override=None) -> np.ndarray:
    """Lattice positions along one axis: every s-th output starting at the
    first whose interpolation block lies fully inside the source."""
    interior = np.flatnonzero(plan.interior)
    if interior.size == 0:
        raise ValueError("cover too small: no interior outputs on one axis")
    off = int(interior[0]) if off_override is None else int(off_override)
    rows = np.arange(off, interior[-1] + 1, s, dtype=np.int64)
    rows = rows[(rows >= interior[0]) & (rows <= interior[-1])]
    if rows.size == 0:
        raise ValueError("cover too small to host any embeddable site")
    return rows


def lattice_for(spec: ChannelSpec, cover_dims: tuple[int, int], s: int,
                offsets: tuple[int, int] | None = None) -> tuple[np.ndarray, np.ndarray]:
    """The embeddable lattice for a cover size, without building a plan.
    Sender and receiver derive identical site coordinates from this."""
    h, w = cover_dims
    vplan = build_tap_plan(spec, h, output_extent(spec.sf, h))
    hplan = build_tap_plan(spec, w, output_extent(spec.sf, w))
    lat_r = _axis_lattice(vplan, s, offsets[0] if offsets else None)
    lat_c = _axis_lattice(hplan, s, offsets[1] if offsets else None)
    return lat_r, lat_c


def build_embed_plan(cover: PixelGrid, spec: ChannelSpec, override_s: int | None = None,
                     offsets: tuple[int, int] | None = None) -> EmbedPlan:
    """Construct the embeddable lattice and per-site records for a cover.

    The lattice starts at the first output whose interpolation block lies
    fully inside the cover (no edge folding), so supporting-block weights
    are pure kernel values; border outputs stay idle.
    """
    params = design_params(spec)
    s = params.s if override_s is None else int(override_s)
    if override_s is not None and override_s < params.s:
        raise ValueError(f"override interval {override_s} below reference {params.s}")
    h, w = cover.shape
    dst_h, dst_w = output_extent(spec.sf, h), output_extent(spec.sf, w)
    vplan = build_tap_plan(spec, h, dst_h)
    hplan = build_tap_plan(spec, w, dst_w)
    scaled = resize(cover, spec)

    lat_r = _axis_lattice(vplan, s, offsets[0] if offsets else None)
    lat_c = _axis_lattice(hplan, s, offsets[1] if offsets else None)

    # per-axis involvement counts over the lattice rows/cols
    def axis_info(plan: TapPlan, lat: np.ndarray, extent: int):
        counts = np.zeros(extent, dtype=np.int64)
        c2_idx = np.zeros((lat.size, 2), dtype=np.int64)
        c2_n = np.zeros(lat.size, dtype=np.int64)
        for k, u in enumerate(lat):
            idx, wgt = plan.row(int(u))
            counts[idx] += 1
            c2 = _center_two(idx, wgt, plan.centers[u])
            c2_idx[k, : len(c2)] = c2
            c2_n[k] = len(c2)
        return counts, c2_idx, c2_n

    vcounts, vc2, vc2n = axis_info(vplan, lat_r, h)
    hcounts, hc2, hc2n = axis_info(hplan, lat_c, w)

    # channel-wide bound cap from the best unfiltered center-2x2 weight
    def axis_best_center_weight(plan, lat, c2, c2n):
        best = 0.0
        for kk, uu in enumerate(lat):
            idx, wgt = plan.row(int(uu))
            sel = c2[kk, : c2n[kk]]
            best = max(best, float(sum(wgt[np.searchsorted(idx, x)] for x in sel)))
        return best

    best_omega = (axis_best_center_weight(vplan, lat_r, vc2, vc2n)
                  * axis_best_center_weight(hplan, lat_c, hc2, hc2n))
    cap = _channel_bound_cap(best_omega)

    cover_px = cover.pixels
    scaled_px = scaled.pixels
    sites: list[EmbedSite] = []
    capacity = 0
    for ku, u in enumerate(lat_r):
        vi, vw = vplan.row(int(u))
        rsel = vc2[ku, : vc2n[ku]]
        r_good = vcounts[rsel] == 1
        r_w = np.array([vw[np.searchsorted(vi, r)] for r in rsel])
        for kv, v in enumerate(lat_c):
            hi_, hw = hplan.row(int(v))
            csel = hc2[kv, : hc2n[kv]]
            c_good = hcounts[csel] == 1
            c_w = np.array([hw[np.searchsorted(hi_, c)] for c in csel])
            good = np.outer(r_good, c_good).ravel()
            rr = np.repeat(rsel, len(csel))
            cc = np.tile(csel, len(rsel))
            ww = np.outer(r_w, c_w).ravel()
            rr, cc, ww = rr[good], cc[good], ww[good]
            vals = cover_px[rr, cc].astype(np.int64)
            usable = np.ones(len(rr), dtype=bool)
            yv = int(scaled_px[u, v])
            clamped = False
            if yv in (0, 255):
                # bicubic overshoot can clamp this output; a clamped value
                # cannot be moved by +-1 with bounded support changes
                raw = float(vw @ cover_px[np.ix_(vi, hi_)].astype(np.float64) @ hw)
                clamped = not (0 <= round_half_away(raw) <= 255)
            if clamped:
                empty = np.zeros(len(rr), dtype=bool)
                m_p = m_m = empty
                om_p = om_m = 0.0
                b_p = b_m = 0
                wet_p = wet_m = True
            else:
                m_p, om_p, b_p, wet_p = _settle_direction(vals, ww, usable, +1, yv, cap)
                m_m, om_m, b_m, wet_m = _settle_direction(vals, ww, usable, -1, yv, cap)
            site = EmbedSite(
                y_coord=(int(u), int(v)),
                y_value=yv,
                support=tuple((int(r), int(c)) for r, c in zip(rr, cc)),
                weights=tuple(float(x) for x in ww),
                mask_plus=tuple(bool(b) for b in m_p),
                mask_minus=tuple(bool(b) for b in m_m),
                omega_plus=om_p,
                omega_minus=om_m,
                bound_plus=b_p,
                bound_minus=b_m,
                wet_plus=wet_p,
                wet_minus=wet_m,
                block_rows=vi.copy(),
                block_cols=hi_.copy(),
                block_wv=vw.copy(),
                block_wh=hw.copy(),
            )
            sites.append(site)
            if not site.wet_both:
                capacity += 1
    return EmbedPlan(
        channel=spec,
        cover_dims=(h, w),
        scaled_dims=(dst_h, dst_w),
        s=s,
        offsets=(int(lat_r[0]), int(lat_c[0])),
        lattice_rows=lat_r,
        lattice_cols=lat_c,
        sites=sites,
        capacity_bits=capacity,
        scaled=scaled,
    )


@dataclass
class PlanDiagnostics:
    n_sites: int
    wet_plus: int
    wet_minus: int
    wet_both: int
    capacity_bits: int
    supports_disjoint: bool
    dpi_all_one: bool
    bounds_capped: bool
    masks_safe: bool
    failures: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.supports_disjoint and self.dpi_all_one and self.bounds_capped and self.masks_safe


def verify_plan(plan: EmbedPlan, cover: PixelGrid | None = None) -> PlanDiagnostics:
    """Audit a plan: pairwise disjoint supports, exclusive involvement on
    every support pixel, bound cap, and mask over/underflow safety."""
    failures = []
    seen: dict[tuple[int, int], tuple[int, int]] = {}
    disjoint = True
    for site in plan.sites:
        for c in site.support:
            if c in seen:
                disjoint = False
                failures.append(("overlap", c, seen[c], site.y_coord))
            seen[c] = site.y_coord
    dpi = compute_dpi(plan.channel, plan.cover_dims,
                      [tuple(x) for x in plan.lattice_coords()])
    dpi_ok = True
    for site in plan.sites:
        for (r, c) in site.support:
            if dpi[r, c] != 1:
                dpi_ok = False
                failures.append(("dpi", (r, c), int(dpi[r, c]), site.y_coord))
    bounds_ok = all(
        (site.wet_plus or 1 <= site.bound_plus <= 2)
        and (site.wet_minus or 1 <= site.bound_minus <= 2)
        for site in plan.sites
    )
    masks_ok = True
    cover_px = cover.pixels if cover is not None else None
    for site in plan.sites:
        for d, mask, bound, wet in (
            (+1, site.mask_plus, site.bound_plus, site.wet_plus),
            (-1, site.mask_minus, site.bound_minus, site.wet_minus),
        ):
            if wet:
                if any(mask):
                    masks_ok = False
                    failures.append(("wet-nonempty", site.y_coord, d))
                continue
            if not any(mask):
                masks_ok = False
                failures.append(("empty-mask", site.y_coord, d))
            if cover_px is not None:
                for on, (r, c) in zip(mask, site.support):
                    if on and not (0 <= int(cover_px[r, c]) + d * bound <= 255):
                        masks_ok = False
                        failures.append(("mask-overflow", site.y_coord, (r, c), d))
    wp, wm, wb = plan.wet_counts()
    return PlanDiagnostics(
        n_sites=plan.n_sites,
        wet_plus=wp,
        wet_minus=wm,
        wet_both=wb,
        capacity_bits=plan.capacity_bits,
        supports_disjoint=disjoint,
        dpi_all_one=dpi_ok,
        bounds_capped=bounds_ok,
        masks_safe=masks_ok,
        failures=failures,
    )

import json
import subprocess
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np
import pytest

from scalesteg import (
    CapacityError,
    ChannelSpec,
    KeyMismatchError,
    PixelGrid,
    RunConfig,
    build_embed_plan,
    embed_bits,
    embed_message,
    extract_message,
    load_image,
    resize,
    save_image,
    verify_roundtrip,
)
from scalesteg.stego_codec import StcCode, extract_bits


def spec_aa_half():
    return ChannelSpec("bilinear", True, Fraction(1, 2))


def test_empty_message_leaves_cover_untouched(cover128):
    res = embed_message(cover128, spec_aa_half(), b"")
    assert res.proxy_stego == cover128
    assert res.l1_distortion == 0
    assert extract_message(resize(res.proxy_stego, spec_aa_half()), res.key) == b""


def test_round_trip_bytes(cover128):
    msg = b"the quick brown fox, 32 bits of length prefix ahead"
    res = embed_message(cover128, spec_aa_half(), msg, "suniward-plain")
    got = extract_message(resize(res.proxy_stego, spec_aa_half()), res.key)
    assert got == msg


def test_changes_confined_to_supports(cover128):
    msg = bytes(range(64))
    res = embed_message(cover128, spec_aa_half(), msg)
    diff = np.argwhere(res.proxy_stego.pixels != cover128.pixels)
    supports = {c for s in res.plan.sites for c in s.support}
    assert {tuple(x) for x in diff} <= supports


def test_embed_is_deterministic(cover128):
    msg = b"determinism check"
    a = embed_message(cover128, spec_aa_half(), msg, "hill-pro")
    b = embed_message(cover128, spec_aa_half(), msg, "hill-pro")
    assert a.proxy_stego == b.proxy_stego
    assert a.key == b.key


def test_payload_over_capacity_rejected(cover128):
    with pytest.raises(CapacityError):
        embed_message(cover128, spec_aa_half(), bytes(2000))


def test_wrong_code_in_key_fails_cleanly(cover128):
    msg = b"hello there"
    res = embed_message(cover128, spec_aa_half(), msg)
    stego = resize(res.proxy_stego, spec_aa_half())
    bad = dict(res.key)
    bad["code"] = StcCode(h=10, hhat=(1, 0, 0, 1, 0, 0, 0, 1, 0, 1)).to_json_obj()
    with pytest.raises(KeyMismatchError, match="length prefix"):
        extract_message(stego, bad)


def test_unembedded_cover_rejected(cover128):
    res = embed_message(cover128, spec_aa_half(), b"some payload bytes")
    innocent = resize(cover128, spec_aa_half())  # no embedding happened
    with pytest.raises(KeyMismatchError):
        extract_message(innocent, res.key)


def test_false_accept_rate_at_most_cosmic(rng):
    """Extraction of un-embedded resized covers must fail the length-prefix
    check: the 32-bit prefix gives ~2^-32 false accepts, so 0 of 1000."""
    spec = ChannelSpec("nearest", False, Fraction(1, 2))
    code = StcCode()
    accepts = 0
    key_template = None
    for i in range(1000):
        cover = PixelGrid(rng.integers(0, 256, (32, 32), dtype=np.uint8))
        if key_template is None:
            res = embed_message(cover, spec, b"xxxxxxxx")
            key_template = res.key
        scaled = resize(cover, spec)
        try:
            extract_message(scaled, key_template)
            accepts += 1
        except KeyMismatchError:
            pass
    assert accepts == 0


def test_verify_roundtrip_report(cover128):
    cfg = RunConfig(spec_aa_half(), payload=0.05, cost="hill-pro", seed=3)
    rep = verify_roundtrip(cover128, cfg)
    assert rep.recovered
    assert rep.capacity_bits > 0
    assert rep.used_bits <= rep.capacity_bits
    assert rep.payload_y == pytest.approx(rep.used_bits / (64 * 64))
    assert rep.l1_distortion >= rep.changed_pixels > 0
    # bound 2 and at most 4 support pixels per changed site on this channel
    assert rep.l1_distortion <= 2 * 4 * rep.changed_sites
    assert set(rep.timings) == {"plan_s", "embed_s", "extract_s"}


def test_reference_size_runtime_budget(rng):
    """A 512x512 cover through anti-aliasing bilinear 0.5 at 0.05 bpp runs
    comfortably inside a desktop time budget (measured ~3 s here)."""
    import time

    cover = PixelGrid(rng.integers(0, 256, (512, 512), dtype=np.uint8))
    cfg = RunConfig(spec_aa_half(), payload=0.05, cost="hill-pro", seed=0)
    t0 = time.perf_counter()
    rep = verify_roundtrip(cover, cfg)
    assert rep.recovered
    assert time.perf_counter() - t0 < 60.0


ALL_SF_ROWS = ["0.1", "0.2", "0.25", "0.3", "0.4", "0.5", "0.6", "0.7", "0.75", "0.8", "0.9"]


@pytest.mark.parametrize("fam,aa", [("bilinear", False), ("bicubic", False),
                                    ("bilinear", True), ("bicubic", True)])
def test_recovery_across_every_reference_sf(fam, aa):
    """Every channel family recovers at every reference scaling factor."""
    cover = PixelGrid(np.random.default_rng(606).integers(0, 256, (256, 256),
                                                          dtype=np.uint8))
    for sfs in ALL_SF_ROWS:
        spec = ChannelSpec(fam, aa, Fraction(sfs))
        plan = build_embed_plan(cover, spec)
        k = max(1, min(plan.capacity_bits // 2, 48))
        bits = np.random.default_rng(hash(sfs) % 2**31).integers(0, 2, size=k,
                                                                 dtype=np.uint8)
        res = embed_bits(cover, spec, bits, "hill-pro", plan=plan)
        got = extract_bits(resize(res.proxy_stego, spec), spec, plan.s, StcCode(), k,
                           cover_dims=plan.cover_dims, offsets=plan.offsets)
        assert np.array_equal(got, bits), f"{spec.label()} failed"


def test_verify_identity_channel_nearest(cover128):
    cfg = RunConfig(ChannelSpec("nearest", False, Fraction(1)), payload=0.02)
    rep = verify_roundtrip(cover128, cfg)
    assert rep.recovered


def test_plain_vs_pro_both_recover(cover64):
    for cost in ("hill-plain", "hill-pro", "suniward-plain", "suniward-pro"):
        cfg = RunConfig(spec_aa_half(), payload=0.08, cost=cost, seed=9)
        rep = verify_roundtrip(cover64, cfg)
        assert rep.recovered, cost


def test_embed_bits_raw_channel(cover64):
    spec = ChannelSpec("bicubic", True, Fraction(1, 4))
    plan = build_embed_plan(cover64, spec)
    k = max(1, plan.capacity_bits // 2)
    bits = np.random.default_rng(4).integers(0, 2, size=k, dtype=np.uint8)
    res = embed_bits(cover64, spec, bits, "hill-pro", plan=plan)
    got = extract_bits(resize(res.proxy_stego, spec), spec, plan.s, StcCode(), k,
                       cover_dims=plan.cover_dims, offsets=plan.offsets)
    assert np.array_equal(got, bits)


# ------------------------------------------------------------------- CLI


def run_cli(*args, cwd):
    return subprocess.run([sys.executable, "-m", "scalesteg.cli", *args],
                          capture_output=True, text=True, cwd=cwd)


@pytest.fixture
def workdir(tmp_path, rng):
    cover = PixelGrid(rng.integers(0, 256, (96, 96), dtype=np.uint8))
    save_image(cover, tmp_path / "cover.pgm")
    (tmp_path / "msg.bin").write_bytes(b"cli round trip payload")
    return tmp_path


CHANNEL = ["--channel", "bilinear", "--antialias", "--sf", "0.5"]


def test_cli_embed_extract_roundtrip(workdir):
    r = run_cli("embed", "cover.pgm", "msg.bin", *CHANNEL,
                "--key", "key.json", "--out", "proxy.pgm",
                "--emit-delta", "delta.json", cwd=workdir)
    assert r.returncode == 0, r.stderr
    assert "capacity_bits=" in r.stdout
    proxy = load_image(workdir / "proxy.pgm")
    save_image(resize(proxy, spec_aa_half()), workdir / "scaled.pgm")
    r = run_cli("extract", "scaled.pgm", "--key", "key.json", "--out", "out.bin",
                cwd=workdir)
    assert r.returncode == 0, r.stderr
    assert (workdir / "out.bin").read_bytes() == b"cli round trip payload"
    delta = json.loads((workdir / "delta.json").read_text())
    assert delta["height"] == 96 and delta["entries"]


def test_cli_analyze_reports_reference_row(workdir):
    r = run_cli("analyze", "cover.pgm", "--channel", "bicubic", "--antialias",
                "--sf", "0.7", cwd=workdir)
    assert r.returncode == 0, r.stderr
    rep = json.loads(r.stdout)
    d = rep["design_params"]
    assert (d["p"], d["s"], d["n_target"]) == (6, 3, 2)
    r = run_cli("analyze", "cover.pgm", "--channel", "bilinear", "--sf", "0.9",
                cwd=workdir)
    d = json.loads(r.stdout)["design_params"]
    assert (d["s"], d["n_target"]) == (2, 4)


def test_cli_verify_and_exit_codes(workdir):
    r = run_cli("verify", "cover.pgm", *CHANNEL, "--payload", "0.05", cwd=workdir)
    assert r.returncode == 0, r.stderr
    assert json.loads(r.stdout)["recovered"] is True
    # infeasible payload -> exit 2
    r = run_cli("embed", "cover.pgm", "cover.pgm", *CHANNEL,
                "--key", "k.json", "--out", "p.pgm", cwd=workdir)
    assert r.returncode == 2
    # usage error -> exit 1
    r = run_cli("embed", "cover.pgm", cwd=workdir)
    assert r.returncode == 1
    # missing file -> exit 4
    r = run_cli("analyze", "nope.pgm", *CHANNEL, cwd=workdir)
    assert r.returncode == 4


def test_cli_sweep_deterministic_csv(workdir):
    args = ["sweep", str(workdir), "--channels", "nearest,aa-bilinear",
            "--sfs", "0.5", "--payload", "0.02", "--seed", "7"]
    r1 = run_cli(*args, "--out", "s1.csv", cwd=workdir)
    assert r1.returncode == 0, r1.stderr
    r2 = run_cli(*args, "--out", "s2.csv", cwd=workdir)

    def strip_runtime(path):
        rows = (workdir / path).read_text().strip().splitlines()
        return [",".join(r.split(",")[:-1]) for r in rows]

    assert strip_runtime("s1.csv") == strip_runtime("s2.csv")
    lines = (workdir / "s1.csv").read_text().strip().splitlines()
    assert lines[0].startswith("schema_version,image,channel")
    assert len(lines) == 3  # header + 2 channels x 1 sf x 1 image
    assert all(",1," in ln or ln.split(",")[8] == "1" for ln in lines[1:])


def test_cli_sweep_empty_dir(tmp_path):
    empty = tmp_path / "none"
    empty.mkdir()
    r = run_cli("sweep", str(empty), "--out", "x.csv", cwd=tmp_path)
    assert r.returncode == 4

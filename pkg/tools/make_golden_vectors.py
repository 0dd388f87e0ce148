#!/usr/bin/env python3
"""Generate the golden-vector fixtures for the resampler.

This is a deliberately independent implementation of the same resize
conventions: no separable passes, no tap plans, no shared code with
scalesteg.resampler.  Every output pixel is computed directly as the full
2-D weighted sum over its source neighborhood, with border clamping,
whole-block weight normalization, and a single half-away-from-zero
rounding.  If scalesteg.resampler and this file ever disagree on a byte,
one of them is wrong.

Fixture layout (committed under tests/fixtures/golden/):
    inputs/img_XX.pgm                      ten random 32x32 covers
    cases.json                             list of {input, spec, expected}
    expected/img_XX__<label>.pgm           oracle outputs

Run from the repository root:  python tools/make_golden_vectors.py
"""

import json
import math
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

ROOT = Path(__file__).resolve().parents[1]
OUT = ROOT / "tests" / "fixtures" / "golden"

SFS = ["0.3", "0.5", "0.7"]
CHANNELS = [
    ("nearest", False),
    ("bilinear", False),
    ("bilinear", True),
    ("bicubic", False),
    ("bicubic", True),
]


def save_pgm(path: Path, arr: np.ndarray) -> None:
    h, w = arr.shape
    path.write_bytes(f"P5\n{w} {h}\n255\n".encode() + arr.astype(np.uint8).tobytes())


def kernel(family: str, t: float, a: float = -0.5) -> float:
    if family == "bilinear":
        return max(0.0, 1.0 - abs(t))
    if family == "bicubic":
        x = abs(t)
        if x <= 1.0:
            return (a + 2) * x**3 - (a + 3) * x**2 + 1.0
        if x < 2.0:
            return a * (x**3 - 5 * x**2 + 8 * x - 4)
        return 0.0
    if family == "nearest":
        return 1.0 if -0.5 < t <= 0.5 else 0.0
    raise ValueError(family)


def oracle_resize(src: np.ndarray, family: str, antialiasing: bool, sf: Fraction,
                  a: float = -0.5) -> np.ndarray:
    """Direct (non-separable) reference resize.  Tap geometry runs on the
    effective per-axis scale dst/src, like the library."""
    h, w = src.shape
    dst_h = int(math.ceil(sf * h))
    dst_w = int(math.ceil(sf * w))
    base_r = {"nearest": Fraction(1, 2), "bilinear": Fraction(1), "bicubic": Fraction(2)}[family]
    sv, sh = Fraction(dst_h, h), Fraction(dst_w, w)
    aav = antialiasing and family != "nearest" and sv < 1
    aah = antialiasing and family != "nearest" and sh < 1
    rv = base_r / sv if aav else base_r
    rh = base_r / sh if aah else base_r
    out = np.zeros((dst_h, dst_w), dtype=np.uint8)
    srcf = src.astype(np.float64)
    for u in range(dst_h):
        cu = Fraction(2 * u + 1, 2) / sv - Fraction(1, 2)
        iis = range(math.floor(cu - rv), math.ceil(cu + rv) + 1)
        rtaps = []
        for i in iis:
            t = cu - i
            wv = float(sv) * kernel(family, float(sv * t), a) if aav else kernel(family, float(t), a)
            if wv != 0.0:
                rtaps.append((min(max(i, 0), h - 1), wv))
        for v in range(dst_w):
            cv = Fraction(2 * v + 1, 2) / sh - Fraction(1, 2)
            jjs = range(math.floor(cv - rh), math.ceil(cv + rh) + 1)
            ctaps = []
            for j in jjs:
                t = cv - j
                wv = float(sh) * kernel(family, float(sh * t), a) if aah else kernel(family, float(t), a)
                if wv != 0.0:
                    ctaps.append((min(max(j, 0), w - 1), wv))
            total, acc = 0.0, 0.0
            for i, wi in rtaps:
                for j, wj in ctaps:
                    acc += wi * wj * srcf[i, j]
                    total += wi * wj
            val = acc / total
            # channel rounding rule: half away from zero, near-half values
            # snapped to the half so tie resolution is summation-order free
            half = math.floor(val) + 0.5
            if abs(val - half) < 1e-9:
                val = half
            r = math.floor(val + 0.5) if val >= 0 else -math.floor(-val + 0.5)
            out[u, v] = min(max(r, 0), 255)
    return out


def main() -> int:
    (OUT / "inputs").mkdir(parents=True, exist_ok=True)
    (OUT / "expected").mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(20240901)
    cases = []
    for k in range(10):
        img = rng.integers(0, 256, size=(32, 32), dtype=np.uint8)
        name = f"img_{k:02d}.pgm"
        save_pgm(OUT / "inputs" / name, img)
        for family, aa in CHANNELS:
            for sfs in SFS:
                sf = Fraction(sfs)
                label = f"{'aa-' if aa else ''}{family}_{sfs.replace('.', 'p')}"
                exp_name = f"img_{k:02d}__{label}.pgm"
                save_pgm(OUT / "expected" / exp_name, oracle_resize(img, family, aa, sf))
                cases.append({
                    "input": f"inputs/{name}",
                    "spec": {"family": family, "antialiasing": aa,
                             "sf": sfs, "bicubic_a": -0.5},
                    "expected": f"expected/{exp_name}",
                })
    (OUT / "cases.json").write_text(json.dumps(cases, indent=1))
    print(f"wrote {len(cases)} golden cases under {OUT}")
    return 0


if __name__ == "__main__":
    sys.exit(main())

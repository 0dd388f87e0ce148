#!/usr/bin/env python3
"""A tour of the forward scaling channel.

Shows how the resampler models the attack: kernel shapes, per-output tap
plans, interpolation blocks, and the conventions (effective scale,
half-away rounding) that the rest of the pipeline inverts.
"""

from fractions import Fraction

import numpy as np

from scalesteg import (
    ChannelSpec,
    PixelGrid,
    build_tap_plan,
    interpolation_block,
    kernel_value,
    resize,
)

print("=== kernel values ===")
for fam, aa in [("bilinear", False), ("bilinear", True), ("bicubic", False)]:
    label = ("aa-" if aa else "") + fam
    xs = [0.0, 0.5, 1.0, 1.5, 2.0]
    vals = [kernel_value(fam, aa, 0.5, x) for x in xs]
    print(f"  {label:12} at offsets {xs}: {[round(v, 4) for v in vals]}")
print("  anti-aliasing stretches the kernel by 1/sf and scales it by sf,")
print("  so at sf=0.5 the bilinear support widens from 2 to 4 source pixels.\n")

print("=== tap plans (sf = 0.5, 8 source pixels -> 4 outputs) ===")
spec = ChannelSpec("bilinear", True, Fraction(1, 2))
plan = build_tap_plan(spec, 8, 4)
for u in range(4):
    idx, w = plan.row(u)
    inside = "interior" if plan.interior[u] else "edge-folded"
    print(f"  output {u}: center {plan.centers[u]:.2f}  taps {idx.tolist()} "
          f"weights {[round(x, 4) for x in w]} ({inside})")
print("  edge outputs fold out-of-range taps onto the border pixel and")
print("  renormalize; interior rows carry pure kernel values.\n")

print("=== interpolation blocks match the channel geometry ===")
for fam, aa, sf, dims in [("bilinear", False, "0.5", (64, 64)),
                          ("bilinear", True, "0.5", (64, 64)),
                          ("bicubic", True, "0.25", (128, 128))]:
    s = ChannelSpec(fam, aa, Fraction(sf))
    b = interpolation_block(s, dims, 8, 8)
    print(f"  {s.label():20} block {b.shape[0]}x{b.shape[1]}")
print()

print("=== resizing a gradient through every channel ===")
src = PixelGrid(np.tile(np.arange(0, 256, 8, dtype=np.uint8), (32, 1)))
for fam, aa in [("nearest", False), ("bilinear", False), ("bilinear", True),
                ("bicubic", False), ("bicubic", True)]:
    s = ChannelSpec(fam, aa, Fraction(1, 2))
    out = resize(src, s)
    print(f"  {s.label():20} {src.shape} -> {out.shape}, first row "
          f"{out.pixels[0, :6].tolist()} ...")
print("\nA constant image stays constant (weights sum to 1), and outputs of")
print("non-negative kernels stay inside the source range; bicubic overshoot")
print("is clamped to [0, 255] after the single rounding step.")

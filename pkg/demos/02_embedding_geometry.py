#!/usr/bin/env python3
"""How the scaled image splits into embeddable sites and idle pixels.

Every s-th scaled pixel gets a supporting block of cover pixels that feed
no other embeddable pixel's interpolation (involvement count 1); those are
the only pixels inverse interpolation may touch.  Each direction gets a
modification mask, a weight sum, a variation bound and a wet flag.
"""

from collections import Counter
from fractions import Fraction

import numpy as np

from scalesteg import ChannelSpec, PixelGrid, build_embed_plan, compute_dpi, design_params, verify_plan

rng = np.random.default_rng(7)
cover = PixelGrid(rng.integers(0, 256, (128, 128), dtype=np.uint8))

print("=== reference design parameters ===")
print(f"  {'channel':22} {'p':>3} {'s':>3} {'N':>3} {'rate/scaled px':>14}")
for fam, aa in [("nearest", False), ("bilinear", False), ("bicubic", False),
                ("bilinear", True), ("bicubic", True)]:
    for sf in ("0.3", "0.5", "0.7"):
        spec = ChannelSpec(fam, aa, Fraction(sf))
        d = design_params(spec)
        print(f"  {spec.label():22} {d.p:3d} {d.s:3d} {d.n_target:3d} "
              f"{d.rate_bound:14.4f}")
print()

print("=== involvement counts (anti-aliasing bilinear, sf = 0.5) ===")
spec = ChannelSpec("bilinear", True, Fraction(1, 2))
all_y = [(u, v) for u in range(64) for v in range(64)]
dpi_all = compute_dpi(spec, (128, 128), all_y)
print(f"  every scaled pixel embeddable: interior involvement = "
      f"{dpi_all[40, 40]} (blocks overlap, inversion over-determined)")
plan = build_embed_plan(cover, spec)
lattice = [tuple(x) for x in plan.lattice_coords()]
dpi_lat = compute_dpi(spec, (128, 128), lattice)
print(f"  sampled every s={plan.s}: support pixels have involvement "
      f"{dpi_lat[plan.sites[0].support[0]]} (exclusively owned)\n")

print("=== one site in detail ===")
site = plan.sites[len(plan.sites) // 2]
print(f"  scaled coordinate {site.y_coord}, value {site.y_value}")
print(f"  support {site.support}")
print(f"  weights {[round(w, 5) for w in site.weights]}")
print(f"  +1: mask {site.mask_plus} weight sum {site.omega_plus:.4f} "
      f"bound {site.bound_plus} wet {site.wet_plus}")
print(f"  -1: mask {site.mask_minus} weight sum {site.omega_minus:.4f} "
      f"bound {site.bound_minus} wet {site.wet_minus}\n")

print("=== plan audit ===")
diag = verify_plan(plan, cover)
print(f"  sites {diag.n_sites}, capacity {diag.capacity_bits} bits")
print(f"  supports disjoint: {diag.supports_disjoint}; exclusive involvement: "
      f"{diag.dpi_all_one}; masks safe: {diag.masks_safe}")
print(f"  wet: +{diag.wet_plus} -{diag.wet_minus} both {diag.wet_both}")
sizes = Counter(plan.support_sizes().tolist())
print(f"  support-size histogram: {dict(sorted(sizes.items()))}")

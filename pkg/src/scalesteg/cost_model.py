"""Embedding-cost construction for the embeddable lattice.

Two classic base distortions (HiLL and S-UNIWARD, in their standard
closed forms) and two assemblies: "plain" evaluates the base cost on the
scaled image itself, "pro" averages cover-domain base costs over each
site's masked support pixels, pulling the cover's statistics into the
scaled-domain embedding.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.signal import convolve2d

from .channel_analysis import EmbedPlan
from .pixelgrid import PixelGrid

__all__ = [
    "CostMap",
    "WET_CEILING",
    "base_cost_hill",
    "base_cost_suniward",
    "assemble_plain",
    "assemble_pro",
    "BASE_COSTS",
]

# Flat regions make HiLL's denominator vanish; they get a huge finite cost
# so extreme payloads can still use them.  True infinity is reserved for
# wet site directions.
WET_CEILING = 1e10

_HILL_HP = np.array([[-1, 2, -1], [2, -4, 2], [-1, 2, -1]], dtype=np.float64)
_HILL_L1 = np.full((3, 3), 1.0 / 9.0)
_HILL_L2 = np.full((15, 15), 1.0 / 225.0)


def _as_float2d(img) -> np.ndarray:
    if isinstance(img, PixelGrid):
        return img.pixels.astype(np.float64)
    arr = np.asarray(img, dtype=np.float64)
    if arr.ndim != 2 or arr.size == 0:
        raise ValueError("need a non-empty 2-D image")
    return arr


def base_cost_hill(img) -> np.ndarray:
    """High-pass residual, smoothed twice: cheap where texture is rich."""
    x = _as_float2d(img)
    resid = convolve2d(x, _HILL_HP, mode="same", boundary="symm")
    xi = convolve2d(np.abs(resid), _HILL_L1, mode="same", boundary="symm")
    with np.errstate(divide="ignore"):
        inv = np.where(xi > 0, 1.0 / np.where(xi > 0, xi, 1.0), np.inf)
    rho = convolve2d(inv, _HILL_L2, mode="same", boundary="symm")
    rho[~np.isfinite(rho)] = WET_CEILING
    np.minimum(rho, WET_CEILING, out=rho)
    return rho


# Daubechies-8 decomposition high-pass, the filter bank UNIWARD is defined
# over; the low-pass is its quadrature mirror.
_UNIWARD_HPDF = np.array([
    -0.0544158422, 0.3128715909, -0.6756307363, 0.5853546837,
    0.0158291053, -0.2840155430, -0.0004724846, 0.1287474266,
    0.0173693010, -0.0440882539, -0.0139810279, 0.0087460940,
    0.0048703530, -0.0039134249, -0.0003917404, 0.0006754494,
])
_UNIWARD_LPDF = ((-1.0) ** np.arange(_UNIWARD_HPDF.size)) * _UNIWARD_HPDF[::-1]
_UNIWARD_FILTERS = (
    np.outer(_UNIWARD_LPDF, _UNIWARD_HPDF),
    np.outer(_UNIWARD_HPDF, _UNIWARD_LPDF),
    np.outer(_UNIWARD_HPDF, _UNIWARD_HPDF),
)
_UNIWARD_SIGMA = 1.0


def base_cost_suniward(img) -> np.ndarray:
    """Additive per-pixel form of the wavelet relative distortion: for each
    directional residual R_k, spread 1/(|R_k| + sigma) back through |F_k|."""
    x = _as_float2d(img)
    h, w = x.shape
    pad = max(f.shape[0] for f in _UNIWARD_FILTERS)
    xp = np.pad(x, pad, mode="symmetric")
    rho = np.zeros_like(x)
    for f in _UNIWARD_FILTERS:
        resid = convolve2d(xp, f, mode="same")
        xi = convolve2d(1.0 / (np.abs(resid) + _UNIWARD_SIGMA),
                        np.abs(f[::-1, ::-1]), mode="same")
        # even-sized filters bias 'same' output by one; realign
        if f.shape[0] % 2 == 0:
            xi = np.roll(xi, 1, axis=0)
        if f.shape[1] % 2 == 0:
            xi = np.roll(xi, 1, axis=1)
        rho += xi[pad : pad + h, pad : pad + w]
    return rho


BASE_COSTS = {"hill": base_cost_hill, "suniward": base_cost_suniward}


@dataclass
class CostMap:
    """Per-site costs for +1/-1 changes; +inf exactly at wet directions,
    and the no-change cost is identically zero."""

    rho_plus: np.ndarray
    rho_minus: np.ndarray

    def __post_init__(self):
        self.rho_plus = np.asarray(self.rho_plus, dtype=np.float64)
        self.rho_minus = np.asarray(self.rho_minus, dtype=np.float64)
        if self.rho_plus.shape != self.rho_minus.shape:
            raise ValueError("rho_plus/rho_minus shape mismatch")

    @property
    def n_sites(self) -> int:
        return self.rho_plus.size

    def flip_costs(self) -> np.ndarray:
        """Cost of changing a site's parity: the cheaper feasible direction."""
        return np.minimum(self.rho_plus, self.rho_minus)

    def copy(self) -> "CostMap":
        return CostMap(self.rho_plus.copy(), self.rho_minus.copy())

    def to_json_obj(self) -> dict:
        def enc(a):
            return [None if not np.isfinite(v) else float(v) for v in a]

        return {"rho_plus": enc(self.rho_plus), "rho_minus": enc(self.rho_minus)}


def _finite_positive(rho: np.ndarray) -> np.ndarray:
    # base costs are >= 0 by construction; keep strict positivity so the
    # simulator's exp(-lambda*rho) stays well behaved
    return np.maximum(rho, 1e-12)


def assemble_plain(plan: EmbedPlan, scaled: PixelGrid, base) -> CostMap:
    """Scaled-image cost: each non-wet direction costs the base distortion
    of the scaled image at the site's own coordinate."""
    if (scaled.height, scaled.width) != plan.scaled_dims:
        raise ValueError(
            f"scaled dims {scaled.shape} do not match plan {plan.scaled_dims}"
        )
    psi = _finite_positive(base(scaled))
    n = plan.n_sites
    rp = np.empty(n)
    rm = np.empty(n)
    for k, site in enumerate(plan.sites):
        u, v = site.y_coord
        rp[k] = np.inf if site.wet_plus else psi[u, v]
        rm[k] = np.inf if site.wet_minus else psi[u, v]
    return CostMap(rp, rm)


def assemble_pro(plan: EmbedPlan, cover: PixelGrid, base) -> CostMap:
    """Cover-statistics cost: each non-wet direction costs the mean of the
    cover-domain base distortion over that direction's masked support."""
    if (cover.height, cover.width) != plan.cover_dims:
        raise ValueError(f"cover dims {cover.shape} do not match plan {plan.cover_dims}")
    psi = _finite_positive(base(cover))
    n = plan.n_sites
    rp = np.empty(n)
    rm = np.empty(n)
    for k, site in enumerate(plan.sites):
        for out, mask, wet in ((rp, site.mask_plus, site.wet_plus),
                               (rm, site.mask_minus, site.wet_minus)):
            if wet:
                out[k] = np.inf
                continue
            vals = [psi[r, c] for (r, c), on in zip(site.support, mask) if on]
            if not vals:
                raise ValueError(f"non-wet direction with empty mask at {site.y_coord}")
            out[k] = float(np.mean(vals))
    return CostMap(rp, rm)

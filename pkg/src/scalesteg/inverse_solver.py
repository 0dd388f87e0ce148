"""Inverse interpolation: realize embedding changes on the cover.

For every site whose scaled pixel must move by +-1, search the masked
supporting-block perturbations (unidirectional, each pixel within the
site's variation bound) for the smallest-L1 state whose true forward
interpolation, recomputed over the full block and rounded exactly like
the channel, lands on the target value.  Site supports are pairwise
disjoint and exclusively involved, so sites solve independently and the
union of solutions is the proxy-stego delta.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .channel_analysis import EmbedPlan, EmbedSite
from .errors import SolverError
from .pixelgrid import DeltaMap, PixelGrid
from .resampler import round_half_away
from .stego_codec import ChangeVector

__all__ = ["SiteSolution", "EscalationNeeded", "forward_check", "solve_site", "solve_all"]


@dataclass
class SiteSolution:
    site: EmbedSite
    deltas: np.ndarray  # one signed int per support pixel
    verified: bool
    checks: int = 0  # forward evaluations spent

    def l1(self) -> int:
        return int(np.abs(self.deltas).sum())


class EscalationNeeded(Exception):
    """Some sites exhausted their bound without passing the forward check;
    carries (site_index, direction) pairs for wet-demotion and retry."""

    def __init__(self, failures):
        self.failures = list(failures)
        super().__init__(f"{len(self.failures)} site(s) need wet demotion")


def _site_value(cover_px: np.ndarray, site: EmbedSite, deltas: np.ndarray | None) -> int:
    """The channel's output at this site for the (perturbed) cover: full
    interpolation block, separable weighted sum, channel rounding + clamp."""
    block = cover_px[np.ix_(site.block_rows, site.block_cols)].astype(np.float64)
    if deltas is not None:
        # block rows/cols may be non-contiguous when interior taps prune to
        # zero weight, so locate the support positions by index search
        for (r, c), d in zip(site.support, deltas):
            if d:
                i = int(np.searchsorted(site.block_rows, r))
                j = int(np.searchsorted(site.block_cols, c))
                block[i, j] += d
    val = float(site.block_wv @ block @ site.block_wh)
    return max(0, min(255, round_half_away(val)))


def forward_check(cover: PixelGrid, site: EmbedSite, deltas, expected_y_prime: int) -> bool:
    """True when resizing the perturbed cover yields exactly the expected
    value at this site.  This is the authority the solver obeys; the
    linearized masked-sum test is only a hint (rounding is not additive)."""
    deltas = None if deltas is None else np.asarray(deltas)
    return _site_value(cover.pixels, site, deltas) == int(expected_y_prime)


def _candidate_states(weights: np.ndarray, bound: int):
    """All magnitude vectors in {0..bound}^m, ordered by (L1, largest single
    step, descending masked weight sum, lexicographic): ascending-cost
    search that prefers spreading unit steps across heavy pixels."""
    m = len(weights)
    states = []
    for mags in itertools.product(range(bound + 1), repeat=m):
        l1 = sum(mags)
        if l1 == 0:
            continue
        sigma = float(np.dot(mags, weights))
        states.append((l1, max(mags), -sigma, mags))
    states.sort()
    return [np.array(s[-1], dtype=np.int64) for s in states]


def solve_site(cover: PixelGrid, site: EmbedSite, delta_y: int,
               y_value: int | None = None) -> SiteSolution:
    """Find the minimal-L1 masked perturbation realizing delta_y at a site.

    delta_y = 0 is the trivial all-zero solution.  For +-1 the candidate
    states are unidirectional (all steps share delta_y's sign) and capped
    by the site's variation bound; each is accepted only on a true forward
    check.  An unverified result means the bound was exhausted; the caller
    escalates the direction to wet.
    """
    m = len(site.support)
    zeros = np.zeros(m, dtype=np.int64)
    y0 = site.y_value if y_value is None else int(y_value)
    if delta_y == 0:
        return SiteSolution(site, zeros, True, 0)
    if delta_y not in (-1, 1):
        raise ValueError("delta_y must be in {-1, 0, +1}")
    wet = site.wet_plus if delta_y > 0 else site.wet_minus
    if wet:
        raise ValueError(f"change {delta_y:+d} at wet direction of site {site.y_coord}")
    mask = site.mask_plus if delta_y > 0 else site.mask_minus
    bound = site.bound_plus if delta_y > 0 else site.bound_minus
    midx = [i for i, on in enumerate(mask) if on]
    mw = np.array([site.weights[i] for i in midx])
    expected = y0 + delta_y
    cover_px = cover.pixels
    checks = 0
    for mags in _candidate_states(mw, bound):
        deltas = zeros.copy()
        deltas[midx] = delta_y * mags
        checks += 1
        if _site_value(cover_px, site, deltas) == expected:
            return SiteSolution(site, deltas, True, checks)
    return SiteSolution(site, zeros, False, checks)


def solve_all(cover: PixelGrid, plan: EmbedPlan, changes: ChangeVector) -> DeltaMap:
    """Solve every changed site and merge the disjoint per-site deltas.

    Raises EscalationNeeded listing any site direction whose bound was
    exhausted (the pipeline demotes those to wet and re-embeds once).
    """
    if changes.deltas.size != plan.n_sites:
        raise ValueError("change vector does not match plan")
    dm = DeltaMap(*plan.cover_dims)
    failures = []
    for idx in np.flatnonzero(changes.deltas):
        site = plan.sites[idx]
        dy = int(changes.deltas[idx])
        sol = solve_site(cover, site, dy)
        if not sol.verified:
            failures.append((idx, dy))
            continue
        for (r, c), d in zip(site.support, sol.deltas):
            if d:
                dm.set(r, c, int(d))
    if failures:
        raise EscalationNeeded(failures)
    return dm

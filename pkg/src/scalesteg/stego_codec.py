"""Message embedding and extraction on the embeddable lattice.

Embedding is a binary syndrome-trellis code over the LSBs of the lattice
sites: a Viterbi pass picks the cheapest flip pattern whose syndrome equals
the message, where each site's flip cost is the cheaper feasible +-1
direction (infinite when both directions are wet).  The receiver needs only
the scaled stego, the lattice parameters and the shared sub-matrix: the
message is the syndrome of the received LSBs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel_analysis import EmbedPlan
from .cost_model import CostMap
from .errors import CapacityError
from .pixelgrid import PixelGrid
from .resampler import ChannelSpec

__all__ = [
    "StcCode",
    "ChangeVector",
    "stc_embed",
    "stc_syndrome",
    "apply_changes",
    "extract_bits",
    "simulate_optimal",
    "bits_from_bytes",
    "bytes_from_bits",
]

DEFAULT_HHAT = (1, 1, 0, 1, 0, 0, 0, 1, 1, 1)


@dataclass(frozen=True)
class StcCode:
    """Trellis parameters: constraint height h and the base column pattern.

    The banded parity-check matrix assigns each message row a block of
    columns; within a block, column c carries the base pattern with its
    middle rows rotated by c (first and last rows stay 1).  Distinct
    columns per block keep the trellis state population rich, so isolated
    wet sites never strand the syndrome.  Sender and receiver derive the
    same matrix from (h, base pattern, n, k) alone.
    """

    h: int = 10
    hhat: tuple[int, ...] = DEFAULT_HHAT

    def __post_init__(self):
        if len(self.hhat) != self.h:
            raise ValueError("sub-matrix pattern length must equal h")
        if self.hhat[0] != 1 or self.hhat[-1] != 1:
            raise ValueError("sub-matrix pattern must start and end with 1")
        if any(b not in (0, 1) for b in self.hhat):
            raise ValueError("sub-matrix pattern must be binary")

    @property
    def hhat_int(self) -> int:
        return sum(b << r for r, b in enumerate(self.hhat))

    def column_pattern(self, c: int, j: int, k: int) -> int:
        """Pattern of the c-th column in block j, truncated at row k-1."""
        h = self.h
        if h > 2 and c:
            m = h - 2
            mid = [self.hhat[1 + ((r - c) % m)] for r in range(m)]
            full = self.hhat[0] | sum(b << (r + 1) for r, b in enumerate(mid)) \
                | (self.hhat[-1] << (h - 1))
        else:
            full = self.hhat_int
        rows = min(h, k - j)
        return full & ((1 << rows) - 1)

    def to_json_obj(self) -> dict:
        return {"h": self.h, "hhat": list(self.hhat)}

    @classmethod
    def from_json_obj(cls, obj: dict) -> "StcCode":
        return cls(h=int(obj["h"]), hhat=tuple(int(b) for b in obj["hhat"]))


def _block_widths(n: int, k: int) -> np.ndarray:
    """Distribute n trellis columns over k message blocks (first n%k blocks
    get the extra column).  Shared by embedder and extractor."""
    if k <= 0 or k > n:
        raise CapacityError(f"cannot place {k} message bits on {n} sites")
    widths = np.full(k, n // k, dtype=np.int64)
    widths[: n % k] += 1
    return widths


def dense_parity_matrix(n: int, k: int, code: StcCode) -> np.ndarray:
    """The full k x n parity-check matrix, mainly for tests and debugging."""
    H = np.zeros((k, n), dtype=np.uint8)
    col = 0
    for j, w in enumerate(_block_widths(n, k)):
        for c in range(w):
            pat = code.column_pattern(c, j, k)
            for r in range(min(code.h, k - j)):
                if (pat >> r) & 1:
                    H[j + r, col] = 1
            col += 1
    return H


def stc_syndrome(bits: np.ndarray, k: int, code: StcCode) -> np.ndarray:
    """H @ bits (mod 2) for the banded parity-check structure."""
    bits = np.asarray(bits, dtype=np.uint8)
    n = bits.size
    widths = _block_widths(n, k)
    synd = np.zeros(k, dtype=np.uint8)
    i = 0
    for j, w in enumerate(widths):
        acc = 0
        for c in range(w):
            if bits[i]:
                acc ^= code.column_pattern(c, j, k)
            i += 1
        r = 0
        while acc:
            if acc & 1:
                synd[j + r] ^= 1
            acc >>= 1
            r += 1
    return synd


def stc_embed(lsb_cover: np.ndarray, costs, message: np.ndarray,
              code: StcCode = StcCode()) -> np.ndarray:
    """Minimal-cost flip pattern with H @ (lsb ^ flips) == message.

    ``costs`` is either a CostMap or a (rho_plus, rho_minus) pair; a site's
    flip cost is min(rho_plus, rho_minus), infinite when both are wet.
    Sites held at infinite cost are never flipped; if the syndrome cannot
    be met without them the embed is infeasible.
    """
    lsb = np.asarray(lsb_cover, dtype=np.uint8)
    msg = np.asarray(message, dtype=np.uint8)
    n, k = lsb.size, msg.size
    if k == 0:
        return np.zeros(n, dtype=bool)
    if k > n:
        raise CapacityError(f"message of {k} bits exceeds {n} sites")
    if isinstance(costs, CostMap):
        flip_cost = costs.flip_costs()
    else:
        rho_p, rho_m = costs
        flip_cost = np.minimum(np.asarray(rho_p, float), np.asarray(rho_m, float))
    if flip_cost.size != n:
        raise ValueError("one flip cost per site required")

    target = msg ^ stc_syndrome(lsb, k, code)
    nstates = 1 << code.h
    half = nstates >> 1
    states = np.arange(nstates)
    weights = np.full(nstates, np.inf)
    weights[0] = 0.0
    path = np.zeros((n, nstates), dtype=bool)
    widths = _block_widths(n, k)
    perm_cache: dict[int, np.ndarray] = {}
    i = 0
    for j in range(k):
        for c in range(widths[j]):
            pat = code.column_pattern(c, j, k)
            perm = perm_cache.get(pat)
            if perm is None:
                perm = states ^ pat
                perm_cache[pat] = perm
            flipped = weights[perm] + flip_cost[i]
            take = flipped < weights
            path[i] = take
            weights = np.where(take, flipped, weights)
            i += 1
        # message row j is now final: keep states whose low bit matches,
        # shift the window down one row
        survivors = weights[(np.arange(half) << 1) | int(target[j])]
        weights = np.full(nstates, np.inf)
        weights[:half] = survivors
    if not np.isfinite(weights[0]):
        raise CapacityError("no feasible trellis path (too many wet sites?)")

    flips = np.zeros(n, dtype=bool)
    state = 0
    for j in range(k - 1, -1, -1):
        state = (state << 1) | int(target[j])
        lo = int(widths[:j].sum())
        for c in range(widths[j] - 1, -1, -1):
            i = lo + c
            f = bool(path[i, state])
            flips[i] = f
            if f:
                state ^= code.column_pattern(c, j, k)
    if state != 0:
        raise AssertionError("trellis backtrack did not return to the start state")
    return flips


@dataclass
class ChangeVector:
    """Per-site embedding change, aligned with the plan's site order."""

    deltas: np.ndarray  # int8 in {-1, 0, +1}

    def __post_init__(self):
        self.deltas = np.asarray(self.deltas, dtype=np.int8)

    @property
    def n_changes(self) -> int:
        return int(np.count_nonzero(self.deltas))


def apply_changes(plan: EmbedPlan, scaled: PixelGrid, flips: np.ndarray,
                  costs: CostMap) -> tuple[ChangeVector, PixelGrid]:
    """Turn flip decisions into signed changes and the target scaled stego.

    A flipped site moves in the cheaper feasible direction (ties toward +1);
    both directions change the LSB.  Flips at wet-both sites are illegal.
    """
    flips = np.asarray(flips, dtype=bool)
    if flips.size != plan.n_sites:
        raise ValueError("one flip decision per site required")
    deltas = np.zeros(plan.n_sites, dtype=np.int8)
    for idx in np.flatnonzero(flips):
        site = plan.sites[idx]
        rp, rm = costs.rho_plus[idx], costs.rho_minus[idx]
        if site.wet_both or (np.isinf(rp) and np.isinf(rm)):
            raise ValueError(f"flip requested at wet-both site {site.y_coord}")
        deltas[idx] = 1 if rp <= rm else -1
    y = plan.scaled.pixels if scaled is None else scaled.pixels
    out = y.astype(np.int16).copy()
    coords = plan.lattice_coords()
    changed = deltas != 0
    out[coords[changed, 0], coords[changed, 1]] += deltas[changed]
    if out.min() < 0 or out.max() > 255:
        raise ValueError("scaled stego out of range; wet flags inconsistent")
    return ChangeVector(deltas), PixelGrid(out.astype(np.uint8))


def extract_bits(scaled_stego: PixelGrid, spec: ChannelSpec, s: int,
                 code: StcCode, expected_bits: int, *,
                 cover_dims: tuple[int, int],
                 offsets: tuple[int, int] | None = None) -> np.ndarray:
    """Recover the message: syndrome of the lattice LSBs of the received
    scaled stego.  Needs no cover, no plan and no wet flags, only the
    lattice parameters shared through the stego key."""
    from .channel_analysis import lattice_for
    from .resampler import output_extent

    lat_r, lat_c = lattice_for(spec, cover_dims, s, offsets)
    dims = (output_extent(spec.sf, cover_dims[0]), output_extent(spec.sf, cover_dims[1]))
    if scaled_stego.shape != dims:
        raise ValueError(f"scaled stego dims {scaled_stego.shape}, channel implies {dims}")
    if expected_bits == 0:
        return np.zeros(0, dtype=np.uint8)
    uu, vv = np.meshgrid(lat_r, lat_c, indexing="ij")
    lsb = (scaled_stego.pixels[uu.ravel(), vv.ravel()] & 1).astype(np.uint8)
    return stc_syndrome(lsb, expected_bits, code)


# ---------------------------------------------------------------------------
# payload-limited-sender simulation


def _ternary_entropy_bits(pp: np.ndarray, pm: np.ndarray) -> float:
    p0 = 1.0 - pp - pm
    total = 0.0
    for p in (p0, pp, pm):
        q = p[p > 1e-300]
        total -= float(np.sum(q * np.log2(q)))
    return total


def _change_probs(lmb: float, rp: np.ndarray, rm: np.ndarray):
    # wet directions carry probability 0 for every lambda (including the
    # lambda -> 0 limit, where 0*inf would otherwise produce NaN)
    def e(r):
        out = np.zeros_like(r)
        finite = np.isfinite(r)
        out[finite] = np.exp(-lmb * r[finite])
        return out

    ep, em = e(rp), e(rm)
    z = 1.0 + ep + em
    return ep / z, em / z


def simulate_optimal(costs: CostMap, payload_bits: float, rng_seed: int = 0) -> ChangeVector:
    """Sample the optimal change distribution at the requested payload:
    p(+-1) = exp(-lambda*rho)/(1 + exp(-lambda*rho+) + exp(-lambda*rho-)),
    with lambda found by bisection on the total ternary entropy."""
    rp, rm = costs.rho_plus, costs.rho_minus
    n = rp.size
    if payload_bits < 0:
        raise ValueError("payload must be non-negative")
    if payload_bits == 0:
        return ChangeVector(np.zeros(n, dtype=np.int8))
    max_bits = _ternary_entropy_bits(*_change_probs(0.0, rp, rm))
    if payload_bits > max_bits + 1e-9:
        raise CapacityError(f"payload {payload_bits:.2f} bits exceeds entropy bound {max_bits:.2f}")
    lo, hi = 0.0, 1.0
    while _ternary_entropy_bits(*_change_probs(hi, rp, rm)) > payload_bits and hi < 1e30:
        hi *= 2.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        h = _ternary_entropy_bits(*_change_probs(mid, rp, rm))
        if h > payload_bits:
            lo = mid
        else:
            hi = mid
        if abs(h - payload_bits) <= 1e-6 * payload_bits:
            lo = hi = mid
            break
    lmb = 0.5 * (lo + hi)
    pp, pm = _change_probs(lmb, rp, rm)
    r = np.random.default_rng(rng_seed).random(n)
    deltas = np.zeros(n, dtype=np.int8)
    deltas[r < pp] = 1
    deltas[(r >= pp) & (r < pp + pm)] = -1
    return ChangeVector(deltas)


# ---------------------------------------------------------------------------
# bitstream helpers


def bits_from_bytes(data: bytes) -> np.ndarray:
    if not data:
        return np.zeros(0, dtype=np.uint8)
    return np.unpackbits(np.frombuffer(data, dtype=np.uint8))


def bytes_from_bits(bits: np.ndarray) -> bytes:
    bits = np.asarray(bits, dtype=np.uint8)
    if bits.size % 8:
        raise ValueError("bit count not a multiple of 8")
    if bits.size == 0:
        return b""
    return np.packbits(bits).tobytes()

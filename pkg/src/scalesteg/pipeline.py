"""End-to-end embedding pipeline and reporting.

embed: plan the channel geometry, assemble costs, trellis-embed the
bitstream into the lattice LSBs, inverse-interpolate the changes into a
proxy stego the same size as the cover.  extract: resize-agnostic receiver
that only needs the scaled stego plus the shared stego key.  verify: run
the real forward channel over the proxy stego and compare bits.
"""

from __future__ import annotations

import struct
import time
from dataclasses import dataclass, field

import numpy as np

from .channel_analysis import EmbedPlan, build_embed_plan, design_params
from .cost_model import BASE_COSTS, CostMap, assemble_plain, assemble_pro
from .errors import CapacityError, KeyMismatchError, SolverError
from .inverse_solver import EscalationNeeded, solve_all
from .pixelgrid import DeltaMap, PixelGrid, apply_delta
from .resampler import ChannelSpec, resize
from .stego_codec import (
    ChangeVector,
    StcCode,
    apply_changes,
    bits_from_bytes,
    bytes_from_bits,
    extract_bits,
    stc_embed,
)

__all__ = [
    "RunConfig",
    "EmbedResult",
    "VerifyReport",
    "assemble_costs",
    "embed_bits",
    "embed_message",
    "extract_message",
    "verify_roundtrip",
]

COST_VARIANTS = ("hill-plain", "hill-pro", "suniward-plain", "suniward-pro")


@dataclass(frozen=True)
class RunConfig:
    """Everything that parameterizes one embedding run."""

    channel: ChannelSpec
    payload: float = 0.05  # bits per pre-scaled-image pixel
    cost: str = "hill-pro"
    override_s: int | None = None
    seed: int = 0

    def __post_init__(self):
        if self.cost not in COST_VARIANTS:
            raise ValueError(f"cost variant {self.cost!r} not one of {COST_VARIANTS}")
        if self.payload < 0:
            raise ValueError("payload must be >= 0")

    @property
    def base_name(self) -> str:
        return self.cost.split("-")[0]

    @property
    def assembly(self) -> str:
        return self.cost.split("-")[1]


def assemble_costs(plan: EmbedPlan, cover: PixelGrid, cost_variant: str) -> CostMap:
    base_name, assembly = cost_variant.split("-")
    base = BASE_COSTS[base_name]
    if assembly == "plain":
        return assemble_plain(plan, plan.scaled, base)
    if assembly == "pro":
        return assemble_pro(plan, cover, base)
    raise ValueError(f"unknown assembly {assembly!r}")


@dataclass
class EmbedResult:
    proxy_stego: PixelGrid
    delta: DeltaMap
    plan: EmbedPlan
    changes: ChangeVector
    used_bits: int
    wet_retries: int
    key: dict

    @property
    def l1_distortion(self) -> int:
        return self.delta.l1()

    @property
    def changed_pixels(self) -> int:
        return len(self.delta)


def _make_key(plan: EmbedPlan, code: StcCode, payload_bits: int, seed: int = 0) -> dict:
    """Stego key: everything the receiver needs, shared out of band."""
    return {
        "channel": plan.channel.to_json_obj(),
        "cover_dims": list(plan.cover_dims),
        "s": plan.s,
        "offsets": list(plan.offsets),
        "code": code.to_json_obj(),
        "payload_bits": payload_bits,
        "seed": seed,
    }


def embed_bits(cover: PixelGrid, spec: ChannelSpec, message_bits: np.ndarray,
               cost_variant: str = "hill-pro", override_s: int | None = None,
               code: StcCode = StcCode(), seed: int = 0,
               plan: EmbedPlan | None = None) -> EmbedResult:
    """Embed a raw bit sequence; the core primitive under embed_message.

    If inverse interpolation exhausts a site's bound (rare), that direction
    is demoted to wet and the trellis runs once more against the patched
    cost map; a second failure is a hard error.
    """
    message_bits = np.asarray(message_bits, dtype=np.uint8)
    k = int(message_bits.size)
    if plan is None:
        plan = build_embed_plan(cover, spec, override_s)
    costs = assemble_costs(plan, cover, cost_variant)
    if k > plan.capacity_bits:
        raise CapacityError(
            f"message of {k} bits exceeds plan capacity {plan.capacity_bits}"
        )
    coords = plan.lattice_coords()
    lsb = (plan.scaled.pixels[coords[:, 0], coords[:, 1]] & 1).astype(np.uint8)
    if k == 0:
        return EmbedResult(cover, DeltaMap(*plan.cover_dims), plan,
                           ChangeVector(np.zeros(plan.n_sites, dtype=np.int8)),
                           0, 0, _make_key(plan, code, 0, seed))
    retries = 0
    for attempt in (0, 1):
        flips = stc_embed(lsb, costs, message_bits, code)
        changes, _y_prime = apply_changes(plan, plan.scaled, flips, costs)
        try:
            delta = solve_all(cover, plan, changes)
            break
        except EscalationNeeded as esc:
            if attempt == 1:
                raise SolverError(
                    f"inverse interpolation failed twice at sites "
                    f"{[plan.sites[i].y_coord for i, _ in esc.failures]}"
                ) from esc
            retries = 1
            for idx, dy in esc.failures:
                site = plan.sites[idx]
                empty = tuple(False for _ in site.support)
                if dy > 0:
                    costs.rho_plus[idx] = np.inf
                    site.wet_plus, site.mask_plus = True, empty
                else:
                    costs.rho_minus[idx] = np.inf
                    site.wet_minus, site.mask_minus = True, empty
    proxy = apply_delta(cover, delta)
    # honesty check: push the proxy through the real channel and confirm
    # the lattice carries the syndrome we just embedded
    got = extract_bits(resize(proxy, spec), spec, plan.s, code, k,
                       cover_dims=plan.cover_dims, offsets=plan.offsets)
    if not np.array_equal(got, message_bits):
        raise SolverError("post-embed verification failed: channel does not return the message")
    return EmbedResult(proxy, delta, plan, changes, k, retries,
                       _make_key(plan, code, k, seed))


_LEN_PREFIX = struct.Struct(">I")  # payload byte count, big-endian


def embed_message(cover: PixelGrid, spec: ChannelSpec, message: bytes,
                  cost_variant: str = "hill-pro", override_s: int | None = None,
                  code: StcCode = StcCode(), seed: int = 0) -> EmbedResult:
    """Embed bytes with a 32-bit length prefix; an empty message embeds
    nothing and the proxy stego equals the cover."""
    if not message:
        return embed_bits(cover, spec, np.zeros(0, dtype=np.uint8), cost_variant,
                          override_s, code, seed)
    stream = _LEN_PREFIX.pack(len(message)) + message
    return embed_bits(cover, spec, bits_from_bytes(stream), cost_variant,
                      override_s, code, seed)


def extract_message(scaled_stego: PixelGrid, key: dict) -> bytes:
    """Receiver side: syndrome of the lattice LSBs, then length-prefix
    validation.  Needs only the scaled stego and the stego key."""
    spec = ChannelSpec.from_json_obj(key["channel"])
    code = StcCode.from_json_obj(key["code"])
    k = int(key["payload_bits"])
    if k == 0:
        return b""
    bits = extract_bits(scaled_stego, spec, int(key["s"]), code, k,
                        cover_dims=tuple(key["cover_dims"]),
                        offsets=tuple(key["offsets"]))
    if k < 32 or (k - 32) % 8:
        raise KeyMismatchError(f"stream of {k} bits cannot carry a length prefix")
    data = bytes_from_bits(bits)
    (length,) = _LEN_PREFIX.unpack(data[:4])
    if length != len(data) - 4:
        raise KeyMismatchError(
            f"length prefix {length} does not match stream payload {len(data) - 4} "
            "(wrong key or channel?)"
        )
    return data[4:]


@dataclass
class VerifyReport:
    recovered: bool
    l1_distortion: int
    changed_pixels: int
    changed_sites: int
    wet_sites: int
    capacity_bits: int
    used_bits: int
    payload_y: float  # bits per pre-scaled-image pixel
    payload_x: float  # bits per cover pixel
    wet_retries: int
    timings: dict = field(default_factory=dict)

    def to_json_obj(self) -> dict:
        return {k: (dict(v) if isinstance(v, dict) else v) for k, v in self.__dict__.items()}


def verify_roundtrip(cover: PixelGrid, config: RunConfig,
                     message: bytes | None = None,
                     code: StcCode = StcCode()) -> VerifyReport:
    """embed -> real channel resize -> extract, with bookkeeping.

    When no message is given, a random one is drawn (seeded) at the
    configured payload rate, measured in bits per pre-scaled-image pixel.
    """
    spec = config.channel
    t0 = time.perf_counter()
    plan = build_embed_plan(cover, spec, config.override_s)
    t_plan = time.perf_counter() - t0
    if message is None:
        scaled_px = plan.scaled_dims[0] * plan.scaled_dims[1]
        want_bits = int(config.payload * scaled_px)
        n_bytes = max(0, (want_bits - 32) // 8)
        n_bytes = min(n_bytes, max(0, (plan.capacity_bits - 32) // 8))
        rng = np.random.default_rng(config.seed)
        message = rng.integers(0, 256, size=n_bytes, dtype=np.uint8).tobytes()
    t0 = time.perf_counter()
    res = embed_message(cover, spec, message, config.cost, config.override_s,
                        code, config.seed)
    t_embed = time.perf_counter() - t0
    t0 = time.perf_counter()
    scaled_stego = resize(res.proxy_stego, spec)
    recovered_msg = extract_message(scaled_stego, res.key) if message else b""
    t_extract = time.perf_counter() - t0
    plan = res.plan
    scaled_px = plan.scaled_dims[0] * plan.scaled_dims[1]
    cover_px = plan.cover_dims[0] * plan.cover_dims[1]
    _, _, wet_both = plan.wet_counts()
    return VerifyReport(
        recovered=(recovered_msg == message),
        l1_distortion=res.l1_distortion,
        changed_pixels=res.changed_pixels,
        changed_sites=res.changes.n_changes,
        wet_sites=wet_both,
        capacity_bits=plan.capacity_bits,
        used_bits=res.used_bits,
        payload_y=res.used_bits / scaled_px,
        payload_x=res.used_bits / cover_px,
        wet_retries=res.wet_retries,
        timings={"plan_s": t_plan, "embed_s": t_embed, "extract_s": t_extract},
    )

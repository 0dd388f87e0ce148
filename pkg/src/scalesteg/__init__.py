"""scalesteg: image steganography that survives known scaling channels.

The message is logically embedded in the scaled image; a same-size proxy
stego is synthesized by per-site integer-programming inverse interpolation
so that resizing the proxy through the real channel reproduces every
embedded change exactly.
"""

from .channel_analysis import (
    DesignParams,
    EmbedPlan,
    EmbedSite,
    build_embed_plan,
    compute_dpi,
    design_params,
    lattice_for,
    verify_plan,
)
from .cost_model import CostMap, assemble_plain, assemble_pro, base_cost_hill, base_cost_suniward
from .errors import CapacityError, FormatError, KeyMismatchError, SolverError
from .inverse_solver import forward_check, solve_all, solve_site
from .pipeline import (
    RunConfig,
    VerifyReport,
    embed_bits,
    embed_message,
    extract_message,
    verify_roundtrip,
)
from .pixelgrid import DeltaMap, PixelGrid, apply_delta, load_image, save_image
from .resampler import (
    Block,
    ChannelSpec,
    TapPlan,
    build_tap_plan,
    effective_support,
    interpolation_block,
    kernel_value,
    output_extent,
    resize,
)
from .stego_codec import (
    ChangeVector,
    StcCode,
    apply_changes,
    extract_bits,
    simulate_optimal,
    stc_embed,
    stc_syndrome,
)

__all__ = [
    "CapacityError",
    "FormatError",
    "KeyMismatchError",
    "SolverError",
    "DeltaMap",
    "PixelGrid",
    "apply_delta",
    "load_image",
    "save_image",
    "Block",
    "ChannelSpec",
    "TapPlan",
    "build_tap_plan",
    "effective_support",
    "interpolation_block",
    "kernel_value",
    "output_extent",
    "resize",
    "DesignParams",
    "EmbedPlan",
    "EmbedSite",
    "build_embed_plan",
    "compute_dpi",
    "design_params",
    "lattice_for",
    "verify_plan",
    "CostMap",
    "assemble_plain",
    "assemble_pro",
    "base_cost_hill",
    "base_cost_suniward",
    "ChangeVector",
    "StcCode",
    "apply_changes",
    "extract_bits",
    "simulate_optimal",
    "stc_embed",
    "stc_syndrome",
    "forward_check",
    "solve_all",
    "solve_site",
    "RunConfig",
    "VerifyReport",
    "embed_bits",
    "embed_message",
    "extract_message",
    "verify_roundtrip",
]

__version__ = "0.1.0"

"""8-bit grayscale rasters and lossless image I/O.

Two containers: ``PixelGrid`` (an immutable uint8 image) and ``DeltaMap``
(a sparse signed perturbation of a cover).  File formats are binary PGM
(P5, maxval 255) and 8-bit grayscale PNG; both round-trip bit exactly.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import FormatError

__all__ = ["PixelGrid", "DeltaMap", "load_image", "save_image", "apply_delta"]


@dataclass(frozen=True)
class PixelGrid:
    """Immutable 8-bit grayscale image, row-major, values in [0, 255]."""

    pixels: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.pixels)
        if arr.ndim != 2 or arr.size == 0:
            raise ValueError("PixelGrid needs a non-empty 2-D array")
        if arr.dtype != np.uint8:
            if np.any(arr < 0) or np.any(arr > 255) or not np.issubdtype(arr.dtype, np.integer):
                raise ValueError("pixel values must be integers in [0, 255]")
            arr = arr.astype(np.uint8)
        arr = np.ascontiguousarray(arr)
        arr.setflags(write=False)
        object.__setattr__(self, "pixels", arr)

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.pixels.shape

    def __eq__(self, other) -> bool:
        return isinstance(other, PixelGrid) and np.array_equal(self.pixels, other.pixels)

    def __hash__(self):
        return hash((self.shape, self.pixels.tobytes()))


@dataclass
class DeltaMap:
    """Sparse integer perturbation over a cover; absent entries are zero."""

    height: int
    width: int
    entries: dict[tuple[int, int], int] = field(default_factory=dict)

    def set(self, row: int, col: int, delta: int) -> None:
        if not (0 <= row < self.height and 0 <= col < self.width):
            raise IndexError(f"({row},{col}) outside {self.height}x{self.width}")
        if delta == 0:
            self.entries.pop((row, col), None)
        else:
            self.entries[(row, col)] = int(delta)

    def add(self, row: int, col: int, delta: int) -> None:
        self.set(row, col, self.entries.get((row, col), 0) + delta)

    def l1(self) -> int:
        return sum(abs(v) for v in self.entries.values())

    def __len__(self) -> int:
        return len(self.entries)

    def to_json_obj(self) -> dict:
        return {
            "height": self.height,
            "width": self.width,
            "entries": [[r, c, d] for (r, c), d in sorted(self.entries.items())],
        }

    @classmethod
    def from_json_obj(cls, obj: dict) -> "DeltaMap":
        dm = cls(int(obj["height"]), int(obj["width"]))
        for r, c, d in obj["entries"]:
            dm.set(int(r), int(c), int(d))
        return dm


def apply_delta(cover: PixelGrid, delta: DeltaMap) -> PixelGrid:
    """Return cover + delta.  Any resulting value outside [0, 255] is a hard
    error (a legal solver never produces one), never a silent clamp."""
    if (cover.height, cover.width) != (delta.height, delta.width):
        raise ValueError(
            f"dimension mismatch: cover {cover.shape} vs delta "
            f"{(delta.height, delta.width)}"
        )
    out = cover.pixels.astype(np.int16)
    for (r, c), d in delta.entries.items():
        v = int(out[r, c]) + d
        if not (0 <= v <= 255):
            raise ValueError(f"delta at ({r},{c}) drives pixel to {v}, outside [0,255]")
        out[r, c] = v
    return PixelGrid(out.astype(np.uint8))


# ---------------------------------------------------------------------------
# PGM (binary, P5, maxval 255)


def _pgm_tokens(data: bytes, count: int):
    """Yield `count` whitespace-separated header tokens, honoring # comments.
    Returns (tokens, offset of the byte right after the final token)."""
    tokens = []
    i = 0
    n = len(data)
    while len(tokens) < count:
        while i < n and data[i : i + 1].isspace():
            i += 1
        if i < n and data[i : i + 1] == b"#":
            while i < n and data[i : i + 1] != b"\n":
                i += 1
            continue
        start = i
        while i < n and not data[i : i + 1].isspace():
            i += 1
        if start == i:
            raise FormatError("truncated PGM header")
        tokens.append(data[start:i])
    return tokens, i


def _load_pgm(data: bytes) -> PixelGrid:
    tokens, end = _pgm_tokens(data, 4)
    if tokens[0] != b"P5":
        raise FormatError(f"not a binary PGM (magic {tokens[0]!r})")
    try:
        width, height, maxval = (int(t) for t in tokens[1:])
    except ValueError as exc:
        raise FormatError("non-numeric PGM header field") from exc
    if maxval != 255:
        raise FormatError(f"unsupported PGM depth: maxval {maxval} (need 255)")
    if width <= 0 or height <= 0:
        raise FormatError("non-positive PGM dimensions")
    payload = data[end + 1 : end + 1 + width * height]  # single whitespace after maxval
    if len(payload) < width * height:
        raise FormatError("truncated PGM payload")
    arr = np.frombuffer(payload, dtype=np.uint8).reshape(height, width)
    return PixelGrid(arr.copy())


def _save_pgm(grid: PixelGrid) -> bytes:
    header = f"P5\n{grid.width} {grid.height}\n255\n".encode("ascii")
    return header + grid.pixels.tobytes()


# ---------------------------------------------------------------------------
# PNG via Pillow


def _load_png(path) -> PixelGrid:
    from PIL import Image

    with Image.open(path) as im:
        if im.mode == "L":
            arr = np.asarray(im)
        elif im.mode in ("RGB", "RGBA", "LA", "P"):
            im2 = im.convert("RGB") if im.mode == "P" else im
            warnings.warn(f"{path}: multi-channel PNG, keeping first channel only")
            arr = np.asarray(im2.getchannel(0))
        else:
            raise FormatError(f"unsupported PNG mode {im.mode!r} (need 8-bit grayscale)")
    return PixelGrid(arr.copy())


def load_image(path) -> PixelGrid:
    """Load a binary PGM (P5, maxval 255) or 8-bit grayscale PNG, bit-exact."""
    path = str(path)
    with open(path, "rb") as fh:
        head = fh.read(8)
    if head.startswith(b"P5"):
        with open(path, "rb") as fh:
            return _load_pgm(fh.read())
    if head.startswith(b"\x89PNG"):
        return _load_png(path)
    raise FormatError(f"{path}: unrecognized image format")


def save_image(grid: PixelGrid, path) -> None:
    """Write `grid` losslessly; format chosen by extension (.pgm or .png)."""
    path = str(path)
    if path.lower().endswith(".pgm"):
        with open(path, "wb") as fh:
            fh.write(_save_pgm(grid))
    elif path.lower().endswith(".png"):
        from PIL import Image

        Image.fromarray(grid.pixels, mode="L").save(path)
    else:
        raise FormatError(f"{path}: unsupported output extension (use .pgm or .png)")

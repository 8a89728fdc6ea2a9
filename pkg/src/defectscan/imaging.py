"""Image decoding, grayscale conversion, gray-level quantization, and tiling.

Rasters are thin frozen wrappers around read-only ``uint8`` numpy arrays in
row-major ``(height, width)`` layout; once constructed they are safe to share
across threads. Supported file formats are 8-bit grayscale/RGB PNG and binary
(P5) PGM, nothing else.
"""

from __future__ import annotations

import io
import os
from dataclasses import dataclass

import numpy as np
from PIL import Image

from ._util import atomic_write_bytes

_PNG_MAGIC = b"\x89PNG\r\n\x1a\n"
_PGM_MAGIC = b"P5"

# BT.601 luma weights; fixed so grayscale conversion is reproducible.
_LUMA_WEIGHTS = (0.299, 0.587, 0.114)


def _as_pixel_array(pixels, upper: int, what: str) -> np.ndarray:
    arr = np.asarray(pixels)
    if arr.ndim != 2:
        raise ValueError(f"{what} must be 2-D, got shape {arr.shape}")
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ValueError(f"zero-dimension {what}")
    if (
        not np.issubdtype(arr.dtype, np.integer)
        or int(arr.min()) < 0
        or int(arr.max()) > upper
    ):
        raise ValueError(f"{what} values must be integers in [0, {upper}]")
    out = arr.astype(np.uint8, copy=True)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class GrayImage:
    """8-bit grayscale raster; ``pixels`` is a read-only (height, width) array."""

    pixels: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "pixels", _as_pixel_array(self.pixels, 255, "image"))

    @property
    def height(self) -> int:
        return int(self.pixels.shape[0])

    @property
    def width(self) -> int:
        return int(self.pixels.shape[1])


@dataclass(frozen=True)
class QuantizedImage:
    """Raster over the reduced gray-level alphabet ``0 .. levels-1``."""

    pixels: np.ndarray
    levels: int

    def __post_init__(self):
        levels = int(self.levels)
        if not 2 <= levels <= 256:
            raise ValueError(f"levels out of range [2, 256]: {self.levels}")
        object.__setattr__(self, "levels", levels)
        object.__setattr__(
            self, "pixels", _as_pixel_array(self.pixels, levels - 1, "quantized image")
        )

    @property
    def height(self) -> int:
        return int(self.pixels.shape[0])

    @property
    def width(self) -> int:
        return int(self.pixels.shape[1])


@dataclass(frozen=True)
class WindowGrid:
    """Disjoint W x W tiling of a quantized image.

    Windows are anchored at multiples of W; right/bottom remainders smaller
    than a full window are dropped rather than padded, so every window feeds
    identically-sized statistics downstream.
    """

    image: QuantizedImage
    window: int

    def __post_init__(self):
        window = int(self.window)
        if window < 2:
            raise ValueError(f"window must be at least 2, got {self.window}")
        if window > min(self.image.width, self.image.height):
            raise ValueError(
                f"window {window} exceeds image dimensions "
                f"{self.image.width}x{self.image.height}"
            )
        object.__setattr__(self, "window", window)

    @property
    def rows(self) -> int:
        return self.image.height // self.window

    @property
    def cols(self) -> int:
        return self.image.width // self.window

    def block(self, row: int, col: int) -> np.ndarray:
        """Read-only pixel view of the window at grid cell (row, col)."""
        if not (0 <= row < self.rows and 0 <= col < self.cols):
            raise IndexError(
                f"window index ({row}, {col}) outside {self.rows}x{self.cols} grid"
            )
        w = self.window
        return self.image.pixels[row * w : (row + 1) * w, col * w : (col + 1) * w]

    def window_at(self, row: int, col: int) -> QuantizedImage:
        return QuantizedImage(self.block(row, col), self.image.levels)

    def __iter__(self):
        """Yield ``(row, col, window)`` in row-major order."""
        for row in range(self.rows):
            for col in range(self.cols):
                yield row, col, self.window_at(row, col)

    def __len__(self) -> int:
        return self.rows * self.cols


def to_grayscale(r, g, b):
    """BT.601 luma: ``round(0.299 r + 0.587 g + 0.114 b)`` clamped to [0, 255].

    Accepts scalars or equally-shaped arrays of intensities in [0, 255];
    returns an ``int`` for scalar input, a ``uint8`` array otherwise.
    """
    wr, wg, wb = _LUMA_WEIGHTS
    y = wr * np.asarray(r, dtype=np.float64) + wg * np.asarray(g, dtype=np.float64)
    y = y + wb * np.asarray(b, dtype=np.float64)
    out = np.clip(np.rint(y), 0, 255)
    if out.ndim == 0:
        return int(out)
    return out.astype(np.uint8)


def quantize(img: GrayImage, levels: int) -> QuantizedImage:
    """Reduce the gray-level alphabet to ``levels`` uniform bins.

    Each pixel maps to ``floor(p * levels / 256)``, which is monotone in the
    input and the exact identity at ``levels == 256``.

    Parameters
    ----------
    img : GrayImage
        Source raster.
    levels : int
        Target alphabet size, in [2, 256].

    Returns
    -------
    QuantizedImage
        Same dimensions, values in ``[0, levels - 1]``.
    """
    if not 2 <= int(levels) <= 256:
        raise ValueError(f"levels out of range [2, 256]: {levels}")
    q = (img.pixels.astype(np.uint32) * int(levels)) >> 8
    return QuantizedImage(q.astype(np.uint8), int(levels))


def tile(img: QuantizedImage, window: int) -> WindowGrid:
    """Split an image into the grid of disjoint ``window x window`` blocks.

    Requires ``2 <= window <= min(width, height)``; trailing margins that do
    not fill a whole window are excluded.
    """
    return WindowGrid(img, window)


# --------------------------------------------------------------------------
# File I/O
# --------------------------------------------------------------------------


def load_image(path: str | os.PathLike) -> GrayImage:
    """Decode an 8-bit grayscale or RGB PNG, or a binary (P5) PGM.

    RGB input is converted with :func:`to_grayscale`. Any other format or
    pixel mode is rejected.
    """
    path = os.fspath(path)
    try:
        with open(path, "rb") as fh:
            data = fh.read()
    except FileNotFoundError:
        raise FileNotFoundError(f"file not found: {path}") from None
    if data[:8] == _PNG_MAGIC:
        return _decode_png(data, path)
    if data[:2] == _PGM_MAGIC:
        return _decode_pgm(data, path)
    raise ValueError(f"unsupported format: {path} is neither PNG nor binary PGM")


def save_image(img: GrayImage, path: str | os.PathLike) -> None:
    """Write a grayscale raster as PNG or binary PGM, chosen by extension.

    The file is written atomically (temp file plus rename).
    """
    path = os.fspath(path)
    ext = os.path.splitext(path)[1].lower()
    if ext == ".png":
        buf = io.BytesIO()
        Image.fromarray(np.array(img.pixels), mode="L").save(buf, format="PNG")
        data = buf.getvalue()
    elif ext == ".pgm":
        header = f"P5\n{img.width} {img.height}\n255\n".encode("ascii")
        data = header + img.pixels.tobytes()
    else:
        raise ValueError(f"unsupported output format: {path} (use .png or .pgm)")
    atomic_write_bytes(path, data)


def _decode_png(data: bytes, path: str) -> GrayImage:
    img = Image.open(io.BytesIO(data))
    img.load()
    if img.mode == "L":
        arr = np.asarray(img, dtype=np.uint8)
    elif img.mode == "RGB":
        rgb = np.asarray(img)
        arr = to_grayscale(rgb[..., 0], rgb[..., 1], rgb[..., 2])
    else:
        raise ValueError(
            f"unsupported format: {path} has PNG mode {img.mode!r} "
            "(expected 8-bit grayscale or RGB)"
        )
    if arr.ndim != 2 or 0 in arr.shape:
        raise ValueError(f"zero-dimension image: {path}")
    return GrayImage(arr)


def _next_pgm_token(data: bytes, pos: int) -> tuple[bytes, int]:
    while pos < len(data):
        c = data[pos : pos + 1]
        if c.isspace():
            pos += 1
        elif c == b"#":
            nl = data.find(b"\n", pos)
            if nl < 0:
                raise ValueError("malformed PGM header: unterminated comment")
            pos = nl + 1
        else:
            break
    start = pos
    while pos < len(data) and not data[pos : pos + 1].isspace():
        pos += 1
    if start == pos:
        raise ValueError("malformed PGM header: missing token")
    return data[start:pos], pos


def _decode_pgm(data: bytes, path: str) -> GrayImage:
    magic, pos = _next_pgm_token(data, 0)
    if magic != _PGM_MAGIC:
        raise ValueError(f"unsupported format: {path} is not a binary (P5) PGM")
    fields = []
    for name in ("width", "height", "maxval"):
        token, pos = _next_pgm_token(data, pos)
        try:
            value = int(token)
        except ValueError:
            raise ValueError(f"malformed PGM header: bad {name} {token!r}") from None
        fields.append(value)
    width, height, maxval = fields
    if width < 1 or height < 1:
        raise ValueError(f"zero-dimension image: {path}")
    if not 1 <= maxval <= 255:
        raise ValueError(f"unsupported format: {path} has maxval {maxval} (need <= 255)")
    # Exactly one whitespace byte separates the header from the raster.
    pos += 1
    raw = data[pos : pos + width * height]
    if len(raw) != width * height:
        raise ValueError(f"malformed PGM: {path} is truncated")
    arr = np.frombuffer(raw, dtype=np.uint8).reshape(height, width)
    return GrayImage(arr)

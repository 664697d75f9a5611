"""Grayscale image decoding, cropping and bilinear resizing.

Images are held as read-only ``uint8`` arrays of shape ``(height, width)``.
PGM (binary P5) is parsed here; PNG goes through Pillow and colour data is
reduced with BT.601 luma weights.
"""

from __future__ import annotations

import io
import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import BoundsError, DecodeError, UnsupportedFormatError

PNG_SIGNATURE = b"\x89PNG\r\n\x1a\n"
DEFAULT_SIZE = 128


@dataclass(frozen=True)
class GrayImage:
    pixels: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.pixels)
        if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValueError(f"expected a non-empty 2-D array, got shape {arr.shape}")
        if arr.dtype != np.uint8:
            if arr.size and (arr.min() < 0 or arr.max() > 255):
                raise ValueError("intensities must lie in [0, 255]")
            arr = arr.astype(np.uint8)
        else:
            arr = arr.copy()
        arr.setflags(write=False)
        object.__setattr__(self, "pixels", arr)

    @classmethod
    def from_data(cls, width: int, height: int, data) -> "GrayImage":
        data = list(data)
        if len(data) != width * height:
            raise ValueError(f"data length {len(data)} != {width}x{height}")
        return cls(np.array(data, dtype=np.int64).reshape(height, width))

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def data(self) -> list[int]:
        """Row-major intensities."""
        return self.pixels.ravel().tolist()

    def __eq__(self, other):
        if not isinstance(other, GrayImage):
            return NotImplemented
        return np.array_equal(self.pixels, other.pixels)

    __hash__ = None


@dataclass(frozen=True)
class BoundingBox:
    x: int
    y: int
    w: int
    h: int

    def __post_init__(self):
        if self.x < 0 or self.y < 0:
            raise ValueError("bounding box offsets must be >= 0")
        if self.w < 1 or self.h < 1:
            raise ValueError("bounding box width and height must be >= 1")


def to_grayscale(r, g, b):
    """BT.601 luma, rounded half-up. Accepts scalars or integer arrays."""
    r, g, b = (np.asarray(c, dtype=np.int64) for c in (r, g, b))
    out = (299 * r + 587 * g + 114 * b + 500) // 1000
    return int(out) if out.ndim == 0 else out.astype(np.uint8)


_PGM_HEADER = re.compile(rb"P5(?:\s|#[^\n]*\n)+(\d+)(?:\s|#[^\n]*\n)+(\d+)(?:\s|#[^\n]*\n)+(\d+)\s")


def _decode_pgm(content: bytes) -> GrayImage:
    m = _PGM_HEADER.match(content)
    if m is None:
        raise DecodeError("PGM: malformed or truncated header")
    width, height, maxval = (int(g) for g in m.groups())
    if width < 1 or height < 1:
        raise DecodeError(f"PGM: invalid dimensions {width}x{height}")
    if not 1 <= maxval <= 65535:
        raise DecodeError(f"PGM: invalid maxval {maxval}")
    if maxval > 255:
        raise UnsupportedFormatError("PGM: 16-bit samples are not supported")
    body = content[m.end():]
    need = width * height
    if len(body) < need:
        raise DecodeError(f"PGM: truncated pixel data ({len(body)} of {need} bytes)")
    arr = np.frombuffer(body[:need], dtype=np.uint8).reshape(height, width)
    if maxval != 255:
        if arr.max() > maxval:
            raise DecodeError(f"PGM: sample exceeds maxval {maxval}")
        arr = (arr.astype(np.int64) * 510 + maxval) // (2 * maxval)
    return GrayImage(arr)


def _decode_png(content: bytes) -> GrayImage:
    from PIL import Image

    try:
        with Image.open(io.BytesIO(content)) as im:
            im.load()
            mode = im.mode
            if mode == "L":
                arr = np.asarray(im)
            elif mode in ("I;16", "I;16B", "I"):
                arr = np.asarray(im).astype(np.int64) >> 8
            elif mode == "LA":
                arr = np.asarray(im)[..., 0]
            elif mode == "1":
                arr = np.asarray(im.convert("L"))
            else:
                rgb = np.asarray(im.convert("RGB"))
                arr = to_grayscale(rgb[..., 0], rgb[..., 1], rgb[..., 2])
    except (OSError, SyntaxError, ValueError, EOFError) as exc:
        raise DecodeError(f"PNG: {exc}") from exc
    return GrayImage(np.clip(arr, 0, 255))


def decode_image(content: bytes) -> GrayImage:
    if content.startswith(b"P5"):
        return _decode_pgm(content)
    if content.startswith(PNG_SIGNATURE):
        return _decode_png(content)
    if content[:2] in (b"P1", b"P2", b"P3", b"P4", b"P6"):
        raise UnsupportedFormatError(f"Netpbm variant {content[:2].decode()} is not supported; use P5")
    raise UnsupportedFormatError("unrecognised image format (expected PGM P5 or PNG)")


def read_image(path) -> GrayImage:
    return decode_image(Path(path).read_bytes())


def encode_pgm(pixels) -> bytes:
    arr = np.asarray(pixels)
    if arr.ndim != 2:
        raise ValueError("PGM export needs a 2-D array")
    if arr.size and (arr.min() < 0 or arr.max() > 255):
        raise ValueError("PGM export needs values in [0, 255]")
    h, w = arr.shape
    return f"P5\n{w} {h}\n255\n".encode("ascii") + arr.astype(np.uint8).tobytes()


def write_pgm(path, pixels) -> None:
    Path(path).write_bytes(encode_pgm(pixels))


def crop(img: GrayImage, box: BoundingBox) -> GrayImage:
    if box.x + box.w > img.width:
        raise BoundsError(
            f"box right edge x+w={box.x + box.w} exceeds image width {img.width}", "right")
    if box.y + box.h > img.height:
        raise BoundsError(
            f"box bottom edge y+h={box.y + box.h} exceeds image height {img.height}", "bottom")
    return GrayImage(img.pixels[box.y:box.y + box.h, box.x:box.x + box.w])


def _sample_axis(n_in: int, n_out: int):
    # pixel-centre mapping, clamped at the borders
    src = (np.arange(n_out, dtype=np.float64) + 0.5) * (n_in / n_out) - 0.5
    src = np.clip(src, 0.0, n_in - 1)
    lo = np.floor(src).astype(np.int64)
    hi = np.minimum(lo + 1, n_in - 1)
    return lo, hi, src - lo


def resize_bilinear(img: GrayImage, out_w: int, out_h: int) -> GrayImage:
    if out_w < 1 or out_h < 1:
        raise ValueError(f"output size must be positive, got {out_w}x{out_h}")
    a = img.pixels.astype(np.float64)
    x0, x1, fx = _sample_axis(img.width, out_w)
    y0, y1, fy = _sample_axis(img.height, out_h)
    fx = fx[None, :]
    fy = fy[:, None]
    top = a[y0][:, x0] + (a[y0][:, x1] - a[y0][:, x0]) * fx
    bot = a[y1][:, x0] + (a[y1][:, x1] - a[y1][:, x0]) * fx
    out = top + (bot - top) * fy
    return GrayImage(np.clip(np.floor(out + 0.5), 0, 255).astype(np.uint8))


def normalize(img: GrayImage, size: int = DEFAULT_SIZE, box: BoundingBox | None = None) -> GrayImage:
    """Crop to ``box`` (coordinates in the original image), then resize to ``size``x``size``."""
    if box is not None:
        img = crop(img, box)
    if img.width == size and img.height == size:
        return img
    return resize_bilinear(img, size, size)

"""Binary-to-grayscale conversion and bilinear resizing.

Any byte stream can be viewed as a grayscale image: each byte is one pixel,
the width is picked from a bracket table keyed on file size, and the last
row is zero-padded.  Images of whatever origin are then resized to a common
square resolution before feature extraction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DataError

# (max size exclusive in bytes, width); 1 KB = 1024 bytes
_WIDTH_BRACKETS = (
    (10 * 1024, 32),
    (30 * 1024, 64),
    (60 * 1024, 128),
    (100 * 1024, 256),
    (200 * 1024, 384),
    (500 * 1024, 512),
    (1000 * 1024, 768),
)
_WIDTH_FALLBACK = 1024


@dataclass(frozen=True)
class GrayImage:
    width: int
    height: int
    pixels: np.ndarray  # uint8, shape (height, width), row-major

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise ValueError("image dimensions must be positive")
        if self.pixels.shape != (self.height, self.width):
            raise ValueError(
                f"pixel block {self.pixels.shape} does not match "
                f"{self.height}x{self.width}"
            )
        if self.pixels.dtype != np.uint8:
            raise ValueError("pixels must be uint8")

    def flat_bytes(self) -> bytes:
        return self.pixels.tobytes()


def bracket_width(num_bytes: int) -> int:
    for limit, width in _WIDTH_BRACKETS:
        if num_bytes < limit:
            return width
    return _WIDTH_FALLBACK


def bytes_to_grayscale(data: bytes) -> GrayImage:
    """View a byte stream as an image: byte value = pixel intensity.

    Width comes from the size bracket table, height is ceil(len/width),
    and the tail of the final row is zero-padded.
    """
    if len(data) == 0:
        raise DataError("cannot convert an empty byte stream to an image")
    width = bracket_width(len(data))
    height = math.ceil(len(data) / width)
    pixels = np.zeros(width * height, dtype=np.uint8)
    pixels[: len(data)] = np.frombuffer(data, dtype=np.uint8)
    return GrayImage(width=width, height=height, pixels=pixels.reshape(height, width))


def _axis_positions(in_size: int, out_size: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Corner-aligned source sampling: lower index, upper index, upper weight."""
    if out_size > 1:
        pos = np.arange(out_size) * ((in_size - 1) / (out_size - 1))
    else:
        pos = np.zeros(1)
    lo = np.floor(pos).astype(np.intp)
    lo = np.minimum(lo, max(in_size - 2, 0))
    hi = np.minimum(lo + 1, in_size - 1)
    return lo, hi, pos - lo


def resize_bilinear_array(images: np.ndarray, out_h: int, out_w: int) -> np.ndarray:
    """Bilinear resize of (..., H, W) pixel arrays to (..., out_h, out_w).

    Corner-aligned sampling (output corners hit input corners), values
    quantized round-half-up and clamped to [0, 255].
    """
    if out_h < 1 or out_w < 1:
        raise ValueError("output dimensions must be positive")
    arr = np.asarray(images, dtype=np.float64)
    if arr.ndim < 2:
        raise ValueError(f"expected (..., H, W) pixels, got shape {arr.shape}")
    in_h, in_w = arr.shape[-2], arr.shape[-1]
    y0, y1, wy = _axis_positions(in_h, out_h)
    x0, x1, wx = _axis_positions(in_w, out_w)
    wy = wy[:, None]
    top = arr[..., y0[:, None], x0] * (1.0 - wx) + arr[..., y0[:, None], x1] * wx
    bottom = arr[..., y1[:, None], x0] * (1.0 - wx) + arr[..., y1[:, None], x1] * wx
    out = top * (1.0 - wy) + bottom * wy
    return np.clip(np.floor(out + 0.5), 0, 255).astype(np.uint8)


def resize_bilinear(img: GrayImage, out_w: int = 64, out_h: int = 64) -> GrayImage:
    pixels = resize_bilinear_array(img.pixels, out_h, out_w)
    return GrayImage(width=out_w, height=out_h, pixels=pixels)

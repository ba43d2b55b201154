"""Procedural handwritten-style digit images (0, 1 and 8).

Stand-in source for the digit-classification tasks when no IDX files are
supplied: strokes are rendered as soft distance fields on a 28x28 grid with
jittered position, size, slant, stroke width and brightness, plus pixel
noise.  Deterministic per seed.  Only the digits used by the binary tasks
are supported.
"""

from __future__ import annotations

import numpy as np

SUPPORTED_DIGITS = (0, 1, 8)
IMAGE_SIZE = 28

_YS, _XS = np.mgrid[0:IMAGE_SIZE, 0:IMAGE_SIZE].astype(np.float64)


def _ring(cy, cx, ry, rx, rot, sigma):
    """Soft elliptical ring: brightness falls off with distance from the rim."""
    y = _YS - cy
    x = _XS - cx
    yr = y * np.cos(rot) - x * np.sin(rot)
    xr = y * np.sin(rot) + x * np.cos(rot)
    radial = np.sqrt((xr / rx) ** 2 + (yr / ry) ** 2)
    dist = np.abs(radial - 1.0) * min(rx, ry)
    return np.exp(-((dist / sigma) ** 2))


def _segment(y0, x0, y1, x1, sigma):
    """Soft line stroke between two points."""
    dy, dx = y1 - y0, x1 - x0
    length_sq = dy * dy + dx * dx
    if length_sq == 0:
        dist = np.hypot(_YS - y0, _XS - x0)
    else:
        t = np.clip(((_YS - y0) * dy + (_XS - x0) * dx) / length_sq, 0.0, 1.0)
        dist = np.hypot(_YS - (y0 + t * dy), _XS - (x0 + t * dx))
    return np.exp(-((dist / sigma) ** 2))


def _render_zero(rng) -> np.ndarray:
    cy = 14.0 + rng.uniform(-2.0, 2.0)
    cx = 14.0 + rng.uniform(-2.0, 2.0)
    scale = rng.uniform(0.82, 1.13)
    ry = rng.uniform(7.5, 9.5) * scale
    rx = rng.uniform(4.5, 6.5) * scale
    rot = rng.uniform(-0.32, 0.32)
    sigma = rng.uniform(1.0, 1.6)
    return _ring(cy, cx, ry, rx, rot, sigma)


def _render_one(rng) -> np.ndarray:
    cx = 14.0 + rng.uniform(-2.5, 2.5)
    slant = rng.uniform(-2.8, 2.8)
    y0 = 5.0 + rng.uniform(-1.2, 1.2)
    y1 = 22.5 + rng.uniform(-1.2, 1.2)
    sigma = rng.uniform(1.0, 1.8)
    ink = _segment(y0, cx + slant, y1, cx - slant, sigma)
    if rng.uniform() < 0.7:  # the little approach stroke at the top
        ink = np.maximum(ink, _segment(y0 + 2.5, cx + slant - 3.0, y0, cx + slant, sigma))
    if rng.uniform() < 0.3:  # base bar
        ink = np.maximum(ink, _segment(y1, cx - slant - 3.0, y1, cx - slant + 3.0, sigma))
    return ink


def _render_eight(rng) -> np.ndarray:
    cy = 14.0 + rng.uniform(-1.6, 1.6)
    cx = 14.0 + rng.uniform(-2.0, 2.0)
    scale = rng.uniform(0.82, 1.13)
    gap = rng.uniform(4.0, 5.0) * scale
    rot = rng.uniform(-0.25, 0.25)
    sigma = rng.uniform(1.0, 1.5)
    ry_top = rng.uniform(3.2, 4.2) * scale
    rx_top = rng.uniform(2.8, 4.0) * scale
    ry_bot = rng.uniform(3.6, 4.6) * scale
    rx_bot = rng.uniform(3.2, 4.4) * scale
    top = _ring(cy - gap, cx + rng.uniform(-0.8, 0.8), ry_top, rx_top, rot, sigma)
    bottom = _ring(cy + gap, cx + rng.uniform(-0.8, 0.8), ry_bot, rx_bot, rot, sigma)
    return np.maximum(top, bottom)


_RENDERERS = {0: _render_zero, 1: _render_one, 8: _render_eight}


def render_digit(digit: int, rng) -> np.ndarray:
    """One 28x28 uint8 image of `digit` with jitter and noise from `rng`."""
    renderer = _RENDERERS.get(digit)
    if renderer is None:
        raise ValueError(f"synthetic rendering supports digits {SUPPORTED_DIGITS}, got {digit}")
    ink = renderer(rng)
    brightness = rng.uniform(180.0, 255.0)
    pixels = ink * brightness + rng.normal(0.0, 7.0, size=ink.shape)
    return np.clip(np.floor(pixels + 0.5), 0, 255).astype(np.uint8)


def digit_image_pool(digits, per_digit: int, seed: int) -> tuple[np.ndarray, np.ndarray]:
    """Render `per_digit` images of each digit; labels carry the digit value."""
    if per_digit < 1:
        raise ValueError("per_digit must be positive")
    rng = np.random.default_rng(seed)
    images = np.empty((len(digits) * per_digit, IMAGE_SIZE, IMAGE_SIZE), dtype=np.uint8)
    labels = np.empty(len(digits) * per_digit, dtype=np.uint8)
    row = 0
    for _ in range(per_digit):
        for digit in digits:
            images[row] = render_digit(digit, rng)
            labels[row] = digit
            row += 1
    return images, labels

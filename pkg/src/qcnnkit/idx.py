"""Reading and writing IDX files (the MNIST container format).

Layout is big-endian throughout: a 32-bit magic (0x00000803 for unsigned-byte
image tensors, 0x00000801 for label vectors), one 32-bit size per dimension,
then the raw payload bytes.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .errors import DataError

IMAGE_MAGIC = 0x00000803
LABEL_MAGIC = 0x00000801

# sanity cap so a corrupt header cannot demand absurd allocations
_MAX_ELEMENTS = 1 << 33


def _read_header(data: bytes, path, expected_magic: int, num_dims: int) -> tuple[int, ...]:
    header_len = 4 + 4 * num_dims
    if len(data) < header_len:
        raise DataError(f"{path}: truncated IDX header")
    magic = struct.unpack(">I", data[:4])[0]
    if magic != expected_magic:
        raise DataError(
            f"{path}: bad IDX magic 0x{magic:08X}, expected 0x{expected_magic:08X}"
        )
    dims = struct.unpack(f">{num_dims}I", data[4:header_len])
    total = 1
    for d in dims:
        total *= d
    if total > _MAX_ELEMENTS:
        raise DataError(f"{path}: IDX dimensions {dims} overflow the sanity limit")
    if len(data) - header_len != total:
        raise DataError(
            f"{path}: IDX payload has {len(data) - header_len} bytes, "
            f"header declares {total}"
        )
    return dims


def load_idx_images(path) -> np.ndarray:
    """Load an image IDX file as a uint8 array of shape (count, rows, cols)."""
    data = Path(path).read_bytes()
    count, rows, cols = _read_header(data, path, IMAGE_MAGIC, 3)
    pixels = np.frombuffer(data, dtype=np.uint8, offset=16)
    return pixels.reshape(count, rows, cols).copy()


def load_idx_labels(path) -> np.ndarray:
    """Load a label IDX file as a uint8 array of shape (count,)."""
    data = Path(path).read_bytes()
    (count,) = _read_header(data, path, LABEL_MAGIC, 1)
    return np.frombuffer(data, dtype=np.uint8, offset=8).copy()


def write_idx_images(path, images: np.ndarray) -> None:
    images = np.ascontiguousarray(images, dtype=np.uint8)
    if images.ndim != 3:
        raise ValueError(f"expected (count, rows, cols) images, got shape {images.shape}")
    with open(path, "wb") as fh:
        fh.write(struct.pack(">IIII", IMAGE_MAGIC, *images.shape))
        fh.write(images.tobytes())


def write_idx_labels(path, labels: np.ndarray) -> None:
    labels = np.ascontiguousarray(labels, dtype=np.uint8)
    if labels.ndim != 1:
        raise ValueError(f"expected a 1-D label vector, got shape {labels.shape}")
    with open(path, "wb") as fh:
        fh.write(struct.pack(">II", LABEL_MAGIC, labels.shape[0]))
        fh.write(labels.tobytes())


def select_binary_classes(
    images: np.ndarray, labels: np.ndarray, class_a: int, class_b: int
) -> tuple[np.ndarray, np.ndarray]:
    """Keep only two source classes and relabel them 0 (class_a) and 1 (class_b)."""
    if class_a == class_b:
        raise ValueError("class_a and class_b must differ")
    labels = np.asarray(labels)
    if images.shape[0] != labels.shape[0]:
        raise DataError(
            f"{images.shape[0]} images but {labels.shape[0]} labels"
        )
    mask = (labels == class_a) | (labels == class_b)
    if not mask.any():
        raise DataError(f"dataset contains no samples of class {class_a} or {class_b}")
    kept = labels[mask]
    for cls in (class_a, class_b):
        if not (kept == cls).any():
            raise DataError(f"dataset contains no samples of class {cls}")
    return images[mask], (kept == class_b).astype(np.int64)

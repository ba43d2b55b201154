"""Flat binary cache for labeled feature matrices.

Layout, all little-endian: u32 magic 0x51434E4E, u32 n_rows, u32 n_cols,
u32 reserved (zero), then n_rows*n_cols float64 values row-major, then
n_rows label bytes.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .errors import DataError

CACHE_MAGIC = 0x51434E4E
_HEADER = struct.Struct("<IIII")


def write_feature_cache(path, features: np.ndarray, labels: np.ndarray) -> None:
    feats = np.ascontiguousarray(features, dtype="<f8")
    labs = np.ascontiguousarray(labels, dtype=np.uint8)
    if feats.ndim != 2:
        raise ValueError(f"features must be 2-D, got shape {feats.shape}")
    if labs.shape != (feats.shape[0],):
        raise ValueError(
            f"got {feats.shape[0]} feature rows but {labs.shape} labels"
        )
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(CACHE_MAGIC, feats.shape[0], feats.shape[1], 0))
        fh.write(feats.tobytes())
        fh.write(labs.tobytes())


def load_feature_cache(path) -> tuple[np.ndarray, np.ndarray]:
    data = Path(path).read_bytes()
    if len(data) < _HEADER.size:
        raise DataError(f"{path}: truncated cache header")
    magic, n_rows, n_cols, _reserved = _HEADER.unpack_from(data)
    if magic != CACHE_MAGIC:
        raise DataError(f"{path}: bad cache magic 0x{magic:08X}")
    expected = _HEADER.size + n_rows * n_cols * 8 + n_rows
    if len(data) != expected:
        raise DataError(
            f"{path}: cache holds {len(data)} bytes, header declares {expected}"
        )
    feats = np.frombuffer(data, dtype="<f8", count=n_rows * n_cols, offset=_HEADER.size)
    labels = np.frombuffer(data, dtype=np.uint8, offset=_HEADER.size + n_rows * n_cols * 8)
    return feats.reshape(n_rows, n_cols).copy(), labels.astype(np.int64)

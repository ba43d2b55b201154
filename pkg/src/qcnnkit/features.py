"""PCA feature extraction, angle scaling and stratified splitting.

PCA is fit on the training split only; the frozen model then transforms the
test split.  Scaled features land in [0, pi/2] so they can feed rotation
encodings directly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.sparse.linalg import LinearOperator, eigsh

from .errors import DataError

# below this input dimension a dense eigendecomposition is cheaper than Lanczos
_DENSE_DIM_LIMIT = 256


@dataclass(frozen=True)
class PcaModel:
    """Centered top-k principal subspace, components ordered by variance."""

    mean: np.ndarray  # (d,)
    components: np.ndarray  # (k, d), orthonormal rows
    explained_variance: np.ndarray  # (k,), non-increasing

    @property
    def input_dim(self) -> int:
        return self.mean.shape[0]

    @property
    def num_components(self) -> int:
        return self.components.shape[0]


def _fix_signs(components: np.ndarray) -> np.ndarray:
    """Flip rows so each component's largest-magnitude entry is positive."""
    lead = np.abs(components).argmax(axis=1)
    signs = np.sign(components[np.arange(components.shape[0]), lead])
    signs[signs == 0] = 1.0
    return components * signs[:, None]


def pca_fit(matrix: np.ndarray, k: int) -> PcaModel:
    """Fit a k-component PCA on rows of `matrix`.

    Uses a dense symmetric eigendecomposition for small input dimensions and
    a Lanczos iteration on the implicit covariance operator for large ones
    (the covariance matrix itself is never materialized then).  Both paths
    are deterministic; component signs follow a fixed convention.
    """
    x = np.asarray(matrix, dtype=np.float64)
    if x.ndim != 2:
        raise ValueError(f"expected a 2-D matrix, got shape {x.shape}")
    n, d = x.shape
    if n < 2:
        raise ValueError("PCA needs at least two rows")
    if not 1 <= k <= min(n - 1, d):
        raise ValueError(
            f"num_components must lie in [1, min(n-1, d)] = "
            f"[1, {min(n - 1, d)}], got {k}"
        )
    mean = x.mean(axis=0)
    centered = x - mean
    if not np.any(centered):
        raise DataError("matrix is constant, PCA is undefined")

    if d <= _DENSE_DIM_LIMIT or k >= d - 1:
        cov = centered.T @ centered / (n - 1)
        eigvals, eigvecs = np.linalg.eigh(cov)
        order = np.argsort(eigvals)[::-1][:k]
        variances = eigvals[order]
        components = eigvecs[:, order].T
    else:
        def matvec(v):
            return centered.T @ (centered @ v) / (n - 1)

        op = LinearOperator((d, d), matvec=matvec, dtype=np.float64)
        # fixed start vector keeps the iteration deterministic
        v0 = np.full(d, 1.0 / math.sqrt(d))
        eigvals, eigvecs = eigsh(op, k=k, which="LA", v0=v0)
        order = np.argsort(eigvals)[::-1]
        variances = eigvals[order]
        components = eigvecs[:, order].T

    return PcaModel(
        mean=mean,
        components=_fix_signs(np.ascontiguousarray(components)),
        explained_variance=np.maximum(variances, 0.0),
    )


def pca_transform(model: PcaModel, matrix: np.ndarray) -> np.ndarray:
    x = np.asarray(matrix, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] != model.input_dim:
        raise ValueError(
            f"expected shape (n, {model.input_dim}), got {x.shape}"
        )
    return (x - model.mean) @ model.components.T


@dataclass(frozen=True)
class MinMaxScaler:
    """Per-feature training range, mapped onto [0, pi/2]."""

    feature_min: np.ndarray
    feature_max: np.ndarray


def scale_fit(matrix: np.ndarray) -> MinMaxScaler:
    x = np.asarray(matrix, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] == 0:
        raise ValueError(f"expected a non-empty 2-D matrix, got shape {x.shape}")
    return MinMaxScaler(feature_min=x.min(axis=0), feature_max=x.max(axis=0))


def scale_transform(scaler: MinMaxScaler, matrix: np.ndarray) -> np.ndarray:
    """Map features into [0, pi/2]; constant columns go to 0, outliers clamp."""
    x = np.asarray(matrix, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] != scaler.feature_min.shape[0]:
        raise ValueError(
            f"expected shape (n, {scaler.feature_min.shape[0]}), got {x.shape}"
        )
    span = scaler.feature_max - scaler.feature_min
    safe_span = np.where(span > 0, span, 1.0)
    scaled = (x - scaler.feature_min) / safe_span * (math.pi / 2)
    scaled = np.where(span > 0, scaled, 0.0)
    return np.clip(scaled, 0.0, math.pi / 2)


def _largest_remainder(counts: np.ndarray, total: int) -> np.ndarray:
    """Allocate `total` items proportionally to `counts`, never exceeding them."""
    shares = counts * (total / counts.sum())
    alloc = np.floor(shares).astype(np.int64)
    remainder = total - int(alloc.sum())
    # ties broken by class order for determinism
    order = np.argsort(-(shares - alloc), kind="stable")
    for idx in order:
        if remainder == 0:
            break
        if alloc[idx] < counts[idx]:
            alloc[idx] += 1
            remainder -= 1
    return alloc


def stratified_split(
    labels: np.ndarray, n_train: int, n_test: int, seed: int
) -> tuple[np.ndarray, np.ndarray]:
    """Disjoint index arrays for a seeded, class-proportional train/test split."""
    labels = np.asarray(labels)
    if labels.ndim != 1:
        raise ValueError(f"labels must be 1-D, got shape {labels.shape}")
    if n_train < 1 or n_test < 1:
        raise ValueError("split sizes must be positive")
    if n_train + n_test > labels.shape[0]:
        raise ValueError(
            f"requested {n_train}+{n_test} samples from a pool of {labels.shape[0]}"
        )
    rng = np.random.default_rng(seed)
    classes = np.unique(labels)
    class_counts = np.array([(labels == c).sum() for c in classes])
    train_alloc = _largest_remainder(class_counts, n_train)
    test_alloc = _largest_remainder(class_counts - train_alloc, n_test)

    train_parts, test_parts = [], []
    for cls, tr, te in zip(classes, train_alloc, test_alloc):
        pool = rng.permutation(np.flatnonzero(labels == cls))
        train_parts.append(pool[:tr])
        test_parts.append(pool[tr : tr + te])
    train_idx = rng.permutation(np.concatenate(train_parts))
    test_idx = rng.permutation(np.concatenate(test_parts))
    return train_idx, test_idx

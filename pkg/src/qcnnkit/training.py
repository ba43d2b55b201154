"""Loss, SPSB gradient estimation, metrics and the epoch training loop.

The optimizer is a simultaneous-perturbation estimator: each step draws one
Rademacher direction, evaluates the batch loss at theta +/- epsilon*delta,
and uses the central difference along that direction as a full gradient
estimate.  Two loss evaluations per step regardless of the parameter count.

Randomness contract: one generator per run, seeded from the config, consumed
in a fixed order (parameter init, then per epoch one shuffle followed by one
Rademacher draw per batch).  A run is a pure function of (datasets, config).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import Architecture, forward

INIT_MODES = ("random_uniform", "zeros", "two_pi")

# cap on amplitudes held at once when evaluating large sample sets
_CHUNK_AMPLITUDES = 1 << 24


@dataclass
class LabeledDataset:
    """Feature matrix of shape (N, F) with one {0,1} label per row."""

    features: np.ndarray
    labels: np.ndarray

    def __post_init__(self):
        self.features = np.asarray(self.features, dtype=np.float64)
        self.labels = np.asarray(self.labels, dtype=np.int64)
        if self.features.ndim != 2:
            raise ValueError(f"features must be 2-D, got shape {self.features.shape}")
        if self.labels.shape != (self.features.shape[0],):
            raise ValueError(
                f"got {self.features.shape[0]} feature rows but "
                f"{self.labels.shape} labels"
            )
        if not np.isin(self.labels, (0, 1)).all():
            raise ValueError("labels must be 0 or 1")

    def __len__(self) -> int:
        return self.features.shape[0]


@dataclass(frozen=True)
class TrainConfig:
    # spsb_epsilon 0.2 rad: with the constant 0.1 learning rate, smaller
    # perturbations make late-epoch steps bounce out of good minima
    epochs: int = 5
    learning_rate: float = 0.1
    batch_size: int = 32
    spsb_epsilon: float = 0.2
    init_mode: str = "random_uniform"
    seed: int = 0
    prob_clamp: float = 1e-10

    def __post_init__(self):
        if self.epochs < 1:
            raise ValueError("epochs must be positive")
        if self.learning_rate < 0:
            raise ValueError("learning_rate must be non-negative")
        if self.batch_size < 1:
            raise ValueError("batch_size must be positive")
        if self.spsb_epsilon <= 0:
            raise ValueError("spsb_epsilon must be positive")
        if self.init_mode not in INIT_MODES:
            raise ValueError(f"init_mode must be one of {INIT_MODES}, got {self.init_mode!r}")
        if not 0 < self.prob_clamp < 0.5:
            raise ValueError("prob_clamp must lie in (0, 0.5)")


@dataclass(frozen=True)
class EpochMetrics:
    epoch: int
    train_accuracy: float
    test_accuracy: float
    train_f1: float
    test_f1: float
    train_loss: float


def cross_entropy(p1_values, labels, clamp: float = 1e-10) -> float:
    """Summed binary cross-entropy of class-1 probabilities against labels.

    Probabilities are clipped to [clamp, 1 - clamp] before the log so that
    confident mistakes stay finite.
    """
    p1 = np.asarray(p1_values, dtype=np.float64)
    y = np.asarray(labels, dtype=np.float64)
    if p1.shape != y.shape:
        raise ValueError(f"shape mismatch: p1 {p1.shape} vs labels {y.shape}")
    if np.any(p1 < 0.0) or np.any(p1 > 1.0):
        raise ValueError("probabilities must lie in [0, 1]")
    p1 = np.clip(p1, clamp, 1.0 - clamp)
    return float(-np.sum(y * np.log(p1) + (1.0 - y) * np.log(1.0 - p1)))


def spsb_gradient(loss_at, params: np.ndarray, epsilon: float, rng) -> np.ndarray:
    """One simultaneous-perturbation gradient estimate, two loss evaluations.

    Draws delta uniformly from {-1, +1}^d and returns
    [L(theta + eps*delta) - L(theta - eps*delta)] / (2*eps) * delta.
    Unbiased for the true gradient in the small-epsilon limit.
    """
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    params = np.asarray(params, dtype=np.float64)
    delta = rng.integers(0, 2, size=params.shape[0]) * 2.0 - 1.0
    scale = (loss_at(params + epsilon * delta) - loss_at(params - epsilon * delta)) / (
        2.0 * epsilon
    )
    return scale * delta


def finite_diff_gradient(loss_at, params: np.ndarray, h: float = 1e-5) -> np.ndarray:
    """Central-difference gradient, one coordinate at a time (test oracle)."""
    if h <= 0:
        raise ValueError("h must be positive")
    params = np.asarray(params, dtype=np.float64)
    grad = np.empty_like(params)
    for i in range(params.shape[0]):
        shift = np.zeros_like(params)
        shift[i] = h
        grad[i] = (loss_at(params + shift) - loss_at(params - shift)) / (2.0 * h)
    return grad


def init_params(arch: Architecture, mode: str, rng) -> np.ndarray:
    if mode == "zeros":
        return np.zeros(arch.param_count)
    if mode == "two_pi":
        return np.full(arch.param_count, 2.0 * math.pi)
    if mode == "random_uniform":
        return rng.uniform(0.0, 2.0 * math.pi, size=arch.param_count)
    raise ValueError(f"init_mode must be one of {INIT_MODES}, got {mode!r}")


def predict(p1):
    """Threshold class-1 probabilities at 0.5; ties go to class 1."""
    if np.isscalar(p1) or np.ndim(p1) == 0:
        return int(p1 >= 0.5)
    return (np.asarray(p1) >= 0.5).astype(np.int64)


def accuracy(preds, labels) -> float:
    preds = np.asarray(preds)
    labels = np.asarray(labels)
    if preds.shape != labels.shape:
        raise ValueError(f"shape mismatch: preds {preds.shape} vs labels {labels.shape}")
    if preds.size == 0:
        raise ValueError("accuracy of an empty set is undefined")
    return float(np.mean(preds == labels))


def f1_score(preds, labels, positive_class: int = 1) -> float:
    """Harmonic mean of precision and recall; 0.0 when the denominator is 0."""
    preds = np.asarray(preds)
    labels = np.asarray(labels)
    if preds.shape != labels.shape:
        raise ValueError(f"shape mismatch: preds {preds.shape} vs labels {labels.shape}")
    if preds.size == 0:
        raise ValueError("f1 of an empty set is undefined")
    tp = int(np.sum((preds == positive_class) & (labels == positive_class)))
    fp = int(np.sum((preds == positive_class) & (labels != positive_class)))
    fn = int(np.sum((preds != positive_class) & (labels == positive_class)))
    denom = 2 * tp + fp + fn
    if denom == 0:
        return 0.0
    return 2.0 * tp / denom


def predict_proba(arch: Architecture, params, features) -> np.ndarray:
    """Class-1 probabilities for a feature matrix, evaluated in memory-bounded chunks."""
    feats = np.asarray(features, dtype=np.float64)
    if feats.ndim != 2:
        raise ValueError(f"features must be 2-D, got shape {feats.shape}")
    chunk = max(1, _CHUNK_AMPLITUDES >> arch.total_qubits)
    out = np.empty(feats.shape[0])
    for start in range(0, feats.shape[0], chunk):
        _, _, p1 = forward(arch, params, feats[start : start + chunk])
        out[start : start + chunk] = p1
    return out


def _evaluate(arch, params, dataset, clamp):
    p1 = predict_proba(arch, params, dataset.features)
    preds = predict(p1)
    loss = cross_entropy(p1, dataset.labels, clamp) / len(dataset)
    return accuracy(preds, dataset.labels), f1_score(preds, dataset.labels), loss


def train_model(
    arch: Architecture,
    train_set: LabeledDataset,
    test_set: LabeledDataset,
    config: TrainConfig,
) -> tuple[list[EpochMetrics], np.ndarray]:
    """Run the SPSB training loop and score both sets after every epoch.

    Each epoch shuffles the training set, then for every batch takes one
    SPSB step on the mean batch cross-entropy: theta <- theta - lr * g_hat.
    Reported train_loss is the mean per-sample cross-entropy over the full
    training set at the end of the epoch.
    """
    for name, ds in (("train", train_set), ("test", test_set)):
        if len(ds) == 0:
            raise ValueError(f"{name} set is empty")
        if ds.features.shape[1] != arch.feature_count:
            raise ValueError(
                f"{name} set has {ds.features.shape[1]} features, "
                f"architecture expects {arch.feature_count}"
            )

    rng = np.random.default_rng(config.seed)
    params = init_params(arch, config.init_mode, rng)
    n = len(train_set)

    history = []
    for epoch in range(1, config.epochs + 1):
        order = rng.permutation(n)
        for start in range(0, n, config.batch_size):
            batch = order[start : start + config.batch_size]
            feats = train_set.features[batch]
            labels = train_set.labels[batch]

            def batch_loss(theta):
                _, _, p1 = forward(arch, theta, feats)
                return cross_entropy(p1, labels, config.prob_clamp) / batch.shape[0]

            grad = spsb_gradient(batch_loss, params, config.spsb_epsilon, rng)
            params = params - config.learning_rate * grad

        train_acc, train_f1, train_loss = _evaluate(arch, params, train_set, config.prob_clamp)
        test_p1 = predict_proba(arch, params, test_set.features)
        test_preds = predict(test_p1)
        history.append(
            EpochMetrics(
                epoch=epoch,
                train_accuracy=train_acc,
                test_accuracy=accuracy(test_preds, test_set.labels),
                train_f1=train_f1,
                test_f1=f1_score(test_preds, test_set.labels),
                train_loss=train_loss,
            )
        )
    return history, params


def gradient_variance_probe(arch: Architecture, num_samples: int, rng, h: float = 1e-5) -> np.ndarray:
    """Per-parameter variance of the single-sample loss gradient.

    Draws (params, features) pairs uniformly (params in [0, 2*pi), features
    in [0, pi/2]), computes the finite-difference gradient of the label-1
    cross-entropy for each draw, and returns the variance per coordinate.
    A flat, vanishing profile at small qubit counts would hint at barren
    plateaus; this probe records values and asserts nothing.
    """
    if num_samples < 1:
        raise ValueError("num_samples must be positive")
    grads = np.empty((num_samples, arch.param_count))
    for k in range(num_samples):
        params = rng.uniform(0.0, 2.0 * math.pi, size=arch.param_count)
        feats = rng.uniform(0.0, math.pi / 2.0, size=arch.feature_count)

        def sample_loss(theta):
            _, _, p1 = forward(arch, theta, feats)
            return cross_entropy(np.array([p1]), np.array([1]), 1e-10)

        grads[k] = finite_diff_gradient(sample_loss, params, h)
    return np.var(grads, axis=0)

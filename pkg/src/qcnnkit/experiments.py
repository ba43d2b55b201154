"""Experiment orchestration: data preparation, training runs, comparisons.

Every run is a pure function of its resolved configuration.  Raw data comes
either from user-supplied files (IDX archives, labeled corpus directories)
or from the built-in deterministic generators; features always flow through
the same resize -> flatten -> PCA -> angle-scale pipeline, with the PCA and
scaler fit on the training split only.

Output files (results.csv, manifest.json, feature caches) are written
atomically: temp file in the target directory, then rename.
"""

from __future__ import annotations

import json
import math
import os
import tempfile
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .cache import write_feature_cache
from .config import TRAIN_F1_TASKS, ExperimentConfig, config_to_mapping
from .corpus import load_corpus, synth_binary_corpus
from .digits import digit_image_pool
from .errors import ConfigError
from .features import pca_fit, pca_transform, scale_fit, scale_transform, stratified_split
from .idx import load_idx_images, load_idx_labels, select_binary_classes
from .images import bytes_to_grayscale, resize_bilinear, resize_bilinear_array
from .model import build_architecture, feature_count, forward
from .training import (
    LabeledDataset,
    cross_entropy,
    finite_diff_gradient,
    gradient_variance_probe,
    init_params,
    spsb_gradient,
    train_model,
)

IMAGE_SIDE = 64
GRADCHECK_BOUND = 0.05

# resize/flatten in slabs to bound the float64 intermediates
_RESIZE_CHUNK = 2048

METRIC_FIELDS = {
    "train_acc": "train_accuracy",
    "test_acc": "test_accuracy",
    "test_f1": "test_f1",
    "train_f1": "train_f1",
}


@dataclass(frozen=True)
class PreparedData:
    """Scaled feature matrices for one split, plus pipeline provenance."""

    train_features: np.ndarray
    train_labels: np.ndarray
    test_features: np.ndarray
    test_labels: np.ndarray
    explained_variance: np.ndarray
    data_source: str


@dataclass(frozen=True)
class MetricRow:
    layers: int
    uploading: bool
    metric: str
    values: tuple[float, ...]
    delta: float | None = None


def _atomic_write_bytes(path: Path, data: bytes) -> None:
    fd, tmp_name = tempfile.mkstemp(dir=path.parent, prefix=path.name + ".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp_name, path)
    except BaseException:
        if os.path.exists(tmp_name):
            os.unlink(tmp_name)
        raise


def _resize_flatten(images: np.ndarray) -> np.ndarray:
    """(N, h, w) uint8 -> (N, IMAGE_SIDE**2) float64, chunked."""
    out = np.empty((images.shape[0], IMAGE_SIDE * IMAGE_SIDE))
    for start in range(0, images.shape[0], _RESIZE_CHUNK):
        chunk = images[start : start + _RESIZE_CHUNK]
        resized = resize_bilinear_array(chunk, IMAGE_SIDE, IMAGE_SIDE)
        out[start : start + _RESIZE_CHUNK] = resized.reshape(chunk.shape[0], -1)
    return out


def _digit_pixels(cfg: ExperimentConfig) -> tuple[np.ndarray, np.ndarray, str]:
    class_a, class_b = cfg.binary_classes()
    if cfg.images_path:
        for path in (cfg.images_path, cfg.labels_path):
            if not Path(path).is_file():
                raise FileNotFoundError(f"{path} not found")
        images = load_idx_images(cfg.images_path)
        labels = load_idx_labels(cfg.labels_path)
        source = "idx_files"
    else:
        images, labels = digit_image_pool(
            (class_a, class_b), cfg.pool_per_class(), cfg.data_seed
        )
        source = "synthetic_digits"
    images, binary_labels = select_binary_classes(images, labels, class_a, class_b)
    return _resize_flatten(images), binary_labels, source


def _corpus_pixels(cfg: ExperimentConfig) -> tuple[np.ndarray, np.ndarray, str]:
    if cfg.task == "synthetic_malware":
        files, labels = synth_binary_corpus(cfg.pool_per_class(), cfg.data_seed)
        source = "synthetic_corpus"
    else:
        files, labels = load_corpus(cfg.corpus_dir)
        source = "corpus_dir"
    pixels = np.empty((len(files), IMAGE_SIDE * IMAGE_SIDE))
    for i, blob in enumerate(files):
        img = resize_bilinear(bytes_to_grayscale(blob), IMAGE_SIDE, IMAGE_SIDE)
        pixels[i] = img.pixels.reshape(-1)
    return pixels, labels, source


def prepare_features(cfg: ExperimentConfig, num_components: int) -> PreparedData:
    """Raw task data -> stratified split -> PCA(num_components) -> [0, pi/2]."""
    if cfg.task in ("mnist01", "mnist08"):
        pixels, labels, source = _digit_pixels(cfg)
    else:
        pixels, labels, source = _corpus_pixels(cfg)

    train_idx, test_idx = stratified_split(labels, cfg.train_size, cfg.test_size, cfg.seed)
    pca = pca_fit(pixels[train_idx], num_components)
    train_feats = pca_transform(pca, pixels[train_idx])
    test_feats = pca_transform(pca, pixels[test_idx])
    scaler = scale_fit(train_feats)
    return PreparedData(
        train_features=scale_transform(scaler, train_feats),
        train_labels=labels[train_idx],
        test_features=scale_transform(scaler, test_feats),
        test_labels=labels[test_idx],
        explained_variance=pca.explained_variance,
        data_source=source,
    )


def _single_model_uploading(cfg: ExperimentConfig) -> bool:
    if cfg.uploading == "both":
        raise ConfigError("this command needs uploading=true or uploading=false")
    return cfg.uploading == "true"


def _datasets(data: PreparedData, width: int) -> tuple[LabeledDataset, LabeledDataset]:
    return (
        LabeledDataset(data.train_features[:, :width], data.train_labels),
        LabeledDataset(data.test_features[:, :width], data.test_labels),
    )


def run_prepare(cfg: ExperimentConfig) -> dict:
    """Materialize feature caches and a pipeline summary in the output directory."""
    uploading = _single_model_uploading(cfg)
    arch = build_architecture(cfg.num_layers, uploading)
    data = prepare_features(cfg, arch.feature_count)

    out_dir = Path(cfg.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    train_cache = out_dir / "train_features.bin"
    test_cache = out_dir / "test_features.bin"
    write_feature_cache(train_cache, data.train_features, data.train_labels)
    write_feature_cache(test_cache, data.test_features, data.test_labels)

    summary = {
        "task": cfg.task,
        "data_source": data.data_source,
        "num_components": arch.feature_count,
        "train_rows": int(data.train_labels.shape[0]),
        "test_rows": int(data.test_labels.shape[0]),
        "explained_variance": [float(v) for v in data.explained_variance],
        "feature_min": [float(v) for v in data.train_features.min(axis=0)],
        "feature_max": [float(v) for v in data.train_features.max(axis=0)],
    }
    summary_path = out_dir / "pipeline.json"
    _atomic_write_bytes(
        summary_path, (json.dumps(summary, indent=2, sort_keys=True) + "\n").encode()
    )
    return {
        "train_cache": str(train_cache),
        "test_cache": str(test_cache),
        "summary": str(summary_path),
        "num_components": arch.feature_count,
        "train_rows": summary["train_rows"],
        "test_rows": summary["test_rows"],
        "data_source": data.data_source,
    }


def _format_value(value: float) -> str:
    return f"{value:.4f}"


def results_csv_text(rows: list[MetricRow], epochs: int, with_delta: bool) -> str:
    header = ["layers", "uploading", "metric"] + [f"e{i}" for i in range(1, epochs + 1)]
    if with_delta:
        header.append("delta")
    lines = [",".join(header)]
    for row in rows:
        cells = [str(row.layers), "true" if row.uploading else "false", row.metric]
        cells += [_format_value(v) for v in row.values]
        if with_delta:
            cells.append("" if row.delta is None else _format_value(row.delta))
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def _metric_names(task: str) -> list[str]:
    names = ["train_acc", "test_acc", "test_f1"]
    if task in TRAIN_F1_TASKS:
        names.append("train_f1")
    return names


def _model_rows(cfg, layers, uploading, history) -> list[MetricRow]:
    rows = []
    for metric in _metric_names(cfg.task):
        field = METRIC_FIELDS[metric]
        values = tuple(getattr(epoch, field) for epoch in history)
        rows.append(MetricRow(layers=layers, uploading=uploading, metric=metric, values=values))
    return rows


def _timed_training(arch, train_set, test_set, train_cfg):
    start = time.perf_counter()
    history, params = train_model(arch, train_set, test_set, train_cfg)
    seconds = time.perf_counter() - start
    return history, params, seconds / len(history)


def _write_manifest(cfg: ExperimentConfig, extra: dict) -> Path:
    manifest = {key: value for key, value in config_to_mapping(cfg).items()}
    manifest["artifact_version"] = __version__
    manifest.update(extra)
    path = Path(cfg.out_dir) / "manifest.json"
    _atomic_write_bytes(path, (json.dumps(manifest, indent=2, sort_keys=True) + "\n").encode())
    return path


def run_train(cfg: ExperimentConfig) -> dict:
    """Train one model and write results.csv plus manifest.json."""
    uploading = _single_model_uploading(cfg)
    arch = build_architecture(cfg.num_layers, uploading)
    data = prepare_features(cfg, arch.feature_count)
    train_set, test_set = _datasets(data, arch.feature_count)
    history, _params, epoch_seconds = _timed_training(arch, train_set, test_set, cfg.train_config())

    rows = _model_rows(cfg, cfg.num_layers, uploading, history)
    out_dir = Path(cfg.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    csv_path = out_dir / "results.csv"
    _atomic_write_bytes(csv_path, results_csv_text(rows, cfg.epochs, with_delta=False).encode())
    manifest_path = _write_manifest(
        cfg,
        {
            "param_count": arch.param_count,
            "feature_count": arch.feature_count,
            "data_source": data.data_source,
            "epoch_seconds_mean": f"{epoch_seconds:.3f}",
        },
    )
    return {
        "results_csv": str(csv_path),
        "manifest": str(manifest_path),
        "rows": [row.__dict__ for row in rows],
        "final": history[-1].__dict__,
        "param_count": arch.param_count,
        "feature_count": arch.feature_count,
    }


def run_compare(cfg: ExperimentConfig) -> dict:
    """Train standard and uploading models per layer count on shared splits.

    Both models of a layer count see the same split and seed; the standard
    model's features are the leading 2**n columns of the uploading model's,
    so the runs differ only in architecture and feature width.  Uploading
    rows carry a delta column: final-epoch value minus the standard row's.
    """
    all_rows: list[MetricRow] = []
    info: dict[str, object] = {}
    for layers in cfg.compare_layer_list():
        wide = feature_count(layers, uploading=True)
        data = prepare_features(cfg, wide)
        per_model_rows = {}
        for uploading in (False, True):
            arch = build_architecture(layers, uploading)
            train_set, test_set = _datasets(data, arch.feature_count)
            history, _params, epoch_seconds = _timed_training(
                arch, train_set, test_set, cfg.train_config()
            )
            per_model_rows[uploading] = _model_rows(cfg, layers, uploading, history)
            tag = f"l{layers}_{'uploading' if uploading else 'standard'}"
            info[f"param_count_{tag}"] = arch.param_count
            info[f"feature_count_{tag}"] = arch.feature_count
            info[f"epoch_seconds_mean_{tag}"] = f"{epoch_seconds:.3f}"
        standard_final = {row.metric: row.values[-1] for row in per_model_rows[False]}
        with_delta = [
            MetricRow(
                layers=row.layers,
                uploading=True,
                metric=row.metric,
                values=row.values,
                delta=row.values[-1] - standard_final[row.metric],
            )
            for row in per_model_rows[True]
        ]
        all_rows.extend(per_model_rows[False])
        all_rows.extend(with_delta)

    out_dir = Path(cfg.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    csv_path = out_dir / "results.csv"
    _atomic_write_bytes(csv_path, results_csv_text(all_rows, cfg.epochs, with_delta=True).encode())
    manifest_path = _write_manifest(cfg, info)
    return {
        "results_csv": str(csv_path),
        "manifest": str(manifest_path),
        "rows": [row.__dict__ for row in all_rows],
    }


def run_gradcheck(cfg: ExperimentConfig) -> dict:
    """Check the averaged SPSB estimate against the finite-difference oracle.

    Randomness is consumed in a fixed order from one seeded generator:
    parameters, then features, then one Rademacher draw per SPSB estimate,
    then the variance-probe draws.
    """
    uploading = cfg.uploading != "false"
    arch = build_architecture(cfg.num_layers, uploading)
    rng = np.random.default_rng(cfg.seed)
    params = init_params(arch, "random_uniform", rng)
    features = rng.uniform(0.0, math.pi / 2.0, size=arch.feature_count)
    label = np.array([1])

    def sample_loss(theta):
        _, _, p1 = forward(arch, theta, features)
        return cross_entropy(np.array([p1]), label, cfg.prob_clamp)

    oracle = finite_diff_gradient(sample_loss, params, cfg.gradcheck_h)
    total = np.zeros_like(params)
    for _ in range(cfg.gradcheck_draws):
        total += spsb_gradient(sample_loss, params, cfg.gradcheck_epsilon, rng)
    estimate = total / cfg.gradcheck_draws
    rel_error = float(
        np.linalg.norm(estimate - oracle) / np.linalg.norm(oracle)
    )
    variances = gradient_variance_probe(arch, cfg.variance_samples, rng, cfg.gradcheck_h)
    return {
        "num_layers": cfg.num_layers,
        "uploading": uploading,
        "param_count": arch.param_count,
        "draws": cfg.gradcheck_draws,
        "epsilon": cfg.gradcheck_epsilon,
        "h": cfg.gradcheck_h,
        "relative_error": rel_error,
        "bound": GRADCHECK_BOUND,
        "passed": rel_error < GRADCHECK_BOUND,
        "gradient_variances": [float(v) for v in variances],
    }

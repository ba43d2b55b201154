"""Experiment configuration: flat key=value files, manifests and validation.

Config files are UTF-8 text, one `key = value` per line, `#` comments and
blank lines allowed.  A run manifest is the same flat mapping serialized as
JSON with informational output keys added; loading a manifest as a config
simply ignores the extra keys, so a manifest always reproduces its run.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, fields
from pathlib import Path

from .errors import ConfigError
from .training import INIT_MODES, TrainConfig

TASKS = ("mnist01", "mnist08", "synthetic_malware", "custom_corpus")
UPLOADING_CHOICES = ("true", "false", "both")

# corpus tasks report train F1 on top of the shared metric set
TRAIN_F1_TASKS = ("synthetic_malware", "custom_corpus")


@dataclass(frozen=True)
class ExperimentConfig:
    task: str
    num_layers: int = 2
    uploading: str = "true"
    train_size: int = 10000
    test_size: int = 4000
    epochs: int = 5
    learning_rate: float = 0.1
    batch_size: int = 32
    spsb_epsilon: float = 0.2
    init_mode: str = "random_uniform"
    seed: int = 0
    prob_clamp: float = 1e-10
    data_seed: int = 12345
    images_path: str = ""
    labels_path: str = ""
    corpus_dir: str = ""
    n_per_class: int = 0  # 0 = derive from train_size + test_size
    out_dir: str = "runs"
    compare_layers: str = ""  # "" = just num_layers
    gradcheck_draws: int = 20000
    gradcheck_epsilon: float = 1e-3
    gradcheck_h: float = 1e-5
    variance_samples: int = 20

    def train_config(self) -> TrainConfig:
        return TrainConfig(
            epochs=self.epochs,
            learning_rate=self.learning_rate,
            batch_size=self.batch_size,
            spsb_epsilon=self.spsb_epsilon,
            init_mode=self.init_mode,
            seed=self.seed,
            prob_clamp=self.prob_clamp,
        )

    def binary_classes(self) -> tuple[int, int]:
        if self.task == "mnist01":
            return 0, 1
        if self.task == "mnist08":
            return 0, 8
        return 0, 1

    def pool_per_class(self) -> int:
        if self.n_per_class > 0:
            return self.n_per_class
        return math.ceil((self.train_size + self.test_size) / 2)

    def compare_layer_list(self) -> list[int]:
        if not self.compare_layers:
            return [self.num_layers]
        try:
            layer_list = [int(part) for part in self.compare_layers.split(",")]
        except ValueError:
            raise ConfigError(
                f"compare_layers must be comma-separated integers, got "
                f"{self.compare_layers!r}"
            ) from None
        for value in layer_list:
            if not 2 <= value <= 4:
                raise ConfigError(f"compare_layers entries must be in [2, 4], got {value}")
        return layer_list


def _parse_bool(key: str, value) -> bool:
    if isinstance(value, bool):
        return value
    if isinstance(value, str) and value.lower() in ("true", "false"):
        return value.lower() == "true"
    raise ConfigError(f"{key} must be true or false, got {value!r}")


def _parse_int(key: str, value) -> int:
    if isinstance(value, bool):
        raise ConfigError(f"{key} must be an integer, got {value!r}")
    if isinstance(value, int):
        return value
    try:
        return int(str(value).strip())
    except ValueError:
        raise ConfigError(f"{key} must be an integer, got {value!r}") from None


def _parse_float(key: str, value) -> float:
    if isinstance(value, bool):
        raise ConfigError(f"{key} must be a number, got {value!r}")
    if isinstance(value, (int, float)):
        return float(value)
    try:
        return float(str(value).strip())
    except ValueError:
        raise ConfigError(f"{key} must be a number, got {value!r}") from None


def _parse_str(key: str, value) -> str:
    return str(value)


def _parse_uploading(key: str, value) -> str:
    return str(value).strip().lower()


_FIELD_PARSERS = {
    "task": _parse_str,
    "num_layers": _parse_int,
    "uploading": _parse_uploading,
    "train_size": _parse_int,
    "test_size": _parse_int,
    "epochs": _parse_int,
    "learning_rate": _parse_float,
    "batch_size": _parse_int,
    "spsb_epsilon": _parse_float,
    "init_mode": _parse_str,
    "seed": _parse_int,
    "prob_clamp": _parse_float,
    "data_seed": _parse_int,
    "images_path": _parse_str,
    "labels_path": _parse_str,
    "corpus_dir": _parse_str,
    "n_per_class": _parse_int,
    "out_dir": _parse_str,
    "compare_layers": _parse_str,
    "gradcheck_draws": _parse_int,
    "gradcheck_epsilon": _parse_float,
    "gradcheck_h": _parse_float,
    "variance_samples": _parse_int,
}

CONFIG_KEYS = tuple(_FIELD_PARSERS)


def read_config_file(path) -> dict[str, object]:
    """Read a key=value config file or a JSON manifest into a raw mapping.

    JSON input (a previous run's manifest) may carry informational keys such
    as param_count or timing; those are dropped.  Unknown keys in a text
    config are an error so that typos do not pass silently.
    """
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"{path} not found")
    text = path.read_text(encoding="utf-8")
    if path.suffix.lower() == ".json":
        try:
            document = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON: {exc}") from None
        if not isinstance(document, dict):
            raise ConfigError(f"{path}: manifest must be a JSON object")
        return {key: value for key, value in document.items() if key in _FIELD_PARSERS}

    mapping: dict[str, object] = {}
    for line_no, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{line_no}: expected 'key = value', got {line!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        if key not in _FIELD_PARSERS:
            raise ConfigError(f"{path}:{line_no}: unknown key {key!r}")
        if key in mapping:
            raise ConfigError(f"{path}:{line_no}: duplicate key {key!r}")
        mapping[key] = value.strip()
    return mapping


def resolve_config(mapping: dict[str, object]) -> ExperimentConfig:
    """Apply defaults, convert types and validate a raw config mapping."""
    unknown = set(mapping) - set(_FIELD_PARSERS)
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    if "task" not in mapping:
        raise ConfigError("config must set 'task'")
    kwargs = {}
    for key, value in mapping.items():
        kwargs[key] = _FIELD_PARSERS[key](key, value)
    cfg = ExperimentConfig(**kwargs)
    _validate(cfg)
    return cfg


def _validate(cfg: ExperimentConfig) -> None:
    if cfg.task not in TASKS:
        raise ConfigError(f"task must be one of {TASKS}, got {cfg.task!r}")
    if not 2 <= cfg.num_layers <= 4:
        raise ConfigError(f"num_layers must be in [2, 4], got {cfg.num_layers}")
    if cfg.uploading not in UPLOADING_CHOICES:
        raise ConfigError(
            f"uploading must be one of {UPLOADING_CHOICES}, got {cfg.uploading!r}"
        )
    for key in ("train_size", "test_size", "epochs", "batch_size"):
        if getattr(cfg, key) < 1:
            raise ConfigError(f"{key} must be positive")
    if cfg.learning_rate < 0:
        raise ConfigError("learning_rate must be non-negative")
    if cfg.spsb_epsilon <= 0 or cfg.gradcheck_epsilon <= 0 or cfg.gradcheck_h <= 0:
        raise ConfigError("perturbation sizes must be positive")
    if not 0 < cfg.prob_clamp < 0.5:
        raise ConfigError("prob_clamp must lie in (0, 0.5)")
    if cfg.init_mode not in INIT_MODES:
        raise ConfigError(f"init_mode must be one of {INIT_MODES}, got {cfg.init_mode!r}")
    if cfg.gradcheck_draws < 1 or cfg.variance_samples < 1:
        raise ConfigError("gradcheck_draws and variance_samples must be positive")
    if cfg.n_per_class < 0:
        raise ConfigError("n_per_class must be positive when set")
    if cfg.task == "custom_corpus" and not cfg.corpus_dir:
        raise ConfigError("custom_corpus task requires corpus_dir")
    if bool(cfg.images_path) != bool(cfg.labels_path):
        raise ConfigError("images_path and labels_path must be set together")
    cfg.compare_layer_list()


def config_to_mapping(cfg: ExperimentConfig) -> dict[str, object]:
    """Flat JSON-ready mapping of every config field."""
    return {f.name: getattr(cfg, f.name) for f in fields(cfg)}

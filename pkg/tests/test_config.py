import json

import pytest

from qcnnkit.config import (
    ExperimentConfig,
    config_to_mapping,
    read_config_file,
    resolve_config,
)
from qcnnkit.errors import ConfigError


def write(tmp_path, name, text):
    path = tmp_path / name
    path.write_text(text)
    return path


class TestTextConfig:
    def test_parses_keys_comments_and_blanks(self, tmp_path):
        path = write(
            tmp_path,
            "run.cfg",
            """
            # binary classification run
            task = mnist01
            num_layers = 3

            uploading = FALSE
            learning_rate = 0.05
            """,
        )
        cfg = resolve_config(read_config_file(path))
        assert cfg.task == "mnist01"
        assert cfg.num_layers == 3
        assert cfg.uploading == "false"  # choice is case-insensitive
        assert cfg.learning_rate == 0.05
        assert cfg.epochs == 5  # default untouched

    def test_unknown_key_is_an_error(self, tmp_path):
        path = write(tmp_path, "run.cfg", "task = mnist01\nlayers = 2\n")
        with pytest.raises(ConfigError, match="unknown key"):
            read_config_file(path)

    def test_duplicate_key_is_an_error(self, tmp_path):
        path = write(tmp_path, "run.cfg", "task = mnist01\ntask = mnist08\n")
        with pytest.raises(ConfigError, match="duplicate"):
            read_config_file(path)

    def test_malformed_line_is_an_error(self, tmp_path):
        path = write(tmp_path, "run.cfg", "task mnist01\n")
        with pytest.raises(ConfigError, match="key = value"):
            read_config_file(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            read_config_file(tmp_path / "absent.cfg")


class TestJsonManifest:
    def test_round_trips_a_previous_run(self, tmp_path):
        cfg = resolve_config({"task": "mnist08", "num_layers": 3, "seed": 2})
        manifest = dict(config_to_mapping(cfg))
        manifest["param_count"] = 36  # informational keys a manifest carries
        manifest["epoch_seconds_mean"] = 1.25
        path = write(tmp_path, "manifest.json", json.dumps(manifest))
        again = resolve_config(read_config_file(path))
        assert again == cfg

    def test_invalid_json_rejected(self, tmp_path):
        path = write(tmp_path, "m.json", "{not json")
        with pytest.raises(ConfigError, match="invalid JSON"):
            read_config_file(path)

    def test_non_object_json_rejected(self, tmp_path):
        path = write(tmp_path, "m.json", "[1, 2]")
        with pytest.raises(ConfigError):
            read_config_file(path)


class TestResolveAndValidate:
    def test_task_is_required(self):
        with pytest.raises(ConfigError, match="task"):
            resolve_config({})

    def test_type_conversion_from_strings(self):
        cfg = resolve_config(
            {"task": "mnist01", "num_layers": "4", "learning_rate": "0.2", "seed": "7"}
        )
        assert cfg.num_layers == 4 and cfg.learning_rate == 0.2 and cfg.seed == 7

    def test_bad_values_rejected(self):
        base = {"task": "mnist01"}
        for bad in (
            {"task": "cifar"},
            {**base, "num_layers": 1},
            {**base, "num_layers": 5},
            {**base, "uploading": "maybe"},
            {**base, "train_size": 0},
            {**base, "epochs": 0},
            {**base, "learning_rate": -1},
            {**base, "spsb_epsilon": 0},
            {**base, "prob_clamp": 0.7},
            {**base, "init_mode": "ones"},
            {**base, "gradcheck_draws": 0},
            {**base, "n_per_class": -3},
            {**base, "num_layers": "two"},
            {**base, "compare_layers": "2,9"},
            {**base, "compare_layers": "2;3"},
        ):
            with pytest.raises(ConfigError):
                resolve_config(bad)

    def test_unknown_mapping_key_rejected(self):
        with pytest.raises(ConfigError, match="unknown config keys"):
            resolve_config({"task": "mnist01", "optimizer": "adam"})

    def test_corpus_task_needs_directory(self):
        with pytest.raises(ConfigError, match="corpus_dir"):
            resolve_config({"task": "custom_corpus"})
        cfg = resolve_config({"task": "custom_corpus", "corpus_dir": "/data/c"})
        assert cfg.corpus_dir == "/data/c"

    def test_idx_paths_must_come_in_pairs(self):
        with pytest.raises(ConfigError, match="together"):
            resolve_config({"task": "mnist01", "images_path": "x.idx"})
        cfg = resolve_config(
            {"task": "mnist01", "images_path": "x.idx", "labels_path": "y.idx"}
        )
        assert cfg.labels_path == "y.idx"


class TestDerivedAccessors:
    def test_binary_classes_per_task(self):
        assert resolve_config({"task": "mnist01"}).binary_classes() == (0, 1)
        assert resolve_config({"task": "mnist08"}).binary_classes() == (0, 8)
        assert resolve_config({"task": "synthetic_malware"}).binary_classes() == (0, 1)

    def test_pool_per_class_covers_the_split(self):
        cfg = resolve_config({"task": "mnist01", "train_size": 11, "test_size": 4})
        assert cfg.pool_per_class() == 8  # ceil(15 / 2)
        explicit = resolve_config({"task": "mnist01", "n_per_class": 50})
        assert explicit.pool_per_class() == 50

    def test_compare_layer_list(self):
        assert resolve_config({"task": "mnist01"}).compare_layer_list() == [2]
        cfg = resolve_config({"task": "mnist01", "compare_layers": "2,3,4"})
        assert cfg.compare_layer_list() == [2, 3, 4]

    def test_train_config_projection(self):
        cfg = resolve_config({"task": "mnist01", "epochs": 7, "spsb_epsilon": 0.3})
        tc = cfg.train_config()
        assert tc.epochs == 7 and tc.spsb_epsilon == 0.3 and tc.seed == cfg.seed

    def test_mapping_round_trip_covers_every_field(self):
        cfg = resolve_config({"task": "synthetic_malware", "uploading": "both"})
        mapping = config_to_mapping(cfg)
        assert resolve_config(mapping) == cfg
        assert set(mapping) == set(ExperimentConfig.__dataclass_fields__)

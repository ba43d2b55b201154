import json

import numpy as np
import pytest

from qcnnkit.cache import load_feature_cache
from qcnnkit.config import resolve_config
from qcnnkit.corpus import synth_binary_corpus, write_corpus
from qcnnkit.digits import digit_image_pool
from qcnnkit.errors import ConfigError
from qcnnkit.experiments import (
    GRADCHECK_BOUND,
    MetricRow,
    prepare_features,
    results_csv_text,
    run_compare,
    run_gradcheck,
    run_prepare,
    run_train,
)
from qcnnkit.idx import write_idx_images, write_idx_labels


def tiny_cfg(tmp_path, **overrides):
    mapping = {
        "task": "mnist01",
        "train_size": 40,
        "test_size": 16,
        "epochs": 2,
        "n_per_class": 40,
        "out_dir": str(tmp_path / "out"),
        "seed": 0,
    }
    mapping.update(overrides)
    return resolve_config(mapping)


class TestResultsCsv:
    def test_layout_without_delta(self):
        rows = [
            MetricRow(2, False, "train_acc", (0.5, 0.75)),
            MetricRow(2, False, "test_acc", (0.5, 0.8125)),
        ]
        text = results_csv_text(rows, epochs=2, with_delta=False)
        lines = text.splitlines()
        assert lines[0] == "layers,uploading,metric,e1,e2"
        assert lines[1] == "2,false,train_acc,0.5000,0.7500"
        assert lines[2] == "2,false,test_acc,0.5000,0.8125"
        assert text.endswith("\n")

    def test_delta_column_blank_for_standard_rows(self):
        rows = [
            MetricRow(3, False, "test_acc", (0.7,)),
            MetricRow(3, True, "test_acc", (0.9,), delta=0.2),
        ]
        lines = results_csv_text(rows, epochs=1, with_delta=True).splitlines()
        assert lines[0] == "layers,uploading,metric,e1,delta"
        assert lines[1] == "3,false,test_acc,0.7000,"
        assert lines[2] == "3,true,test_acc,0.9000,0.2000"


class TestPrepareFeatures:
    def test_shapes_range_and_determinism(self, tmp_path):
        cfg = tiny_cfg(tmp_path)
        data = prepare_features(cfg, 6)
        assert data.train_features.shape == (40, 6)
        assert data.test_features.shape == (16, 6)
        assert data.train_labels.shape == (40,)
        for block in (data.train_features, data.test_features):
            assert block.min() >= 0.0 and block.max() <= np.pi / 2 + 1e-12
        assert len(data.explained_variance) == 6
        again = prepare_features(cfg, 6)
        np.testing.assert_array_equal(again.train_features, data.train_features)
        np.testing.assert_array_equal(again.test_labels, data.test_labels)

    def test_train_range_is_fully_used(self, tmp_path):
        data = prepare_features(tiny_cfg(tmp_path), 4)
        np.testing.assert_allclose(data.train_features.min(axis=0), 0.0, atol=1e-12)
        np.testing.assert_allclose(
            data.train_features.max(axis=0), np.pi / 2, atol=1e-12
        )

    def test_data_seed_changes_pool_but_split_seed_changes_split(self, tmp_path):
        base = prepare_features(tiny_cfg(tmp_path), 4)
        other_pool = prepare_features(tiny_cfg(tmp_path, data_seed=999), 4)
        other_split = prepare_features(tiny_cfg(tmp_path, seed=1), 4)
        assert not np.array_equal(base.train_features, other_pool.train_features)
        assert not np.array_equal(base.train_features, other_split.train_features)


class TestDataSources:
    def test_idx_files_feed_the_pipeline(self, tmp_path):
        images, labels = digit_image_pool((0, 1), per_digit=40, seed=2)
        write_idx_images(tmp_path / "img.idx", images)
        write_idx_labels(tmp_path / "lab.idx", labels.astype(np.uint8))
        cfg = tiny_cfg(
            tmp_path,
            images_path=str(tmp_path / "img.idx"),
            labels_path=str(tmp_path / "lab.idx"),
        )
        data = prepare_features(cfg, 4)
        assert data.data_source == "idx_files"
        assert data.train_features.shape == (40, 4)

    def test_missing_idx_file_raises(self, tmp_path):
        cfg = tiny_cfg(
            tmp_path,
            images_path=str(tmp_path / "absent.idx"),
            labels_path=str(tmp_path / "absent2.idx"),
        )
        with pytest.raises(FileNotFoundError):
            prepare_features(cfg, 4)

    def test_corpus_directory_feeds_the_pipeline(self, tmp_path):
        files, labels = synth_binary_corpus(30, seed=4)
        write_corpus(tmp_path / "corpus", files, labels)
        cfg = tiny_cfg(
            tmp_path,
            task="custom_corpus",
            corpus_dir=str(tmp_path / "corpus"),
            train_size=40,
            test_size=16,
        )
        data = prepare_features(cfg, 4)
        assert data.data_source == "corpus_dir"
        assert data.train_features.shape == (40, 4)

    def test_synthetic_malware_needs_no_paths(self, tmp_path):
        data = prepare_features(tiny_cfg(tmp_path, task="synthetic_malware"), 4)
        assert data.data_source == "synthetic_corpus"


class TestRunPrepare:
    def test_writes_caches_and_summary(self, tmp_path):
        cfg = tiny_cfg(tmp_path)
        result = run_prepare(cfg)
        feats, labels = load_feature_cache(result["train_cache"])
        assert feats.shape == (40, 6)  # 2 layers uploading -> 6 features
        assert labels.shape == (40,)
        feats_test, _ = load_feature_cache(result["test_cache"])
        assert feats_test.shape == (16, 6)
        summary = json.loads((tmp_path / "out" / "pipeline.json").read_text())
        assert summary["num_components"] == 6
        assert summary["train_rows"] == 40 and summary["test_rows"] == 16
        assert len(summary["explained_variance"]) == 6

    def test_standard_mode_narrows_the_cache(self, tmp_path):
        result = run_prepare(tiny_cfg(tmp_path, uploading="false"))
        feats, _ = load_feature_cache(result["train_cache"])
        assert feats.shape == (40, 4)

    def test_both_is_ambiguous_for_a_single_model(self, tmp_path):
        with pytest.raises(ConfigError):
            run_prepare(tiny_cfg(tmp_path, uploading="both"))


class TestRunTrain:
    def test_artifacts_and_reproducibility(self, tmp_path):
        cfg = tiny_cfg(tmp_path)
        result = run_train(cfg)
        csv_path = tmp_path / "out" / "results.csv"
        first = csv_path.read_bytes()
        lines = first.decode().splitlines()
        assert lines[0] == "layers,uploading,metric,e1,e2"
        assert len(lines) == 4  # 3 metrics for an mnist task
        metrics = [line.split(",")[2] for line in lines[1:]]
        assert metrics == ["train_acc", "test_acc", "test_f1"]

        manifest = json.loads((tmp_path / "out" / "manifest.json").read_text())
        assert manifest["task"] == "mnist01"
        assert manifest["param_count"] == 14
        assert manifest["feature_count"] == 6
        assert "epoch_seconds_mean" in manifest and "data_source" in manifest

        assert result["final"]["epoch"] == 2
        run_train(cfg)
        assert csv_path.read_bytes() == first

    def test_malware_task_adds_train_f1_row(self, tmp_path):
        run_train(tiny_cfg(tmp_path, task="synthetic_malware", epochs=1))
        lines = (tmp_path / "out" / "results.csv").read_text().splitlines()
        metrics = [line.split(",")[2] for line in lines[1:]]
        assert metrics == ["train_acc", "test_acc", "test_f1", "train_f1"]

    def test_manifest_reruns_identically(self, tmp_path):
        cfg = tiny_cfg(tmp_path)
        run_train(cfg)
        manifest_path = tmp_path / "out" / "manifest.json"
        first_csv = (tmp_path / "out" / "results.csv").read_bytes()
        rerun_cfg = resolve_config(
            {
                key: value
                for key, value in json.loads(manifest_path.read_text()).items()
                if key in resolve_config({"task": "mnist01"}).__dataclass_fields__
            }
        )
        assert rerun_cfg == cfg
        run_train(rerun_cfg)
        assert (tmp_path / "out" / "results.csv").read_bytes() == first_csv


class TestRunCompare:
    def test_row_structure_and_deltas(self, tmp_path):
        cfg = tiny_cfg(tmp_path, uploading="both", compare_layers="2")
        result = run_compare(cfg)
        rows = result["rows"]
        assert len(rows) == 6  # 2 models x 3 metrics
        standard = {r["metric"]: r for r in rows if not r["uploading"]}
        uploading = {r["metric"]: r for r in rows if r["uploading"]}
        for metric, row in uploading.items():
            expected = row["values"][-1] - standard[metric]["values"][-1]
            assert row["delta"] == pytest.approx(expected)
        for row in standard.values():
            assert row["delta"] is None

        lines = (tmp_path / "out" / "results.csv").read_text().splitlines()
        assert lines[0] == "layers,uploading,metric,e1,e2,delta"
        assert len(lines) == 7

        manifest = json.loads((tmp_path / "out" / "manifest.json").read_text())
        assert manifest["param_count_l2_standard"] == 14
        assert manifest["param_count_l2_uploading"] == 14
        assert manifest["feature_count_l2_standard"] == 4
        assert manifest["feature_count_l2_uploading"] == 6

    def test_multiple_layer_counts(self, tmp_path):
        cfg = tiny_cfg(tmp_path, compare_layers="2,3", epochs=1)
        result = run_compare(cfg)
        layer_counts = {row["layers"] for row in result["rows"]}
        assert layer_counts == {2, 3}
        assert len(result["rows"]) == 12
        manifest = json.loads((tmp_path / "out" / "manifest.json").read_text())
        assert manifest["param_count_l3_standard"] == 36


class TestRunGradcheck:
    def test_report_fields_and_determinism(self, tmp_path):
        cfg = tiny_cfg(tmp_path, gradcheck_draws=200, variance_samples=5)
        report = run_gradcheck(cfg)
        assert report["param_count"] == 14
        assert report["draws"] == 200
        assert report["bound"] == GRADCHECK_BOUND
        assert report["passed"] == (report["relative_error"] < GRADCHECK_BOUND)
        assert len(report["gradient_variances"]) == 14
        assert all(v >= 0 for v in report["gradient_variances"])
        again = run_gradcheck(cfg)
        assert again["relative_error"] == report["relative_error"]

    def test_error_shrinks_with_more_draws(self, tmp_path):
        small = run_gradcheck(tiny_cfg(tmp_path, gradcheck_draws=50, variance_samples=2))
        large = run_gradcheck(tiny_cfg(tmp_path, gradcheck_draws=3200, variance_samples=2))
        assert large["relative_error"] < small["relative_error"]

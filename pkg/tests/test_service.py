import json

import numpy as np
import pytest
from fastapi.testclient import TestClient

from qcnnkit import __version__
from qcnnkit.model import build_architecture, forward
from qcnnkit.service.app import create_app


@pytest.fixture(scope="module")
def client():
    with TestClient(create_app()) as c:
        yield c


def tiny_config(tmp_path, **overrides):
    config = {
        "task": "mnist01",
        "train_size": 40,
        "test_size": 16,
        "epochs": 1,
        "n_per_class": 40,
        "out_dir": str(tmp_path / "out"),
    }
    config.update(overrides)
    return config


class TestHealthAndArchitecture:
    def test_health(self, client):
        body = client.get("/health").json()
        assert body == {"status": "ok", "version": __version__}

    def test_architecture_report(self, client):
        resp = client.post(
            "/architecture", json={"num_layers": 3, "uploading": True}
        )
        assert resp.status_code == 200
        body = resp.json()
        assert body["total_qubits"] == 8
        assert body["param_count"] == 36
        assert body["feature_count"] == 14
        assert body["feature_blocks"] == [8, 4, 2]
        assert body["active_qubits"][0] == list(range(8))

    def test_architecture_bounds_enforced_by_schema(self, client):
        resp = client.post("/architecture", json={"num_layers": 9, "uploading": False})
        assert resp.status_code == 422

    def test_missing_field_is_unprocessable(self, client):
        assert client.post("/architecture", json={"uploading": True}).status_code == 422


class TestForward:
    def test_matches_direct_call(self, client):
        rng = np.random.default_rng(0)
        arch = build_architecture(2, True)
        params = rng.uniform(0, 2 * np.pi, arch.param_count)
        feats = rng.uniform(0, np.pi / 2, arch.feature_count)
        resp = client.post(
            "/forward",
            json={
                "num_layers": 2,
                "uploading": True,
                "params": params.tolist(),
                "features": feats.tolist(),
            },
        )
        assert resp.status_code == 200
        body = resp.json()
        z, p0, p1 = forward(arch, params, feats)
        assert body["z"] == pytest.approx(z)
        assert body["p0"] == pytest.approx(p0)
        assert body["p1"] == pytest.approx(p1)

    def test_wrong_parameter_width_is_config_error(self, client):
        resp = client.post(
            "/forward",
            json={
                "num_layers": 2,
                "uploading": False,
                "params": [0.0] * 13,
                "features": [0.0] * 4,
            },
        )
        assert resp.status_code == 400
        assert resp.json()["kind"] == "config"


class TestExperimentEndpoints:
    def test_prepare_writes_caches(self, client, tmp_path):
        resp = client.post(
            "/experiments/prepare", json={"config": tiny_config(tmp_path)}
        )
        assert resp.status_code == 200
        body = resp.json()
        assert body["num_components"] == 6
        assert body["train_rows"] == 40 and body["test_rows"] == 16
        assert (tmp_path / "out" / "pipeline.json").is_file()

    def test_train_returns_rows_and_writes_artifacts(self, client, tmp_path):
        resp = client.post(
            "/experiments/train", json={"config": tiny_config(tmp_path)}
        )
        assert resp.status_code == 200
        body = resp.json()
        assert body["param_count"] == 14
        metrics = [row["metric"] for row in body["rows"]]
        assert metrics == ["train_acc", "test_acc", "test_f1"]
        assert body["final"]["epoch"] == 1
        assert (tmp_path / "out" / "results.csv").is_file()
        manifest = json.loads((tmp_path / "out" / "manifest.json").read_text())
        assert manifest["task"] == "mnist01"

    def test_seed_and_out_dir_overrides(self, client, tmp_path):
        config = tiny_config(tmp_path, seed=0)
        resp = client.post(
            "/experiments/train",
            json={"config": config, "seed": 3, "out_dir": str(tmp_path / "other")},
        )
        assert resp.status_code == 200
        manifest = json.loads((tmp_path / "other" / "manifest.json").read_text())
        assert manifest["seed"] == 3

    def test_compare_rows_carry_deltas(self, client, tmp_path):
        resp = client.post(
            "/experiments/compare",
            json={"config": tiny_config(tmp_path, compare_layers="2")},
        )
        assert resp.status_code == 200
        rows = resp.json()["rows"]
        assert len(rows) == 6
        assert all(r["delta"] is not None for r in rows if r["uploading"])
        assert all(r["delta"] is None for r in rows if not r["uploading"])

    def test_bad_config_value_maps_to_config_error(self, client, tmp_path):
        resp = client.post(
            "/experiments/train",
            json={"config": tiny_config(tmp_path, num_layers=7)},
        )
        assert resp.status_code == 400
        assert resp.json()["kind"] == "config"

    def test_missing_data_maps_to_data_error(self, client, tmp_path):
        config = tiny_config(
            tmp_path, task="custom_corpus", corpus_dir=str(tmp_path / "nowhere")
        )
        resp = client.post("/experiments/train", json={"config": config})
        assert resp.status_code == 400
        assert resp.json()["kind"] == "data"

    def test_empty_config_is_a_config_error(self, client):
        resp = client.post("/experiments/train", json={"seed": 1})
        assert resp.status_code == 400
        body = resp.json()
        assert body["kind"] == "config" and "task" in body["message"]

    def test_malformed_body_is_unprocessable(self, client):
        resp = client.post("/experiments/train", json={"config": [1, 2]})
        assert resp.status_code == 422


class TestGradcheckEndpoint:
    def test_defaults_task_and_reports(self, client):
        resp = client.post(
            "/diagnostics/gradcheck",
            json={"config": {"gradcheck_draws": 100, "variance_samples": 3}},
        )
        assert resp.status_code == 200
        body = resp.json()
        assert body["param_count"] == 14
        assert body["draws"] == 100
        assert isinstance(body["passed"], bool)
        assert len(body["gradient_variances"]) == 14

    def test_seed_override_changes_estimate(self, client):
        payload = {"config": {"gradcheck_draws": 60, "variance_samples": 2}}
        a = client.post("/diagnostics/gradcheck", json=payload).json()
        b = client.post(
            "/diagnostics/gradcheck", json={**payload, "seed": 5}
        ).json()
        assert a["relative_error"] != b["relative_error"]

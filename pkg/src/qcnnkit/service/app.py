"""FastAPI application exposing the library and the experiment runner.

Domain errors map to HTTP 400 with a body of {"kind", "message"}: kind
"config" for invalid configuration or arguments, kind "data" for missing or
malformed input data.  Experiment endpoints run synchronously and write
their artifacts server-side, in the out_dir of the resolved config.
"""

from __future__ import annotations

import numpy as np
from fastapi import FastAPI
from fastapi.responses import JSONResponse

from .. import __version__
from ..config import resolve_config
from ..errors import ConfigError, DataError
from ..experiments import run_compare, run_gradcheck, run_prepare, run_train
from ..model import build_architecture, forward
from . import schemas


def _error_response(kind: str, exc: Exception) -> JSONResponse:
    return JSONResponse(status_code=400, content={"kind": kind, "message": str(exc)})


def _resolve(request: schemas.ExperimentRequest):
    mapping = dict(request.config)
    if request.seed is not None:
        mapping["seed"] = request.seed
    if request.out_dir is not None:
        mapping["out_dir"] = request.out_dir
    return resolve_config(mapping)


def create_app() -> FastAPI:
    app = FastAPI(title="qcnnkit", version=__version__)

    @app.exception_handler(DataError)
    async def data_error_handler(request, exc):
        return _error_response("data", exc)

    @app.exception_handler(FileNotFoundError)
    async def missing_file_handler(request, exc):
        return _error_response("data", exc)

    @app.exception_handler(ValueError)
    async def value_error_handler(request, exc):
        # ConfigError and plain argument errors both count as config problems
        return _error_response("config", exc)

    @app.get("/health", response_model=schemas.HealthResponse)
    def health():
        return schemas.HealthResponse(status="ok", version=__version__)

    @app.post("/architecture", response_model=schemas.ArchitectureResponse)
    def architecture(request: schemas.ArchitectureRequest):
        arch = build_architecture(request.num_layers, request.uploading)
        return schemas.ArchitectureResponse(
            num_layers=arch.num_layers,
            uploading=arch.uploading,
            total_qubits=arch.total_qubits,
            param_count=arch.param_count,
            feature_count=arch.feature_count,
            feature_blocks=list(arch.feature_blocks),
            active_qubits=[list(layer) for layer in arch.active_qubits],
            final_qubit=arch.final_qubit,
        )

    @app.post("/forward", response_model=schemas.ForwardResponse)
    def forward_pass(request: schemas.ForwardRequest):
        arch = build_architecture(request.num_layers, request.uploading)
        z, p0, p1 = forward(arch, np.array(request.params), np.array(request.features))
        return schemas.ForwardResponse(z=z, p0=p0, p1=p1)

    @app.post("/experiments/prepare", response_model=schemas.PrepareResponse)
    def prepare(request: schemas.ExperimentRequest):
        return schemas.PrepareResponse(**run_prepare(_resolve(request)))

    @app.post("/experiments/train", response_model=schemas.TrainResponse)
    def train(request: schemas.ExperimentRequest):
        return schemas.TrainResponse(**run_train(_resolve(request)))

    @app.post("/experiments/compare", response_model=schemas.CompareResponse)
    def compare(request: schemas.ExperimentRequest):
        return schemas.CompareResponse(**run_compare(_resolve(request)))

    @app.post("/diagnostics/gradcheck", response_model=schemas.GradcheckResponse)
    def gradcheck(request: schemas.ExperimentRequest):
        mapping = dict(request.config)
        mapping.setdefault("task", "mnist01")  # gradcheck touches no task data
        if request.seed is not None:
            mapping["seed"] = request.seed
        if request.out_dir is not None:
            mapping["out_dir"] = request.out_dir
        return schemas.GradcheckResponse(**run_gradcheck(resolve_config(mapping)))

    return app

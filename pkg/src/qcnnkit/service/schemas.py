"""Request and response bodies for the HTTP service."""

from __future__ import annotations

from pydantic import BaseModel, ConfigDict, Field

ConfigValue = bool | int | float | str


class ArchitectureRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    num_layers: int = Field(ge=1, le=4)
    uploading: bool


class ArchitectureResponse(BaseModel):
    num_layers: int
    uploading: bool
    total_qubits: int
    param_count: int
    feature_count: int
    feature_blocks: list[int]
    active_qubits: list[list[int]]
    final_qubit: int


class ForwardRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    num_layers: int = Field(ge=1, le=4)
    uploading: bool
    params: list[float]
    features: list[float]


class ForwardResponse(BaseModel):
    z: float
    p0: float
    p1: float


class ExperimentRequest(BaseModel):
    """A raw config mapping plus the common command-line overrides."""

    model_config = ConfigDict(extra="forbid")

    config: dict[str, ConfigValue] = Field(default_factory=dict)
    seed: int | None = None
    out_dir: str | None = None


class PrepareResponse(BaseModel):
    train_cache: str
    test_cache: str
    summary: str
    num_components: int
    train_rows: int
    test_rows: int
    data_source: str


class MetricRowModel(BaseModel):
    layers: int
    uploading: bool
    metric: str
    values: list[float]
    delta: float | None = None


class EpochMetricsModel(BaseModel):
    epoch: int
    train_accuracy: float
    test_accuracy: float
    train_f1: float
    test_f1: float
    train_loss: float


class TrainResponse(BaseModel):
    results_csv: str
    manifest: str
    rows: list[MetricRowModel]
    final: EpochMetricsModel
    param_count: int
    feature_count: int


class CompareResponse(BaseModel):
    results_csv: str
    manifest: str
    rows: list[MetricRowModel]


class GradcheckResponse(BaseModel):
    num_layers: int
    uploading: bool
    param_count: int
    draws: int
    epsilon: float
    h: float
    relative_error: float
    bound: float
    passed: bool
    gradient_variances: list[float]


class HealthResponse(BaseModel):
    status: str
    version: str

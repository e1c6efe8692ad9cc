from typing import Literal

from pydantic import BaseModel, ConfigDict, Field

from app.schemas.plan import ProfileRequest, SchedulePlan
from app.schemas.profile import NetworkProfile
from app.schemas.quality import WeightingSpec


class InterruptSpec(BaseModel):
    """Distribución de los instantes de interrupción"""
    kind: Literal["uniform", "exponential", "empirical"] = "uniform"
    rate: float | None = None
    samples: tuple[float, ...] = ()

    model_config = ConfigDict(frozen=True, allow_inf_nan=False)


class SimulationSpec(BaseModel):
    profile: NetworkProfile
    plan: SchedulePlan
    mode: Literal["soft", "hard"] = "soft"
    interrupt: InterruptSpec = InterruptSpec()
    per_chunk_overhead_ms: float = Field(0.0, ge=0)
    transfer_delay_ms: float = Field(0.0, ge=0)
    trials: int = Field(10_000, ge=1)
    seed: int = 0

    model_config = ConfigDict(frozen=True, allow_inf_nan=False)


class HistogramBin(BaseModel):
    quality: float
    frequency: int


class SimulationResult(BaseModel):
    mode: Literal["soft", "hard"]
    trials: int
    seed: int
    mean_delivered_quality: float
    quality_histogram: list[HistogramBin]
    mean_response_delay_ms: float
    effective_total_time_ms: float
    per_exit_hit_counts: dict[str, int]


class BackendLatencies(BaseModel):
    """Fila de la tabla de despliegue para un backend (TorchScript, TensorRT...)"""
    baseline_ms: float = Field(..., ge=0)
    chunked_ms: float = Field(..., ge=0)
    soft_ms: float = Field(..., ge=0)
    hard_ms: dict[int, float] = {}


class DeploymentProfile(BaseModel):
    name: str
    chunks: int = Field(..., ge=1)
    backends: dict[str, BackendLatencies]


class BackendCalibration(BaseModel):
    per_chunk_overhead_ms: float
    chunking_overhead_ms: float
    hard_slowdown: dict[int, float]
    hard_cost_per_exit_ms: dict[int, float]


class DeploymentCalibration(BaseModel):
    name: str
    chunks: int
    backends: dict[str, BackendCalibration]


class SimulationRequest(ProfileRequest):
    method: Literal["optimal", "greedy_time", "greedy_perf"] = "optimal"
    weighting: WeightingSpec = WeightingSpec()
    plan: SchedulePlan | None = None
    mode: Literal["soft", "hard"] = "soft"
    interrupt: InterruptSpec = InterruptSpec()
    per_chunk_overhead_ms: float = Field(0.0, ge=0)
    transfer_delay_ms: float = Field(0.0, ge=0)
    trials: int | None = Field(None, ge=1)
    seed: int = 0

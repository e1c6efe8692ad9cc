from typing import Literal

from pydantic import BaseModel, ConfigDict, Field

from app.schemas.profile import ExitSpec, NetworkProfile
from app.schemas.quality import QualityCurve, WeightingSpec

PlanMethod = Literal["optimal", "greedy_time", "greedy_perf", "brute_force"]


class SchedulePlan(BaseModel):
    """Orden de ejecución, salidas seleccionadas y métricas calculadas."""
    profile_name: str
    method: PlanMethod
    mode: Literal["soft", "hard"]
    weighting: WeightingSpec
    order: tuple[int, ...]
    selected_exits: tuple[ExitSpec, ...]
    exit_labels: tuple[str, ...]
    curve: QualityCurve
    q_unnormalized: float
    q_normalized: float | None
    max_delta_ms: float

    model_config = ConfigDict(frozen=True)


class ProfileRequest(BaseModel):
    """Perfil en línea o nombre de un fixture incluido"""
    profile: NetworkProfile | None = None
    fixture: str | None = None


class OptimizeRequest(ProfileRequest):
    weighting: WeightingSpec = WeightingSpec()
    mode: Literal["soft", "hard"] = "soft"
    node_limit: int | None = Field(None, gt=0)


class SelectExitsRequest(ProfileRequest):
    weighting: WeightingSpec = WeightingSpec()
    k: int = Field(..., ge=1)


class GreedyRequest(ProfileRequest):
    weighting: WeightingSpec = WeightingSpec()
    method: Literal["time", "perf"] = "time"

from pydantic import BaseModel

from app.schemas.plan import SchedulePlan
from app.schemas.quality import QualityCurve


class MetricsRow(BaseModel):
    """Fila de la tabla comparativa: Q normalizada, Q de error cuadrático, calidad final y max Δ"""
    name: str
    q_norm: float | None
    q_se: float | None
    final_quality: float
    max_delta_ms: float


class Provenance(BaseModel):
    profile: str
    fixtures: list[str]
    version: str
    seed: int
    weighting: str
    mode: str


class ReportBundle(BaseModel):
    plans: list[SchedulePlan]
    curves: dict[str, QualityCurve]
    metrics: list[MetricsRow]
    provenance: Provenance

from app.schemas.graph import ExecState, ExecutionGraph, GraphEdge, GraphStats
from app.schemas.plan import SchedulePlan
from app.schemas.profile import ExitSpec, LayerProfile, NetworkProfile, SubExitProfile
from app.schemas.quality import CurveReport, CurveStep, QualityCurve, WeightingSpec
from app.schemas.report import MetricsRow, ReportBundle
from app.schemas.simulation import InterruptSpec, SimulationResult, SimulationSpec

__all__ = [
    "LayerProfile",
    "SubExitProfile",
    "ExitSpec",
    "NetworkProfile",
    "WeightingSpec",
    "CurveStep",
    "QualityCurve",
    "CurveReport",
    "ExecState",
    "GraphEdge",
    "ExecutionGraph",
    "GraphStats",
    "SchedulePlan",
    "InterruptSpec",
    "SimulationSpec",
    "SimulationResult",
    "MetricsRow",
    "ReportBundle",
]

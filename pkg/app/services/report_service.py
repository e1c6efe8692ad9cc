"""Tabla comparativa de planes (óptimo frente a greedy) con sus curvas y procedencia."""

import csv
import io
import logging

from app import __version__
from app.core.errors import GreedyDeadEndError
from app.schemas.plan import SchedulePlan
from app.schemas.profile import NetworkProfile
from app.schemas.quality import WeightingSpec
from app.schemas.report import MetricsRow, Provenance, ReportBundle
from app.services.graph_service import build_execution_graph, build_exit_graph
from app.services.optimizer_service import greedy_perf, greedy_time, optimal_order
from app.services.quality_service import Mode, anytime_quality, squared_error_quality

logger = logging.getLogger(__name__)


def metrics_row(name: str, plan: SchedulePlan, baseline: float) -> MetricsRow:
    """Fila recalculada a partir de la curva del plan"""
    curve = plan.curve
    con_horizonte = curve.horizon_ms > 0
    return MetricsRow(
        name=name,
        q_norm=anytime_quality(curve, plan.weighting, normalize=True) if con_horizonte else None,
        q_se=squared_error_quality(curve, baseline, plan.weighting) if con_horizonte else None,
        final_quality=curve.final_quality,
        max_delta_ms=plan.max_delta_ms,
    )


def build_report(
    profile: NetworkProfile,
    w: WeightingSpec,
    mode: Mode = "soft",
    node_limit: int | None = None,
    seed: int = 0,
    fixtures: list[str] | None = None,
) -> ReportBundle:
    """
    Planes comparados: orden óptimo con todas las salidas, selección óptima de
    salidas y las dos heurísticas greedy sobre el grafo de salidas.
    """
    exit_graph = build_exit_graph(profile, w)
    planes: dict[str, SchedulePlan] = {
        "optimal": optimal_order(build_execution_graph(profile, w, mode, node_limit)),
        "optimal_exits": optimal_order(exit_graph),
    }
    for nombre, heuristica in (("greedy_time", greedy_time), ("greedy_perf", greedy_perf)):
        try:
            planes[nombre] = heuristica(exit_graph)
        except GreedyDeadEndError as e:
            logger.warning("Se omite %s: %s", nombre, e)

    return ReportBundle(
        plans=list(planes.values()),
        curves={nombre: plan.curve for nombre, plan in planes.items()},
        metrics=[metrics_row(nombre, plan, profile.final_quality) for nombre, plan in planes.items()],
        provenance=Provenance(
            profile=profile.name,
            fixtures=fixtures or [],
            version=__version__,
            seed=seed,
            weighting=w.kind,
            mode=mode,
        ),
    )


def metrics_to_csv(bundle: ReportBundle) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["name", "Q_norm", "Q_SE", "final_quality", "max_delta_ms"])
    for row in bundle.metrics:
        writer.writerow([row.name, repr(row.q_norm), repr(row.q_se), repr(row.final_quality), repr(row.max_delta_ms)])
    return buffer.getvalue()

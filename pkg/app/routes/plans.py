from fastapi import APIRouter

from app.core.errors import AnytimeError
from app.dependencies.profiles import domain_error, resolve_profile
from app.schemas.plan import GreedyRequest, OptimizeRequest, SchedulePlan, SelectExitsRequest
from app.services.graph_service import build_execution_graph, build_exit_graph
from app.services.optimizer_service import greedy_perf, greedy_time, optimal_order, select_exits

router = APIRouter(prefix="/plans", tags=["Plans"])


@router.post("/optimize", response_model=SchedulePlan)
def optimizar(data: OptimizeRequest):
    """Orden óptimo con todas las salidas del perfil"""
    profile = resolve_profile(data)
    try:
        graph = build_execution_graph(profile, data.weighting, data.mode, data.node_limit)
        return optimal_order(graph)
    except AnytimeError as e:
        raise domain_error(e)


@router.post("/select-exits", response_model=SchedulePlan)
def seleccionar_salidas(data: SelectExitsRequest):
    profile = resolve_profile(data)
    try:
        return select_exits(build_exit_graph(profile, data.weighting), data.k)
    except AnytimeError as e:
        raise domain_error(e)


@router.post("/greedy", response_model=SchedulePlan)
def greedy(data: GreedyRequest):
    profile = resolve_profile(data)
    heuristica = greedy_time if data.method == "time" else greedy_perf
    try:
        return heuristica(build_exit_graph(profile, data.weighting))
    except AnytimeError as e:
        raise domain_error(e)

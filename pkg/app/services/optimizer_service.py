"""
Optimización de órdenes y selección de salidas sobre el grafo de estados:
camino más largo por programación dinámica, Bellman-Ford con pesos negados
como verificación cruzada, heurísticas greedy y el oráculo de fuerza bruta.
"""

import logging
from functools import lru_cache

import networkx as nx

from app.core.config import settings
from app.core.errors import AnytimeError, ExitGraphError, GreedyDeadEndError, OracleLimitError
from app.schemas.graph import ExecutionGraph
from app.schemas.plan import PlanMethod, SchedulePlan
from app.schemas.profile import ExitSpec, NetworkProfile
from app.schemas.quality import WeightingSpec
from app.services.graph_service import (
    StateValuation,
    build_execution_graph,
    build_exit_graph,
    node_label,
    path_order,
)
from app.services.profile_service import ProfileIndex, exit_label
from app.services.quality_service import Mode, build_curve, max_delta, validate_order

logger = logging.getLogger(__name__)

NEG_INF = float("-inf")


def _make_plan(
    profile: NetworkProfile,
    w: WeightingSpec,
    mode: Mode,
    order,
    exits,
    value: float,
    horizon: float,
    method: PlanMethod,
) -> SchedulePlan:
    curve = build_curve(profile, order, mode, exits)
    return SchedulePlan(
        profile_name=profile.name,
        method=method,
        mode=mode,
        weighting=w,
        order=tuple(order),
        selected_exits=tuple(exits),
        exit_labels=tuple(exit_label(profile, exit) for exit in exits),
        curve=curve,
        q_unnormalized=value,
        q_normalized=value / horizon if horizon > 0 else None,
        max_delta_ms=max_delta(curve),
    )


def plan_from_path(graph: ExecutionGraph, edge_path: list[int], method: PlanMethod) -> SchedulePlan:
    """
    Traduce un camino fuente-sumidero a un plan. En el grafo de ejecución se
    seleccionan todas las salidas del grafo; en el de salidas, las del camino.
    """
    value = 0.0
    for e in edge_path:
        value += graph.edges[e].weight
    order = path_order(graph, edge_path)
    if graph.kind == "exit":
        exits = [graph.node_exits[graph.edges[e].target] for e in edge_path]
    else:
        exits = list(graph.exits)
    return _make_plan(graph.profile, graph.weighting, graph.mode, order, exits, value, graph.horizon_ms, method)


def evaluate_order(
    profile: NetworkProfile,
    order,
    w: WeightingSpec,
    mode: Mode = "soft",
    exits: list[ExitSpec] | tuple[ExitSpec, ...] | None = None,
    method: PlanMethod = "brute_force",
) -> SchedulePlan:
    """Plan de un orden fijo, con Q sumando los pesos ρ de sus pasos"""
    orden = validate_order(profile, order)
    valuation = StateValuation(profile, w, mode, exits)
    value = _order_value(valuation, orden)
    return _make_plan(profile, w, mode, orden, valuation.exits, value, valuation.horizon, method)


def _order_value(valuation: StateValuation, order) -> float:
    total = 0.0
    mask = 0
    for layer_id in order:
        nuevo = mask | valuation.index.bit(layer_id)
        total += valuation.step_weight(mask, nuevo)
        mask = nuevo
    return total


def longest_path(graph: ExecutionGraph) -> tuple[float, list[int]]:
    """
    Camino fuente-sumidero de peso máximo por programación dinámica en orden
    topológico. Entre caminos empatados se elige la secuencia de etiquetas
    (capas en el grafo de ejecución, nodos en el de salidas) lexicográficamente menor.
    """
    n = len(graph.nodes)
    best = [NEG_INF] * n
    key: list[tuple[int, ...] | None] = [None] * n
    pred: list[int | None] = [None] * n
    best[graph.source] = 0.0
    key[graph.source] = ()

    for u in range(n):
        if best[u] == NEG_INF:
            continue
        for e in graph.adjacency[u]:
            edge = graph.edges[e]
            valor = best[u] + edge.weight
            etiqueta = key[u] + (edge.layers if graph.kind == "execution" else (edge.target,))
            v = edge.target
            if valor > best[v] or (valor == best[v] and etiqueta < key[v]):
                best[v] = valor
                key[v] = etiqueta
                pred[v] = e

    if best[graph.sink] == NEG_INF:
        raise ExitGraphError("El sumidero no es alcanzable desde la fuente")
    camino = []
    v = graph.sink
    while v != graph.source:
        e = pred[v]
        camino.append(e)
        v = graph.edges[e].source
    camino.reverse()
    return best[graph.sink], camino


def optimal_order(graph: ExecutionGraph) -> SchedulePlan:
    value, camino = longest_path(graph)
    logger.debug("Camino óptimo de %s: Q=%s con %d aristas", graph.profile.name, value, len(camino))
    return plan_from_path(graph, camino, "optimal")


def bellman_ford_longest(graph: ExecutionGraph) -> float:
    """Verificación cruzada: Bellman-Ford de networkx sobre los pesos negados"""
    dag = nx.DiGraph()
    dag.add_nodes_from(range(len(graph.nodes)))
    dag.add_weighted_edges_from(
        ((edge.source, edge.target, -edge.weight) for edge in graph.edges), weight="neg_weight"
    )
    try:
        distancia = nx.bellman_ford_path_length(dag, graph.source, graph.sink, weight="neg_weight")
    except nx.NetworkXNoPath as e:
        raise ExitGraphError("El sumidero no es alcanzable desde la fuente") from e
    return -distancia


def _hop_table(graph: ExecutionGraph, k: int) -> tuple[list[list[float]], list[list[int | None]]]:
    """best[j][v]: mejor valor llegando a v con exactamente j aristas (relajación por rondas)"""
    n = len(graph.nodes)
    best = [[NEG_INF] * n for _ in range(k + 1)]
    pred: list[list[int | None]] = [[None] * n for _ in range(k + 1)]
    best[0][graph.source] = 0.0
    for j in range(1, k + 1):
        anterior = best[j - 1]
        actual = best[j]
        for e, edge in enumerate(graph.edges):
            if anterior[edge.source] == NEG_INF:
                continue
            valor = anterior[edge.source] + edge.weight
            if valor > actual[edge.target]:
                actual[edge.target] = valor
                pred[j][edge.target] = e
        if all(x == NEG_INF for x in actual):
            break
    return best, pred


def select_exits(exit_graph: ExecutionGraph, k: int) -> SchedulePlan:
    """
    Camino más largo con como mucho k aristas (k salidas sin contar la fuente).
    Ante empate gana el camino con menos aristas; con el mismo número de aristas
    se queda la primera relajación en el orden de aristas del grafo, de modo que
    puede no coincidir con el desempate lexicográfico de `longest_path`.
    """
    if exit_graph.kind != "exit":
        raise ExitGraphError("select_exits requiere un grafo de salidas")
    n_salidas = len(exit_graph.nodes) - 1
    if not 1 <= k <= n_salidas:
        raise ExitGraphError(f"k debe estar entre 1 y {n_salidas} (recibido {k})")

    best, pred = _hop_table(exit_graph, k)
    sink = exit_graph.sink
    mejor_j = None
    for j in range(1, k + 1):
        if best[j][sink] == NEG_INF:
            continue
        if mejor_j is None or best[j][sink] > best[mejor_j][sink]:
            mejor_j = j
    if mejor_j is None:
        raise ExitGraphError(f"No hay camino hasta la salida final con como mucho {k} aristas")

    camino = []
    v = sink
    for j in range(mejor_j, 0, -1):
        e = pred[j][v]
        camino.append(e)
        v = exit_graph.edges[e].source
    camino.reverse()
    logger.debug("select_exits(k=%d): %d salidas, Q=%s", k, mejor_j, best[mejor_j][sink])
    return plan_from_path(exit_graph, camino, "optimal")


def _entry_nodes(exit_graph: ExecutionGraph) -> set[int]:
    con_entrada = {edge.target for edge in exit_graph.edges if edge.source != exit_graph.source}
    return {
        exit_graph.edges[e].target
        for e in exit_graph.adjacency[exit_graph.source]
        if exit_graph.edges[e].target not in con_entrada
    }


def _greedy(exit_graph: ExecutionGraph, method: str) -> SchedulePlan:
    if exit_graph.kind != "exit":
        raise ExitGraphError("Las heurísticas greedy requieren un grafo de salidas")
    nodes = exit_graph.nodes
    sink = exit_graph.sink
    entradas = _entry_nodes(exit_graph)

    camino: list[int] = []
    u = exit_graph.source
    while u != sink:
        salientes = list(exit_graph.adjacency[u])
        if u == exit_graph.source:
            candidatas = [e for e in salientes if exit_graph.edges[e].target in entradas - {sink}]
        else:
            candidatas = [e for e in salientes if exit_graph.edges[e].target != sink]
        if not candidatas:
            candidatas = [e for e in salientes if exit_graph.edges[e].target == sink]
        if not candidatas:
            raise GreedyDeadEndError(method, node_label(exit_graph, u))

        def criterio(e: int):
            v = exit_graph.edges[e].target
            incremento = nodes[v].elapsed_ms - nodes[u].elapsed_ms
            if method == "time":
                return (incremento, -nodes[v].reached_quality, v)
            return (-nodes[v].reached_quality, incremento, v)

        e = min(candidatas, key=criterio)
        camino.append(e)
        u = exit_graph.edges[e].target

    return plan_from_path(exit_graph, camino, f"greedy_{method}")


def greedy_time(exit_graph: ExecutionGraph) -> SchedulePlan:
    """Siguiente salida: la alcanzable en menos tiempo incremental"""
    return _greedy(exit_graph, "time")


def greedy_perf(exit_graph: ExecutionGraph) -> SchedulePlan:
    """Siguiente salida: la de mayor calidad"""
    return _greedy(exit_graph, "perf")


def count_topological_orders(profile: NetworkProfile, limit: int | None = None) -> int:
    """Cuenta órdenes topológicos por DP sobre ideales; se detiene al superar limit"""
    index = ProfileIndex(profile)
    dep_mask = index.dep_mask
    full = index.full_mask
    tope = limit

    @lru_cache(maxsize=None)
    def ordenes(mask: int) -> int:
        if mask == full:
            return 1
        total = 0
        for pos, deps in enumerate(dep_mask):
            bit = 1 << pos
            if not mask & bit and deps & mask == deps:
                total += ordenes(mask | bit)
                if tope is not None and total > tope:
                    return total
        return total

    return ordenes(0)


def brute_force_order(
    profile: NetworkProfile,
    w: WeightingSpec,
    limit: int | None = None,
    mode: Mode = "soft",
) -> SchedulePlan:
    """
    Oráculo exhaustivo: evalúa todos los órdenes topológicos (en orden
    lexicográfico) y se queda con el primero de Q máxima.

    Raises:
        OracleLimitError: hay más órdenes que limit
    """
    tope = limit if limit is not None else settings.BRUTE_FORCE_LIMIT
    if tope <= 0:
        raise AnytimeError("limit debe ser positivo")
    cantidad = count_topological_orders(profile, tope)
    if cantidad > tope:
        raise OracleLimitError(cantidad, tope)

    valuation = StateValuation(profile, w, mode)
    index = valuation.index
    mejor_valor = NEG_INF
    mejor_orden: list[int] = []
    orden: list[int] = []

    def explorar(mask: int, valor: float) -> None:
        nonlocal mejor_valor, mejor_orden
        if mask == index.full_mask:
            if valor > mejor_valor:
                mejor_valor = valor
                mejor_orden = list(orden)
            return
        for pos, deps in enumerate(index.dep_mask):
            bit = 1 << pos
            if mask & bit or deps & mask != deps:
                continue
            orden.append(index.layer_ids[pos])
            explorar(mask | bit, valor + valuation.step_weight(mask, mask | bit))
            orden.pop()

    explorar(0, 0.0)
    logger.debug("Fuerza bruta sobre %d órdenes: Q=%s", cantidad, mejor_valor)
    return _make_plan(profile, w, mode, mejor_orden, valuation.exits, mejor_valor, valuation.horizon, "brute_force")


def plan_for_method(
    profile: NetworkProfile,
    w: WeightingSpec,
    method: str = "optimal",
    mode: Mode = "soft",
    node_limit: int | None = None,
) -> SchedulePlan:
    """Plan de referencia para simular: óptimo sobre el grafo de ejecución o una heurística greedy"""
    if method == "optimal":
        return optimal_order(build_execution_graph(profile, w, mode, node_limit))
    exit_graph = build_exit_graph(profile, w)
    if method == "greedy_time":
        return greedy_time(exit_graph)
    if method == "greedy_perf":
        return greedy_perf(exit_graph)
    raise AnytimeError(f"Método desconocido: {method}")

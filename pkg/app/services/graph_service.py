"""
Grafo de estados de ejecución: nodos = conjuntos de capas cerrados por
dependencias, aristas = completar una capa. Un camino de la fuente al sumidero
es un orden de ejecución válido y la suma de sus pesos es su Q sin normalizar.
"""

import logging

import networkx as nx

from app.core.config import settings
from app.core.errors import AnytimeError, ExitGraphError, GraphLimitError
from app.schemas.graph import ExecState, ExecutionGraph, GraphEdge, GraphStats, StateDump
from app.schemas.profile import ExitSpec, NetworkProfile
from app.schemas.quality import WeightingSpec
from app.services.profile_service import ProfileIndex, exit_key, exit_label, usable_exits
from app.services.quality_service import Mode, tail_mass, weight_mass

logger = logging.getLogger(__name__)


class StateValuation:
    """
    Calidad alcanzada, tiempo transcurrido c(v) y peso ρ de un paso entre
    conjuntos de capas. La usan el constructor del grafo y el oráculo de fuerza
    bruta para que ambos hagan exactamente la misma aritmética.
    """

    def __init__(
        self,
        profile: NetworkProfile,
        w: WeightingSpec,
        mode: Mode = "soft",
        exits: list[ExitSpec] | tuple[ExitSpec, ...] | None = None,
    ):
        self.profile = profile
        self.weighting = w
        self.mode = mode
        self.index = ProfileIndex(profile)
        self.exits = tuple(exits) if exits is not None else tuple(usable_exits(profile))
        self.exit_masks = [(exit, self.index.required_mask(exit)) for exit in self.exits]
        self._elapsed: dict[int, float] = {}
        self._quality: dict[int, float] = {}
        self.horizon = self.elapsed(self.index.full_mask)
        self.tail = tail_mass(w, self.horizon)

    def reached_quality(self, mask: int) -> float:
        if mask not in self._quality:
            calidades = [exit.quality for exit, req in self.exit_masks if req & mask == req]
            self._quality[mask] = max([self.profile.default_quality, *calidades])
        return self._quality[mask]

    def elapsed(self, mask: int) -> float:
        if mask not in self._elapsed:
            total = self.index.elapsed(mask)
            if self.mode == "hard":
                for exit, req in self.exit_masks:
                    if req & mask == req:
                        total += self.index.head_latency(exit)
            self._elapsed[mask] = total
        return self._elapsed[mask]

    def interval_weight(self, quality: float, start: float, end: float, into_sink: bool, sink_quality: float) -> float:
        rho = quality * weight_mass(self.weighting, start, end, self.horizon)
        if into_sink and self.tail:
            rho += sink_quality * self.tail
        return rho

    def step_weight(self, mask: int, new_mask: int) -> float:
        """ρ(v, v'): calidad de v por la masa de w entre c(v) y c(v')"""
        return self.interval_weight(
            self.reached_quality(mask),
            self.elapsed(mask),
            self.elapsed(new_mask),
            new_mask == self.index.full_mask,
            self.reached_quality(new_mask),
        )


def _adjacency(n_nodes: int, edges: list[GraphEdge]) -> tuple[tuple[int, ...], ...]:
    salientes: list[list[int]] = [[] for _ in range(n_nodes)]
    for pos, edge in enumerate(edges):
        salientes[edge.source].append(pos)
    return tuple(tuple(lista) for lista in salientes)


def build_execution_graph(
    profile: NetworkProfile,
    w: WeightingSpec,
    mode: Mode = "soft",
    node_limit: int | None = None,
    exits: list[ExitSpec] | tuple[ExitSpec, ...] | None = None,
) -> ExecutionGraph:
    """
    Enumera por niveles (tamaño del conjunto) todos los ideales del DAG de capas.

    Raises:
        GraphLimitError: el número de ideales supera node_limit
    """
    limite = node_limit if node_limit is not None else settings.NODE_LIMIT
    if limite <= 0:
        raise AnytimeError("node_limit debe ser positivo")

    valuation = StateValuation(profile, w, mode, exits)
    index = valuation.index
    n_layers = len(index.layer_ids)

    masks = [0]
    posicion = {0: 0}
    pasos: list[tuple[int, int, int]] = []
    nivel = [0]
    while nivel:
        siguiente: set[int] = set()
        for mask in nivel:
            for pos in range(n_layers):
                bit = 1 << pos
                if mask & bit or index.dep_mask[pos] & mask != index.dep_mask[pos]:
                    continue
                siguiente.add(mask | bit)
                pasos.append((mask, mask | bit, index.layer_ids[pos]))
        nivel = sorted(siguiente)
        for mask in nivel:
            posicion[mask] = len(masks)
            masks.append(mask)
        if len(masks) > limite:
            raise GraphLimitError(len(masks), limite)

    nodes = tuple(
        ExecState(
            executed=frozenset(index.ids_of(mask)),
            reached_quality=valuation.reached_quality(mask),
            elapsed_ms=valuation.elapsed(mask),
        )
        for mask in masks
    )
    edges = [
        GraphEdge(
            source=posicion[origen],
            target=posicion[destino],
            layers=(layer_id,),
            weight=valuation.step_weight(origen, destino),
        )
        for origen, destino, layer_id in pasos
    ]
    logger.debug("Grafo de ejecución de %s: %d nodos, %d aristas", profile.name, len(nodes), len(edges))

    return ExecutionGraph(
        kind="execution",
        profile=profile,
        weighting=w,
        mode=mode,
        exits=valuation.exits,
        nodes=nodes,
        edges=tuple(edges),
        adjacency=_adjacency(len(nodes), edges),
        horizon_ms=valuation.horizon,
    )


def _differs_in_one_scale(profile: NetworkProfile, a: ExitSpec, b: ExitSpec) -> bool:
    return sum(x != y for x, y in zip(exit_key(profile, a), exit_key(profile, b))) == 1


def build_exit_graph(profile: NetworkProfile, w: WeightingSpec) -> ExecutionGraph:
    """
    Grafo reducido a estados de salida (modo soft). u -> v si sus sub-salidas
    difieren en una sola escala, las capas de u son un subconjunto estricto de
    las de v y la calidad no baja. La fuente enlaza con toda salida que no
    empeore la calidad por defecto y siempre con el sumidero (salida final).
    """
    valuation = StateValuation(profile, w, "soft")
    index = valuation.index

    salidas = list(valuation.exit_masks)
    final = next((par for par in salidas if par[1] == index.full_mask), None)
    if final is None:
        raise ExitGraphError("El perfil no tiene salida final")
    intermedias = sorted(
        (par for par in salidas if par is not final),
        key=lambda par: bin(par[1]).count("1"),
    )
    estados: list[tuple[ExitSpec | None, int]] = [(None, 0), *intermedias, final]
    sink = len(estados) - 1

    nodes = tuple(
        ExecState(
            executed=frozenset(index.ids_of(mask)),
            reached_quality=profile.default_quality if exit is None else exit.quality,
            elapsed_ms=index.elapsed(mask),
        )
        for exit, mask in estados
    )

    edges: list[GraphEdge] = []
    for i, (origen, mask_i) in enumerate(estados[:-1]):
        for j in range(i + 1, len(estados)):
            destino, mask_j = estados[j]
            if origen is None:
                admisible = j == sink or destino.quality >= profile.default_quality
            else:
                admisible = (
                    _differs_in_one_scale(profile, origen, destino)
                    and mask_i & mask_j == mask_i
                    and mask_i != mask_j
                    and destino.quality >= origen.quality
                )
            if not admisible:
                continue
            nuevas = index.graph.subgraph(index.ids_of(mask_j & ~mask_i))
            edges.append(
                GraphEdge(
                    source=i,
                    target=j,
                    layers=tuple(nx.lexicographical_topological_sort(nuevas)),
                    weight=valuation.interval_weight(
                        nodes[i].reached_quality,
                        nodes[i].elapsed_ms,
                        nodes[j].elapsed_ms,
                        j == sink,
                        nodes[j].reached_quality,
                    ),
                )
            )

    adjacency = _adjacency(len(nodes), edges)
    alcanzados = {0}
    for i in range(len(nodes)):
        if i in alcanzados:
            alcanzados.update(edges[e].target for e in adjacency[i])
    if sink not in alcanzados:
        raise ExitGraphError("La salida final no es alcanzable desde la fuente")
    logger.debug("Grafo de salidas de %s: %d nodos, %d aristas", profile.name, len(nodes), len(edges))

    return ExecutionGraph(
        kind="exit",
        profile=profile,
        weighting=w,
        mode="soft",
        exits=valuation.exits,
        nodes=nodes,
        node_exits=tuple(exit for exit, _ in estados),
        edges=tuple(edges),
        adjacency=adjacency,
        horizon_ms=valuation.horizon,
    )


def node_label(graph: ExecutionGraph, node: int) -> str:
    if graph.kind != "exit":
        return str(node)
    if node == graph.source:
        return "source"
    return exit_label(graph.profile, graph.node_exits[node])


def path_order(graph: ExecutionGraph, edge_path: list[int]) -> tuple[int, ...]:
    """Orden de capas de un camino dado como lista de índices de arista"""
    return tuple(layer for e in edge_path for layer in graph.edges[e].layers)


def path_value(graph: ExecutionGraph, edge_path: list[int]) -> float:
    total = 0.0
    for e in edge_path:
        total += graph.edges[e].weight
    return total


def graph_stats(graph: ExecutionGraph, verbose: bool = False) -> GraphStats:
    states = None
    if verbose:
        states = [
            StateDump(
                id=i,
                executed=sorted(node.executed),
                elapsed_ms=node.elapsed_ms,
                reached_quality=node.reached_quality,
                exit=node_label(graph, i) if graph.kind == "exit" else None,
            )
            for i, node in enumerate(graph.nodes)
        ]
    return GraphStats(
        kind=graph.kind,
        nodes=len(graph.nodes),
        edges=len(graph.edges),
        source=graph.source,
        sink=graph.sink,
        states=states,
    )

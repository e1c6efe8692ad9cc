from typing import Literal

from pydantic import BaseModel, ConfigDict

from app.schemas.profile import ExitSpec, NetworkProfile
from app.schemas.quality import WeightingSpec


class ExecState(BaseModel):
    """Conjunto de capas ejecutadas (cerrado por dependencias)."""
    executed: frozenset[int]
    reached_quality: float
    elapsed_ms: float

    model_config = ConfigDict(frozen=True)


class GraphEdge(BaseModel):
    source: int
    target: int
    layers: tuple[int, ...]
    weight: float

    model_config = ConfigDict(frozen=True)


class ExecutionGraph(BaseModel):
    """Grafo de estados de ejecución (o su reducción a estados de salida).

    Los nodos están en orden topológico: el índice 0 es la fuente y el último
    el sumidero. `adjacency[i]` lista los índices de las aristas que salen de i.
    """
    kind: Literal["execution", "exit"]
    profile: NetworkProfile
    weighting: WeightingSpec
    mode: Literal["soft", "hard"]
    exits: tuple[ExitSpec, ...]
    nodes: tuple[ExecState, ...]
    node_exits: tuple[ExitSpec | None, ...] = ()
    edges: tuple[GraphEdge, ...]
    adjacency: tuple[tuple[int, ...], ...]
    horizon_ms: float

    model_config = ConfigDict(frozen=True)

    @property
    def source(self) -> int:
        return 0

    @property
    def sink(self) -> int:
        return len(self.nodes) - 1


class StateDump(BaseModel):
    id: int
    executed: list[int]
    elapsed_ms: float
    reached_quality: float
    exit: str | None = None


class GraphStats(BaseModel):
    kind: str
    nodes: int
    edges: int
    source: int
    sink: int
    states: list[StateDump] | None = None

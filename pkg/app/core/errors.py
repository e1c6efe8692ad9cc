"""Jerarquía de errores del dominio.

Todos heredan de ValueError; las rutas los traducen a HTTPException y la CLI a código de salida 1.
"""


class AnytimeError(ValueError):
    pass


class ProfileError(AnytimeError):
    """Perfil de red inválido (esquema o invariantes)."""


class SchemaError(ProfileError):
    pass


class CycleError(ProfileError):
    def __init__(self, cycle: list[int]):
        self.cycle = cycle
        path = " -> ".join(str(layer) for layer in cycle + cycle[:1])
        super().__init__(f"Ciclo de dependencias entre capas: {path}")


class DanglingReferenceError(ProfileError):
    def __init__(self, missing_id: int, where: str):
        self.missing_id = missing_id
        self.where = where
        super().__init__(f"Referencia a id inexistente {missing_id} en {where}")


class InvalidOrderError(AnytimeError):
    pass


class WeightingError(AnytimeError):
    pass


class CurveError(AnytimeError):
    pass


class GraphLimitError(AnytimeError):
    def __init__(self, lower_bound: int, node_limit: int):
        self.lower_bound = lower_bound
        self.node_limit = node_limit
        super().__init__(
            f"El grafo de ejecución tiene al menos {lower_bound} nodos "
            f"(límite {node_limit}); agrupe capas o aumente --node-limit"
        )


class ExitGraphError(AnytimeError):
    pass


class GreedyDeadEndError(AnytimeError):
    def __init__(self, method: str, stuck: str):
        self.method = method
        self.stuck = stuck
        super().__init__(f"greedy_{method} sin arista admisible desde la salida {stuck}")


class OracleLimitError(AnytimeError):
    def __init__(self, count: int, limit: int):
        self.count = count
        self.limit = limit
        super().__init__(f"Hay {count} órdenes topológicos, más que el límite {limit}")


class SimulationError(AnytimeError):
    pass

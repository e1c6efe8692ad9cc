from pydantic import BaseModel, ConfigDict, Field, field_validator


class LayerProfile(BaseModel):
    """Bloque de la red: latencia media y dependencias (columna Route)."""
    id: int
    name: str
    latency_ms: float = Field(..., ge=0)
    deps: tuple[int, ...] = ()

    model_config = ConfigDict(frozen=True, allow_inf_nan=False)

    @field_validator("deps")
    @classmethod
    def deps_ordenadas(cls, deps: tuple[int, ...]) -> tuple[int, ...]:
        # Las dependencias son un conjunto
        return tuple(sorted(set(deps)))


class SubExitProfile(BaseModel):
    """Sub-salida: cabeza de detección de una escala colgada de una capa."""
    id: int
    attach_layer: int
    scale: str
    head_latency_ms: float = Field(0.0, ge=0)

    model_config = ConfigDict(frozen=True, allow_inf_nan=False)


class ExitSpec(BaseModel):
    """Salida completa: una sub-salida por escala y la calidad medida del conjunto.

    `head_layer` indica que la cabeza de la salida es un bloque de la propia red
    (la fila Detect); en ese caso su clausura entra en las capas requeridas y la
    salida no paga latencia de cabeza aparte.
    `quality_ap50_90` es una segunda métrica opcional (AP50:90) que solo se
    informa; la optimización usa siempre `quality`.
    """
    sub_exits: dict[str, int]
    quality: float
    quality_ap50_90: float | None = Field(None, ge=0)
    trained: bool = False
    head_layer: int | None = None
    provenance: str | None = None

    model_config = ConfigDict(frozen=True, allow_inf_nan=False)


class NetworkProfile(BaseModel):
    name: str
    scales: tuple[str, ...]
    layers: tuple[LayerProfile, ...]
    sub_exits: tuple[SubExitProfile, ...]
    exits: tuple[ExitSpec, ...]
    default_quality: float = 0.0
    final_quality: float
    notes: str | None = None

    model_config = ConfigDict(frozen=True, allow_inf_nan=False)

    @field_validator("layers")
    @classmethod
    def capas_por_id(cls, layers: tuple[LayerProfile, ...]) -> tuple[LayerProfile, ...]:
        return tuple(sorted(layers, key=lambda layer: layer.id))

    @field_validator("sub_exits")
    @classmethod
    def sub_salidas_por_id(cls, sub_exits: tuple[SubExitProfile, ...]) -> tuple[SubExitProfile, ...]:
        return tuple(sorted(sub_exits, key=lambda sub: sub.id))


class ProfileSummary(BaseModel):
    """Respuesta de validación de un perfil"""
    name: str
    layers: int
    sub_exits: int
    exits: int
    total_latency_ms: float
    final_quality: float
    final_quality_ap50_90: float | None = None
    summary: str


class FixtureInfo(BaseModel):
    name: str
    kind: str

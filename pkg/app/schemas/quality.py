from typing import Literal

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator


class WeightingSpec(BaseModel):
    """Función de ponderación w(t) de la métrica de calidad anytime.

    - uniform: w = 1 en todo el horizonte.
    - piecewise_constant: w = peso_i en [b_i, b_i+1); el último peso se extiende
      indefinidamente y w = 0 antes del primer punto de corte.
    - empirical_samples: tiempos de interrupción observados.
    """
    kind: Literal["uniform", "piecewise_constant", "empirical_samples"] = "uniform"
    breakpoints: tuple[tuple[float, float], ...] = ()
    samples: tuple[float, ...] = ()

    model_config = ConfigDict(frozen=True, allow_inf_nan=False)

    @model_validator(mode="after")
    def validar_parametros(self):
        if self.kind == "piecewise_constant":
            if not self.breakpoints:
                raise ValueError("piecewise_constant necesita al menos un punto de corte")
            tiempos = [t for t, _ in self.breakpoints]
            if any(b <= a for a, b in zip(tiempos, tiempos[1:])):
                raise ValueError("Los puntos de corte deben ser estrictamente crecientes")
            if any(peso < 0 for _, peso in self.breakpoints):
                raise ValueError("Los pesos deben ser no negativos")
        if self.kind == "empirical_samples":
            if not self.samples:
                raise ValueError("empirical_samples necesita al menos una muestra")
            if any(s < 0 for s in self.samples):
                raise ValueError("Las muestras de interrupción deben ser no negativas")
        return self


class CurveStep(BaseModel):
    time_ms: float
    quality: float

    model_config = ConfigDict(frozen=True, allow_inf_nan=False)


class QualityCurve(BaseModel):
    """Función escalón continua por la derecha: calidad disponible frente al tiempo."""
    steps: tuple[CurveStep, ...]
    horizon_ms: float = Field(..., ge=0)
    default_quality: float = 0.0

    model_config = ConfigDict(frozen=True, allow_inf_nan=False)

    @field_validator("steps")
    @classmethod
    def tiempos_crecientes(cls, steps: tuple[CurveStep, ...]) -> tuple[CurveStep, ...]:
        if any(b.time_ms <= a.time_ms for a, b in zip(steps, steps[1:])):
            raise ValueError("Los tiempos de la curva deben ser estrictamente crecientes")
        return steps

    @model_validator(mode="after")
    def dentro_del_horizonte(self):
        if self.steps and (self.steps[0].time_ms < 0 or self.steps[-1].time_ms > self.horizon_ms):
            raise ValueError("Los escalones deben estar dentro de [0, T]")
        return self

    @property
    def final_quality(self) -> float:
        return self.steps[-1].quality if self.steps else self.default_quality


class CurveReport(BaseModel):
    """Curva de un orden concreto junto con su Q y su granularidad"""
    profile_name: str
    mode: Literal["soft", "hard"]
    order: tuple[int, ...]
    curve: QualityCurve
    q: float
    normalized: bool
    max_delta_ms: float

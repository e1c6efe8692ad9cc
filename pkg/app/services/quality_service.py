"""
Matemática de la calidad anytime: masas de la ponderación, curvas escalón,
métrica Q, variante de error cuadrático y granularidad (max Δ).
"""

import bisect
import csv
import io
import logging
from dataclasses import dataclass
from typing import Literal

from app.core.errors import CurveError, InvalidOrderError, WeightingError
from app.schemas.profile import ExitSpec, NetworkProfile
from app.schemas.quality import CurveStep, QualityCurve, WeightingSpec
from app.services.profile_service import ProfileIndex, usable_exits

logger = logging.getLogger(__name__)

Mode = Literal["soft", "hard"]


@dataclass(frozen=True)
class ExitEvent:
    exit: ExitSpec
    time_ms: float
    quality: float


def weight_mass(w: WeightingSpec, start: float, end: float, horizon: float) -> float:
    """Masa de la ponderación sobre [start, end)."""
    if end <= start:
        return 0.0
    if w.kind == "uniform":
        return end - start
    if w.kind == "piecewise_constant":
        total = 0.0
        for i, (corte, peso) in enumerate(w.breakpoints):
            siguiente = w.breakpoints[i + 1][0] if i + 1 < len(w.breakpoints) else float("inf")
            solape = min(end, siguiente) - max(start, corte)
            if solape > 0:
                total += peso * solape
        return total
    # Muestras empíricas: densidad de interrupciones escalada por el horizonte
    muestras = sorted(w.samples)
    dentro = bisect.bisect_left(muestras, end) - bisect.bisect_left(muestras, start)
    return horizon * dentro / len(muestras)


def tail_mass(w: WeightingSpec, horizon: float) -> float:
    """Masa puntual en T: interrupciones empíricas en o después del horizonte"""
    if w.kind != "empirical_samples":
        return 0.0
    muestras = sorted(w.samples)
    fuera = len(muestras) - bisect.bisect_left(muestras, horizon)
    return horizon * fuera / len(muestras)


def validate_order(profile: NetworkProfile, order) -> tuple[int, ...]:
    """Comprueba que el orden cubre cada capa una vez y respeta las dependencias"""
    orden = tuple(order)
    ids = {layer.id for layer in profile.layers}
    if len(orden) != len(ids) or set(orden) != ids:
        raise InvalidOrderError("El orden debe contener cada capa del perfil exactamente una vez")
    deps = {layer.id: layer.deps for layer in profile.layers}
    hechas: set[int] = set()
    for layer_id in orden:
        faltan = [dep for dep in deps[layer_id] if dep not in hechas]
        if faltan:
            raise InvalidOrderError(f"La capa {layer_id} se ejecuta antes de sus dependencias {faltan}")
        hechas.add(layer_id)
    return orden


def exit_timeline(
    profile: NetworkProfile,
    order,
    mode: Mode,
    exits: list[ExitSpec] | tuple[ExitSpec, ...] | None = None,
    per_layer_overhead: float = 0.0,
) -> tuple[list[ExitEvent], float]:
    """
    Recorre el orden de ejecución y devuelve cuándo queda disponible cada salida.

    En modo hard, al completar una capa se ejecutan seguidas las cabezas de todas
    las salidas que esa capa completa; esas salidas quedan disponibles cuando
    termina la última cabeza. El overhead por bloque se suma tras cada capa.

    Returns:
        (eventos en orden temporal, tiempo total del recorrido)
    """
    orden = validate_order(profile, order)
    index = ProfileIndex(profile)
    seleccion = list(exits) if exits is not None else usable_exits(profile)
    pendientes = [(exit, index.required_mask(exit)) for exit in seleccion]

    eventos: list[ExitEvent] = []
    elapsed = 0.0
    ejecutadas = 0
    for layer_id in orden:
        elapsed += index.latency[index.position[layer_id]] + per_layer_overhead
        ejecutadas |= index.bit(layer_id)
        completas = [exit for exit, mask in pendientes if mask & ejecutadas == mask]
        if not completas:
            continue
        pendientes = [(exit, mask) for exit, mask in pendientes if mask & ejecutadas != mask]
        if mode == "hard":
            for exit in completas:
                elapsed += index.head_latency(exit)
        eventos.extend(ExitEvent(exit, elapsed, exit.quality) for exit in completas)

    return eventos, elapsed


def monotone_filter(
    steps,
    horizon: float | None = None,
    default_quality: float | None = None,
) -> QualityCurve:
    """
    Conserva un escalón sólo si su calidad supera estrictamente el máximo
    acumulado; ante empate se queda el anterior. Un escalón mejor en el mismo
    instante reemplaza al anterior.
    """
    pares = [(s.time_ms, s.quality) if isinstance(s, CurveStep) else (float(s[0]), float(s[1])) for s in steps]
    filtrados: list[tuple[float, float]] = []
    for tiempo, calidad in pares:
        if filtrados and calidad <= filtrados[-1][1]:
            continue
        if filtrados and tiempo == filtrados[-1][0]:
            filtrados[-1] = (tiempo, calidad)
        else:
            filtrados.append((tiempo, calidad))

    if horizon is None:
        horizon = pares[-1][0] if pares else 0.0
    if default_quality is None:
        default_quality = pares[0][1] if pares else 0.0
    return QualityCurve(
        steps=tuple(CurveStep(time_ms=t, quality=q) for t, q in filtrados),
        horizon_ms=horizon,
        default_quality=default_quality,
    )


def build_curve(
    profile: NetworkProfile,
    order,
    mode: Mode = "soft",
    exits: list[ExitSpec] | tuple[ExitSpec, ...] | None = None,
) -> QualityCurve:
    """Curva de calidad de un orden: cada salida cuenta desde que termina su última capa requerida"""
    eventos, total = exit_timeline(profile, order, mode, exits)
    crudos = [(0.0, profile.default_quality)] + [(e.time_ms, e.quality) for e in eventos]
    return monotone_filter(crudos, horizon=total, default_quality=profile.default_quality)


def quality_at(curve: QualityCurve, time_ms: float) -> float:
    tiempos = [s.time_ms for s in curve.steps]
    pos = bisect.bisect_right(tiempos, time_ms) - 1
    return curve.default_quality if pos < 0 else curve.steps[pos].quality


def _pieces(curve: QualityCurve) -> list[tuple[float, float, float]]:
    """Tramos (inicio, fin, calidad) que cubren [0, T)"""
    if not curve.steps:
        raise CurveError("La curva está vacía")
    tramos = []
    if curve.steps[0].time_ms > 0:
        tramos.append((0.0, curve.steps[0].time_ms, curve.default_quality))
    for i, step in enumerate(curve.steps):
        fin = curve.steps[i + 1].time_ms if i + 1 < len(curve.steps) else curve.horizon_ms
        tramos.append((step.time_ms, fin, step.quality))
    return tramos


def _integrate(curve: QualityCurve, w: WeightingSpec, integrand, normalize: bool) -> float:
    if not curve.steps:
        raise CurveError("La curva está vacía")
    horizon = curve.horizon_ms
    if normalize and horizon == 0:
        raise WeightingError("No se puede normalizar con horizonte T = 0")
    if w.kind == "empirical_samples":
        valores = [integrand(quality_at(curve, min(s, horizon))) for s in w.samples]
        media = sum(valores) / len(valores)
        return media if normalize else horizon * media

    total = 0.0
    for inicio, fin, calidad in _pieces(curve):
        total += integrand(calidad) * weight_mass(w, inicio, fin, horizon)
    return total / horizon if normalize else total


def anytime_quality(curve: QualityCurve, w: WeightingSpec, normalize: bool = True) -> float:
    """Integral exacta de la curva escalón contra w; dividida por T si normalize"""
    return _integrate(curve, w, lambda q: q, normalize)


def squared_error_quality(curve: QualityCurve, baseline: float, w: WeightingSpec) -> float:
    """Integral normalizada de (baseline - q(t))²; menor es mejor"""
    return _integrate(curve, w, lambda q: (baseline - q) ** 2, normalize=True)


def max_delta(curve: QualityCurve, include_initial_gap: bool = False) -> float:
    """
    Mayor separación entre disponibilidades consecutivas de salidas. El escalón
    inicial en t = 0 con la calidad por defecto no cuenta como salida.
    """
    if not curve.steps:
        raise CurveError("La curva está vacía")
    tiempos = [s.time_ms for s in curve.steps]
    if tiempos[0] == 0 and curve.steps[0].quality == curve.default_quality:
        tiempos = tiempos[1:]

    huecos = [b - a for a, b in zip(tiempos, tiempos[1:])]
    if include_initial_gap:
        if tiempos:
            huecos += [tiempos[0], curve.horizon_ms - tiempos[-1]]
        else:
            huecos.append(curve.horizon_ms)
    return max(huecos, default=0.0)


def curve_to_csv(curve: QualityCurve) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["time_ms", "quality"])
    for step in curve.steps:
        writer.writerow([repr(step.time_ms), repr(step.quality)])
    writer.writerow([repr(curve.horizon_ms), repr(curve.final_quality)])
    return buffer.getvalue()

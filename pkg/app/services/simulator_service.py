"""
Simulación de ejecución anytime bajo interrupciones (modos soft y hard) con
overheads por bloque, y calibración de esos overheads con la tabla de despliegue.
"""

import csv
import io
import logging
import math
from pathlib import Path

import numpy as np
from pydantic import ValidationError

from app.core.errors import SchemaError, SimulationError
from app.schemas.simulation import (
    BackendCalibration,
    DeploymentCalibration,
    DeploymentProfile,
    HistogramBin,
    InterruptSpec,
    SimulationResult,
    SimulationSpec,
)
from app.services.profile_service import ProfileIndex, exit_label
from app.services.quality_service import exit_timeline

logger = logging.getLogger(__name__)

# Ensayos por flujo aleatorio; forma parte de la reproducibilidad (semilla -> resultado)
STREAM_TRIALS = 65_536


def _check_interrupt(interrupt: InterruptSpec) -> None:
    if interrupt.kind == "exponential" and (interrupt.rate is None or interrupt.rate <= 0):
        raise SimulationError("La tasa de interrupciones exponenciales debe ser positiva")
    if interrupt.kind == "empirical" and not interrupt.samples:
        raise SimulationError("No hay muestras de interrupción")
    if interrupt.kind == "empirical" and min(interrupt.samples) < 0:
        raise SimulationError("Las muestras de interrupción deben ser no negativas")


def draw_interrupts(interrupt: InterruptSpec, end: float, size: int, rng: np.random.Generator) -> np.ndarray:
    """Instantes de interrupción; los posteriores al final de la ejecución se recortan al final"""
    if interrupt.kind == "uniform":
        return rng.uniform(0.0, end, size)
    if interrupt.kind == "exponential":
        return np.minimum(rng.exponential(1.0 / interrupt.rate, size), end)
    return np.minimum(rng.choice(np.asarray(interrupt.samples, dtype=float), size), end)


def simulate(spec: SimulationSpec) -> SimulationResult:
    """
    Por ensayo: se sortea una interrupción y se entrega la mejor salida
    disponible en ese instante. Soft paga la cabeza de la salida entregada más
    la transferencia; hard sólo la transferencia (las cabezas ya van en la línea
    de tiempo). Los ensayos se agrupan en lotes de tamaño fijo, cada uno con su
    propio flujo aleatorio derivado de la semilla.
    """
    _check_interrupt(spec.interrupt)
    profile = spec.profile
    plan = spec.plan
    index = ProfileIndex(profile)

    eventos, fin = exit_timeline(
        profile, plan.order, spec.mode, plan.selected_exits, per_layer_overhead=spec.per_chunk_overhead_ms
    )

    # Mejor salida disponible tras cada evento (la primera que alcanza el máximo)
    tiempos = np.array([e.time_ms for e in eventos], dtype=float)
    mejor_calidad = [profile.default_quality]
    mejor_salida: list[int] = [-1]
    for pos, evento in enumerate(eventos):
        if evento.quality > mejor_calidad[-1]:
            mejor_calidad.append(evento.quality)
            mejor_salida.append(pos)
        else:
            mejor_calidad.append(mejor_calidad[-1])
            mejor_salida.append(mejor_salida[-1])
    calidades = np.array(mejor_calidad)
    salidas = np.array(mejor_salida)

    if spec.mode == "soft":
        cabezas = [0.0] + [index.head_latency(e.exit) for e in eventos]
        retardo_por_estado = np.array([cabezas[p + 1] for p in mejor_salida]) + spec.transfer_delay_ms
    else:
        retardo_por_estado = np.full(len(mejor_salida), spec.transfer_delay_ms)

    lote = STREAM_TRIALS
    n_lotes = math.ceil(spec.trials / lote)
    semillas = np.random.SeedSequence(spec.seed).spawn(n_lotes)

    suma_calidad = 0.0
    suma_retardo = 0.0
    histograma: dict[float, int] = {}
    aciertos = np.zeros(len(eventos) + 1, dtype=np.int64)
    for b, semilla in enumerate(semillas):
        size = min(lote, spec.trials - b * lote)
        rng = np.random.default_rng(semilla)
        interrupciones = draw_interrupts(spec.interrupt, fin, size, rng)
        estado = np.searchsorted(tiempos, interrupciones, side="right")

        entregada = calidades[estado]
        suma_calidad += float(entregada.sum())
        suma_retardo += float(retardo_por_estado[estado].sum())
        valores, cuentas = np.unique(entregada, return_counts=True)
        for valor, cuenta in zip(valores.tolist(), cuentas.tolist()):
            histograma[valor] = histograma.get(valor, 0) + cuenta
        aciertos += np.bincount(salidas[estado] + 1, minlength=len(eventos) + 1)
        logger.debug("Lote %d/%d: %d ensayos", b + 1, n_lotes, size)

    hits = {"default": int(aciertos[0])}
    for pos, evento in enumerate(eventos):
        hits[exit_label(profile, evento.exit)] = int(aciertos[pos + 1])

    return SimulationResult(
        mode=spec.mode,
        trials=spec.trials,
        seed=spec.seed,
        mean_delivered_quality=suma_calidad / spec.trials,
        quality_histogram=[HistogramBin(quality=q, frequency=f) for q, f in sorted(histograma.items())],
        mean_response_delay_ms=suma_retardo / spec.trials,
        effective_total_time_ms=fin,
        per_exit_hit_counts=hits,
    )


def calibrate_overhead(baseline_total: float, chunked_total: float, chunk_count: int) -> float:
    """Overhead por bloque: (total troceado - total base) / número de bloques"""
    if chunk_count < 1:
        raise SimulationError("El número de bloques debe ser al menos 1")
    if chunked_total < baseline_total:
        raise SimulationError("El total troceado no puede ser menor que el total base")
    return (chunked_total - baseline_total) / chunk_count


def load_deployment(source: str | Path) -> DeploymentProfile:
    try:
        return DeploymentProfile.model_validate_json(Path(source).read_bytes())
    except ValidationError as e:
        raise SchemaError(f"Tabla de despliegue inválida: {e}") from e


def calibrate_deployment(deployment: DeploymentProfile) -> DeploymentCalibration:
    """Overheads por backend a partir de las mediciones de despliegue"""
    backends = {}
    for nombre, fila in deployment.backends.items():
        backends[nombre] = BackendCalibration(
            per_chunk_overhead_ms=calibrate_overhead(fila.baseline_ms, fila.soft_ms, deployment.chunks),
            chunking_overhead_ms=calibrate_overhead(fila.baseline_ms, fila.chunked_ms, deployment.chunks),
            hard_slowdown={n: total / fila.baseline_ms for n, total in sorted(fila.hard_ms.items())},
            hard_cost_per_exit_ms={n: (total - fila.soft_ms) / n for n, total in sorted(fila.hard_ms.items())},
        )
    return DeploymentCalibration(name=deployment.name, chunks=deployment.chunks, backends=backends)


def histogram_to_csv(result: SimulationResult) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["quality", "frequency"])
    for fila in result.quality_histogram:
        writer.writerow([repr(fila.quality), fila.frequency])
    return buffer.getvalue()

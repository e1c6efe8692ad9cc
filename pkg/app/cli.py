"""
Línea de comandos `anytime-sched`.

Cada subcomando lee un perfil (ruta o nombre de fixture incluido), llama al
servicio correspondiente y escribe el resultado en stdout o, con --out, en un
archivo escrito de forma atómica. Los errores de dominio salen con código 1,
los de uso con código 2.
"""

import logging
from pathlib import Path

import click
import uvicorn
from pydantic import ValidationError

from app import __version__
from app.core.config import settings
from app.core.errors import AnytimeError, SchemaError, SimulationError, WeightingError
from app.core.log import configure_logging
from app.integrations.storage import read_numeric_rows, resolve_source, write_artifact
from app.schemas.plan import SchedulePlan
from app.schemas.profile import NetworkProfile
from app.schemas.quality import CurveReport, WeightingSpec
from app.schemas.simulation import InterruptSpec, SimulationSpec
from app.services import graph_service, optimizer_service, profile_service, quality_service
from app.services import render_service, report_service, simulator_service

logger = logging.getLogger(__name__)


class AnytimeGroup(click.Group):
    """Traduce los errores de dominio y de E/S a ClickException (código 1)."""

    def invoke(self, ctx: click.Context):
        try:
            return super().invoke(ctx)
        except AnytimeError as e:
            raise click.ClickException(str(e)) from e
        except OSError as e:
            ruta = e.filename or ""
            detalle = e.strerror or str(e)
            raise click.ClickException(f"{ruta}: {detalle}" if ruta else detalle) from e


class WeightingParam(click.ParamType):
    """`uniform`, `piecewise:<csv time_ms,weight>` o `samples:<csv time_ms>`"""

    name = "weighting"

    def convert(self, value, param, ctx):
        if isinstance(value, WeightingSpec):
            return value
        kind, _, path = value.partition(":")
        if kind == "uniform" and not path:
            return WeightingSpec()
        if kind not in ("piecewise", "samples") or not path:
            self.fail(f"se esperaba uniform, piecewise:<archivo> o samples:<archivo>, no {value!r}", param, ctx)

        filas = _numeric_rows(path)
        if kind == "piecewise" and any(len(fila) != 2 for fila in filas):
            raise WeightingError(f"{path}: cada fila debe ser 'time_ms,weight'")
        try:
            if kind == "piecewise":
                return WeightingSpec(kind="piecewise_constant", breakpoints=tuple(filas))
            return WeightingSpec(kind="empirical_samples", samples=tuple(x for fila in filas for x in fila))
        except ValidationError as e:
            raise WeightingError(f"{path}: ponderación inválida: {e}") from e


def _numeric_rows(path: str) -> list[tuple[float, ...]]:
    try:
        return read_numeric_rows(path)
    except ValueError as e:
        raise WeightingError(str(e)) from e


WEIGHTING = WeightingParam()


def weighting_option(f):
    return click.option(
        "--weighting",
        type=WEIGHTING,
        default="uniform",
        show_default=True,
        help="Ponderación w(t): uniform | piecewise:<csv> | samples:<csv>",
    )(f)


def mode_option(f):
    return click.option(
        "--mode", type=click.Choice(["soft", "hard"]), default="soft", show_default=True, help="Modo de interrupción"
    )(f)


def out_option(f):
    return click.option(
        "--out", type=click.Path(dir_okay=False, path_type=Path), default=None, help="Archivo de salida (stdout si se omite)"
    )(f)


def format_option(*choices: str):
    def decorator(f):
        return click.option(
            "--format", "fmt", type=click.Choice(list(choices)), default=choices[0], show_default=True
        )(f)

    return decorator


def node_limit_option(f):
    return click.option(
        "--node-limit", type=click.IntRange(min=1), default=None, help="Máximo de estados del grafo de ejecución"
    )(f)


def initial_gap_option(f):
    return click.option(
        "--include-initial-gap", is_flag=True, default=False, help="max Δ cuenta también [0, primera salida] y [última, T]"
    )(f)


def _load(source: str) -> NetworkProfile:
    return profile_service.load_profile(resolve_source(source))


def _emit(text: str, out: Path | None) -> None:
    if out is None:
        click.echo(text, nl=False)
    else:
        write_artifact(out, text)


def _to_json(model) -> str:
    return model.model_dump_json(indent=2) + "\n"


def _with_gap(plan: SchedulePlan, include_initial_gap: bool) -> SchedulePlan:
    if not include_initial_gap:
        return plan
    return plan.model_copy(update={"max_delta_ms": quality_service.max_delta(plan.curve, include_initial_gap=True)})


def _emit_plan(plan: SchedulePlan, fmt: str, out: Path | None) -> None:
    if fmt == "csv":
        _emit(quality_service.curve_to_csv(plan.curve), out)
    elif fmt == "svg":
        _emit(render_service.render_curve_svg({plan.method: plan.curve}), out)
    else:
        _emit(_to_json(plan), out)


@click.group(cls=AnytimeGroup, context_settings={"help_option_names": ["-h", "--help"]})
@click.version_option(__version__, prog_name="anytime-sched")
@click.option("--log-level", default=None, help="Nivel de logging (por defecto ANYTIME_LOG_LEVEL)")
def cli(log_level: str | None):
    """Planificación de inferencia anytime sobre perfiles de red declarativos."""
    configure_logging(log_level)


@cli.command()
@click.argument("source")
@format_option("text", "json")
@out_option
def validate(source: str, fmt: str, out: Path | None):
    """Valida un perfil y muestra su resumen."""
    summary = profile_service.profile_summary(_load(source))
    _emit(_to_json(summary) if fmt == "json" else summary.summary + "\n", out)


@cli.command("graph-stats")
@click.argument("source")
@weighting_option
@mode_option
@node_limit_option
@click.option("--exit-graph", is_flag=True, default=False, help="Grafo reducido a estados de salida")
@click.option("-v", "--verbose", is_flag=True, default=False, help="Incluye el volcado de cada estado")
@out_option
def graph_stats(source, weighting, mode, node_limit, exit_graph, verbose, out):
    """Tamaño del grafo de estados (y volcado de estados con -v)."""
    profile = _load(source)
    if exit_graph:
        graph = graph_service.build_exit_graph(profile, weighting)
    else:
        graph = graph_service.build_execution_graph(profile, weighting, mode, node_limit)
    _emit(_to_json(graph_service.graph_stats(graph, verbose)), out)


@cli.command()
@click.argument("source")
@click.option("--order", default=None, help="Orden de capas separado por comas (por defecto el de la tabla)")
@weighting_option
@mode_option
@click.option("--normalize/--no-normalize", default=True, show_default=True)
@initial_gap_option
@format_option("json", "csv", "svg")
@out_option
def curve(source, order, weighting, mode, normalize, include_initial_gap, fmt, out):
    """Curva de calidad de un orden de ejecución con su Q y max Δ."""
    profile = _load(source)
    if order is None:
        orden = [layer.id for layer in profile.layers]
    else:
        try:
            orden = [int(x) for x in order.split(",") if x.strip()]
        except ValueError:
            raise click.BadParameter("debe ser una lista de ids enteros", param_hint="--order") from None

    c = quality_service.build_curve(profile, orden, mode)
    if fmt == "csv":
        _emit(quality_service.curve_to_csv(c), out)
        return
    if fmt == "svg":
        _emit(render_service.render_curve_svg({profile.name: c}), out)
        return
    report = CurveReport(
        profile_name=profile.name,
        mode=mode,
        order=tuple(orden),
        curve=c,
        q=quality_service.anytime_quality(c, weighting, normalize),
        normalized=normalize,
        max_delta_ms=quality_service.max_delta(c, include_initial_gap),
    )
    _emit(_to_json(report), out)


@cli.command()
@click.argument("source")
@click.option("--method", type=click.Choice(["dp", "brute-force"]), default="dp", show_default=True)
@weighting_option
@mode_option
@node_limit_option
@initial_gap_option
@format_option("json", "csv", "svg")
@out_option
def optimize(source, method, weighting, mode, node_limit, include_initial_gap, fmt, out):
    """Orden de ejecución óptimo con todas las salidas."""
    profile = _load(source)
    if method == "dp":
        plan = optimizer_service.optimal_order(
            graph_service.build_execution_graph(profile, weighting, mode, node_limit)
        )
    else:
        plan = optimizer_service.brute_force_order(profile, weighting, mode=mode)
    _emit_plan(_with_gap(plan, include_initial_gap), fmt, out)


@cli.command("select-exits")
@click.argument("source")
@click.option("-k", "k", type=click.IntRange(min=1), required=True, help="Máximo de salidas a seleccionar")
@weighting_option
@initial_gap_option
@format_option("json", "csv", "svg")
@out_option
def select_exits(source, k, weighting, include_initial_gap, fmt, out):
    """Mejor subconjunto de como mucho k salidas (modo soft)."""
    profile = _load(source)
    plan = optimizer_service.select_exits(graph_service.build_exit_graph(profile, weighting), k)
    _emit_plan(_with_gap(plan, include_initial_gap), fmt, out)


@cli.command()
@click.argument("source")
@click.option("--method", type=click.Choice(["time", "perf"]), default="time", show_default=True)
@weighting_option
@initial_gap_option
@format_option("json", "csv", "svg")
@out_option
def greedy(source, method, weighting, include_initial_gap, fmt, out):
    """Heurística greedy sobre el grafo de salidas."""
    exit_graph = graph_service.build_exit_graph(_load(source), weighting)
    heuristica = optimizer_service.greedy_time if method == "time" else optimizer_service.greedy_perf
    _emit_plan(_with_gap(heuristica(exit_graph), include_initial_gap), fmt, out)


@cli.command("brute-force")
@click.argument("source")
@click.option("--limit", type=click.IntRange(min=1), default=None, help="Máximo de órdenes topológicos")
@weighting_option
@mode_option
@format_option("json", "csv", "svg")
@out_option
def brute_force(source, limit, weighting, mode, fmt, out):
    """Oráculo exhaustivo sobre todos los órdenes topológicos (perfiles pequeños)."""
    plan = optimizer_service.brute_force_order(_load(source), weighting, limit=limit, mode=mode)
    _emit_plan(plan, fmt, out)


@cli.command()
@click.argument("source")
@click.option("--plan", "plan_path", type=click.Path(dir_okay=False, path_type=Path), default=None,
              help="Plan JSON a simular (por defecto se calcula con --method)")
@click.option("--method", type=click.Choice(["optimal", "greedy_time", "greedy_perf"]), default="optimal",
              show_default=True)
@weighting_option
@mode_option
@node_limit_option
@click.option("--interrupt", type=click.Choice(["uniform", "exponential", "empirical"]), default="uniform",
              show_default=True, help="Distribución de las interrupciones")
@click.option("--rate", type=click.FloatRange(min=0, min_open=True), default=None, help="Tasa λ (exponencial, 1/ms)")
@click.option("--samples", "samples_path", type=click.Path(dir_okay=False), default=None,
              help="CSV con instantes de interrupción (empírica)")
@click.option("--overhead", type=click.FloatRange(min=0), default=0.0, show_default=True, help="ms por bloque")
@click.option("--transfer-delay", type=click.FloatRange(min=0), default=0.0, show_default=True, help="ms por entrega")
@click.option("--trials", type=click.IntRange(min=1), default=None, help="Ensayos (por defecto ANYTIME_SIMULATION_TRIALS)")
@click.option("--seed", type=int, default=settings.DEFAULT_SEED, show_default=True)
@format_option("json", "csv")
@out_option
def simulate(source, plan_path, method, weighting, mode, node_limit, interrupt, rate, samples_path,
             overhead, transfer_delay, trials, seed, fmt, out):
    """Simulación Monte Carlo de interrupciones sobre un plan."""
    profile = _load(source)
    if plan_path is not None:
        try:
            plan = SchedulePlan.model_validate_json(plan_path.read_bytes())
        except ValidationError as e:
            raise SchemaError(f"{plan_path}: plan inválido: {e}") from e
        if plan.profile_name != profile.name:
            raise SimulationError(f"El plan es de '{plan.profile_name}', no de '{profile.name}'")
    else:
        plan = optimizer_service.plan_for_method(profile, weighting, method, mode, node_limit)

    if interrupt == "exponential" and rate is None:
        raise click.BadParameter("la distribución exponencial necesita --rate", param_hint="--rate")
    if interrupt == "empirical" and samples_path is None:
        raise click.BadParameter("la distribución empírica necesita --samples", param_hint="--samples")
    samples = tuple(x for fila in _numeric_rows(samples_path) for x in fila) if samples_path else ()

    spec = SimulationSpec(
        profile=profile,
        plan=plan,
        mode=mode,
        interrupt=InterruptSpec(kind=interrupt, rate=rate, samples=samples),
        per_chunk_overhead_ms=overhead,
        transfer_delay_ms=transfer_delay,
        trials=trials if trials is not None else settings.SIMULATION_TRIALS,
        seed=seed,
    )
    result = simulator_service.simulate(spec)
    _emit(simulator_service.histogram_to_csv(result) if fmt == "csv" else _to_json(result), out)


@cli.command()
@click.argument("source")
@weighting_option
@mode_option
@node_limit_option
@click.option("--seed", type=int, default=settings.DEFAULT_SEED, show_default=True)
@format_option("json", "csv", "svg")
@out_option
def report(source, weighting, mode, node_limit, seed, fmt, out):
    """Tabla comparativa: óptimo frente a greedy, con curvas y procedencia."""
    profile = _load(source)
    bundle = report_service.build_report(
        profile, weighting, mode, node_limit, seed=seed, fixtures=[Path(source).stem]
    )
    if fmt == "csv":
        _emit(report_service.metrics_to_csv(bundle), out)
    elif fmt == "svg":
        _emit(render_service.render_curve_svg(bundle.curves), out)
    else:
        _emit(_to_json(bundle), out)


@cli.command()
@click.argument("source", default="deployment-gelan-t")
@out_option
def calibrate(source, out):
    """Overheads por bloque a partir de una tabla de latencias de despliegue."""
    deployment = simulator_service.load_deployment(resolve_source(source))
    _emit(_to_json(simulator_service.calibrate_deployment(deployment)), out)


@cli.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8000, show_default=True)
def serve(host: str, port: int):
    """Levanta la API HTTP con uvicorn."""
    uvicorn.run("app.main:app", host=host, port=port)


def main() -> None:
    cli(prog_name="anytime-sched")


if __name__ == "__main__":
    main()

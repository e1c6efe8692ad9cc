import io
import logging

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from app.core.config import settings  # noqa: E402
from app.core.errors import CurveError  # noqa: E402
from app.schemas.quality import QualityCurve  # noqa: E402

logger = logging.getLogger(__name__)

# Salida SVG estable byte a byte entre ejecuciones
SVG_RC = {
    "svg.hashsalt": "anytime-sched",
    "svg.fonttype": "none",
    "path.simplify": False,
}


def _step_points(curve: QualityCurve) -> tuple[list[float], list[float]]:
    xs = [s.time_ms for s in curve.steps]
    ys = [s.quality for s in curve.steps]
    if not xs or xs[0] > 0:
        xs.insert(0, 0.0)
        ys.insert(0, curve.default_quality)
    xs.append(curve.horizon_ms)
    ys.append(curve.final_quality)
    return xs, ys


def render_curve_svg(curves: dict[str, QualityCurve]) -> str:
    """Gráfico escalón (calidad frente a ms) con una línea por curva y leyenda con sus nombres"""
    if not curves:
        raise CurveError("No hay curvas que dibujar")
    for nombre, curve in curves.items():
        if not curve.steps:
            raise CurveError(f"La curva '{nombre}' está vacía")

    with plt.rc_context(SVG_RC):
        fig, ax = plt.subplots(figsize=(settings.SVG_WIDTH, settings.SVG_HEIGHT))
        try:
            for i, (nombre, curve) in enumerate(curves.items()):
                xs, ys = _step_points(curve)
                ax.step(xs, ys, where="post", label=nombre, gid=f"curve-{i}")
            ax.set_xlabel("time [ms]")
            ax.set_ylabel("quality")
            ax.grid(True, alpha=0.3)
            ax.legend(loc="lower right")
            buffer = io.StringIO()
            fig.savefig(buffer, format="svg", metadata={"Date": None})
        finally:
            plt.close(fig)

    logger.debug("SVG con %d curvas", len(curves))
    return buffer.getvalue()

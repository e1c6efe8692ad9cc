import logging
from contextlib import asynccontextmanager

from fastapi import FastAPI

from app import __version__
from app.core.config import settings
from app.core.log import configure_logging
from app.integrations.storage import list_fixtures
from app.routes.plans import router as plans_router
from app.routes.profiles import router as profiles_router
from app.routes.simulation import router as simulation_router

logger = logging.getLogger(__name__)


@asynccontextmanager
async def lifespan(app: FastAPI):
    """Configura el logging y comprueba que los fixtures incluidos están disponibles."""
    configure_logging()
    fixtures = list_fixtures()
    if fixtures:
        logger.info("Fixtures disponibles: %s", ", ".join(fixtures))
    else:
        logger.warning("No se encontraron fixtures incluidos")
    yield


app = FastAPI(title=settings.API_TITLE, version=__version__, lifespan=lifespan)

app.include_router(profiles_router)
app.include_router(plans_router)
app.include_router(simulation_router)


@app.get("/help")
def help_endpoint():
    return {
        "status": "ok",
        "routes": ["/profiles", "/plans", "/simulation", "/help", "/docs"],
        "endpoints": {
            "/profiles/validate": {
                "POST": {
                    "description": "Valida un perfil y devuelve capas, sub-salidas, salidas y latencia total",
                    "body": {"profile": "(opcional) perfil en línea", "fixture": "(opcional) nombre de fixture, p. ej. gelan-t"},
                }
            },
            "/profiles/fixtures": {"GET": {"description": "Fixtures incluidos (perfiles y tablas de despliegue)"}},
            "/plans/optimize": {
                "POST": {
                    "description": "Orden de ejecución óptimo con todas las salidas",
                    "body": {"weighting": "uniform | piecewise_constant | empirical_samples", "mode": "soft | hard", "node_limit": "(opcional)"},
                }
            },
            "/plans/select-exits": {"POST": {"description": "Mejor subconjunto de como mucho k salidas", "body": {"k": "entero >= 1"}}},
            "/plans/greedy": {"POST": {"description": "Heurística greedy", "body": {"method": "time | perf"}}},
            "/simulation/run": {
                "POST": {
                    "description": "Monte Carlo de interrupciones sobre un plan",
                    "body": {
                        "method": "optimal | greedy_time | greedy_perf (si no se envía plan)",
                        "interrupt": {"kind": "uniform | exponential | empirical", "rate": "λ (1/ms)", "samples": "[ms, ...]"},
                        "trials": "(opcional)",
                        "seed": "entero",
                    },
                }
            },
            "/simulation/calibrate": {"POST": {"description": "Overheads por backend a partir de la tabla de despliegue"}},
        },
    }

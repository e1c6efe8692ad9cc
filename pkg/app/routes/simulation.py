from fastapi import APIRouter

from app.core.config import settings
from app.core.errors import AnytimeError
from app.dependencies.profiles import domain_error, resolve_profile
from app.schemas.simulation import (
    DeploymentCalibration,
    DeploymentProfile,
    SimulationRequest,
    SimulationResult,
    SimulationSpec,
)
from app.services.optimizer_service import plan_for_method
from app.services.simulator_service import calibrate_deployment, simulate

router = APIRouter(prefix="/simulation", tags=["Simulation"])


@router.post("/run", response_model=SimulationResult)
def simular(data: SimulationRequest):
    """
    Simula interrupciones sobre el plan enviado o, si no se envía, sobre el
    plan calculado con `method` (óptimo o greedy) y la ponderación indicada.
    """
    profile = resolve_profile(data)
    try:
        plan = data.plan or plan_for_method(profile, data.weighting, data.method, data.mode)
        spec = SimulationSpec(
            profile=profile,
            plan=plan,
            mode=data.mode,
            interrupt=data.interrupt,
            per_chunk_overhead_ms=data.per_chunk_overhead_ms,
            transfer_delay_ms=data.transfer_delay_ms,
            trials=data.trials or settings.SIMULATION_TRIALS,
            seed=data.seed,
        )
        return simulate(spec)
    except AnytimeError as e:
        raise domain_error(e)


@router.post("/calibrate", response_model=DeploymentCalibration)
def calibrar(deployment: DeploymentProfile):
    """Overheads por bloque y coste de las salidas hard por backend"""
    try:
        return calibrate_deployment(deployment)
    except AnytimeError as e:
        raise domain_error(e)

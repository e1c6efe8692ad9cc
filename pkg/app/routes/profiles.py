from fastapi import APIRouter

from app.dependencies.profiles import resolve_profile
from app.integrations.storage import list_fixtures
from app.schemas.plan import ProfileRequest
from app.schemas.profile import FixtureInfo, ProfileSummary
from app.services.profile_service import profile_summary

router = APIRouter(prefix="/profiles", tags=["Profiles"])


@router.post("/validate", response_model=ProfileSummary)
def validar_perfil(data: ProfileRequest):
    """
    Valida un perfil (en línea o fixture) y devuelve su resumen.
    Un perfil inválido (ciclo, referencia colgante...) responde 422.
    """
    return profile_summary(resolve_profile(data))


@router.get("/fixtures", response_model=list[FixtureInfo])
def listar_fixtures():
    return [
        FixtureInfo(name=nombre, kind="deployment" if nombre.startswith("deployment-") else "profile")
        for nombre in list_fixtures()
    ]

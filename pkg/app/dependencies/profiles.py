from fastapi import HTTPException, status

from app.core.errors import AnytimeError
from app.integrations.storage import fixture_path
from app.schemas.plan import ProfileRequest
from app.schemas.profile import NetworkProfile
from app.services.profile_service import load_fixture, validate_profile


def domain_error(error: AnytimeError) -> HTTPException:
    return HTTPException(status_code=status.HTTP_422_UNPROCESSABLE_CONTENT, detail=str(error))


def resolve_profile(data: ProfileRequest) -> NetworkProfile:
    """
    Perfil de la petición: el enviado en línea o, si no hay, el fixture
    incluido con ese nombre. Exactamente uno de los dos debe venir informado.
    """
    if (data.profile is None) == (data.fixture is None):
        raise HTTPException(
            status_code=status.HTTP_400_BAD_REQUEST,
            detail="Indica 'profile' o 'fixture', pero no ambos",
        )
    if data.fixture is not None and fixture_path(data.fixture) is None:
        raise HTTPException(status_code=status.HTTP_404_NOT_FOUND, detail=f"Fixture no encontrado: {data.fixture}")
    try:
        if data.profile is not None:
            return validate_profile(data.profile)
        return load_fixture(data.fixture)
    except AnytimeError as e:
        raise domain_error(e)

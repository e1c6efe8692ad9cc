import csv
import logging
import os
import tempfile
from pathlib import Path

logger = logging.getLogger(__name__)

FIXTURES_DIR = Path(__file__).resolve().parent.parent / "fixtures"


def write_artifact(path: str | Path, content: str | bytes) -> Path:
    """
    Escribe un artefacto de forma atómica: archivo temporal en el mismo
    directorio y luego os.replace sobre el destino.

    Args:
        path: Ruta de destino
        content: Texto (se codifica en UTF-8) o bytes

    Returns:
        Ruta final escrita
    """
    destino = Path(path)
    data = content.encode("utf-8") if isinstance(content, str) else content
    directorio = destino.parent if str(destino.parent) else Path(".")
    directorio.mkdir(parents=True, exist_ok=True)

    fd, tmp_name = tempfile.mkstemp(prefix=f".{destino.name}.", suffix=".tmp", dir=directorio)
    try:
        with os.fdopen(fd, "wb") as tmp:
            tmp.write(data)
        os.replace(tmp_name, destino)
    except BaseException:
        # No dejar temporales huérfanos
        if os.path.exists(tmp_name):
            os.unlink(tmp_name)
        raise

    logger.info("Artefacto escrito en %s (%d bytes)", destino, len(data))
    return destino


def list_fixtures() -> list[str]:
    """Nombres (sin extensión) de los fixtures incluidos en el paquete"""
    return sorted(p.stem for p in FIXTURES_DIR.glob("*.json"))


def fixture_path(name: str) -> Path | None:
    """Ruta de un fixture incluido, aceptando 'gelan-t', 'gelan-t.json' o 'fixtures/gelan-t.json'"""
    candidato = FIXTURES_DIR / f"{Path(name).stem}.json"
    return candidato if candidato.is_file() else None


def resolve_source(source: str | Path) -> Path:
    """
    Resuelve el origen de un documento: primero una ruta existente y, si no
    existe, un fixture incluido con el mismo nombre.
    """
    ruta = Path(source)
    if ruta.is_file():
        return ruta
    fixture = fixture_path(str(source))
    if fixture is not None:
        logger.debug("Usando fixture incluido %s para %s", fixture.name, source)
        return fixture
    raise FileNotFoundError(f"No existe el archivo ni el fixture: {source}")


def read_numeric_rows(path: str | Path) -> list[tuple[float, ...]]:
    """
    Filas numéricas de un CSV (ponderaciones por tramos, muestras de
    interrupción). Una primera fila no numérica se toma como cabecera.
    """
    ruta = Path(path)
    filas: list[tuple[float, ...]] = []
    with ruta.open(newline="", encoding="utf-8") as f:
        for n, fila in enumerate(csv.reader(f), start=1):
            celdas = [c.strip() for c in fila if c.strip()]
            if not celdas:
                continue
            try:
                filas.append(tuple(float(c) for c in celdas))
            except ValueError:
                if n == 1:
                    continue
                raise ValueError(f"{ruta}:{n}: fila no numérica {fila!r}") from None
    return filas

"""
Modelo declarativo de la red: carga, validación, guardado y clausuras de
dependencias de las salidas.
"""

import json
import logging
import math
from itertools import accumulate
from pathlib import Path
from typing import BinaryIO

import networkx as nx
from pydantic import ValidationError

from app.core.errors import CycleError, DanglingReferenceError, ProfileError, SchemaError
from app.integrations.storage import fixture_path, write_artifact
from app.schemas.profile import ExitSpec, NetworkProfile, ProfileSummary

logger = logging.getLogger(__name__)


class ProfileIndex:
    """
    Vista precalculada de un perfil validado. Cada capa ocupa un bit (en orden
    ascendente de id) para representar conjuntos de capas como enteros.
    """

    def __init__(self, profile: NetworkProfile):
        self.profile = profile
        self.layer_ids = [layer.id for layer in profile.layers]
        self.position = {layer_id: pos for pos, layer_id in enumerate(self.layer_ids)}
        self.latency = [layer.latency_ms for layer in profile.layers]
        self.full_mask = (1 << len(self.layer_ids)) - 1
        self.graph = layer_graph(profile)
        self.dep_mask = [self.mask_of(layer.deps) for layer in profile.layers]
        self.sub_exits = {sub.id: sub for sub in profile.sub_exits}
        self._closures: dict[int, int] = {}

    def bit(self, layer_id: int) -> int:
        return 1 << self.position[layer_id]

    def mask_of(self, layer_ids) -> int:
        mask = 0
        for layer_id in layer_ids:
            mask |= 1 << self.position[layer_id]
        return mask

    def ids_of(self, mask: int) -> list[int]:
        return [layer_id for pos, layer_id in enumerate(self.layer_ids) if mask >> pos & 1]

    def closure(self, layer_id: int) -> int:
        if layer_id not in self._closures:
            ancestros = nx.ancestors(self.graph, layer_id)
            self._closures[layer_id] = self.mask_of(ancestros) | self.bit(layer_id)
        return self._closures[layer_id]

    def required_mask(self, exit: ExitSpec) -> int:
        mask = 0
        for sub_id in exit.sub_exits.values():
            sub = self.sub_exits.get(sub_id)
            if sub is None:
                raise DanglingReferenceError(sub_id, "sub_exits de la salida")
            mask |= self.closure(sub.attach_layer)
        if exit.head_layer is not None:
            if exit.head_layer not in self.position:
                raise DanglingReferenceError(exit.head_layer, "head_layer de la salida")
            mask |= self.closure(exit.head_layer)
        return mask

    def elapsed(self, mask: int) -> float:
        """Suma de latencias de las capas del conjunto, en orden ascendente de id"""
        total = 0.0
        for pos, latency in enumerate(self.latency):
            if mask >> pos & 1:
                total += latency
        return total

    def head_latency(self, exit: ExitSpec) -> float:
        if exit.head_layer is not None:
            return 0.0
        return sum(self.sub_exits[sub_id].head_latency_ms for sub_id in exit.sub_exits.values())


def layer_graph(profile: NetworkProfile) -> nx.DiGraph:
    """DAG de capas con aristas dependencia -> capa"""
    graph = nx.DiGraph()
    graph.add_nodes_from(layer.id for layer in profile.layers)
    for layer in profile.layers:
        graph.add_edges_from((dep, layer.id) for dep in layer.deps)
    return graph


def exit_key(profile: NetworkProfile, exit: ExitSpec) -> tuple[int, ...]:
    return tuple(exit.sub_exits[scale] for scale in profile.scales)


def exit_label(profile: NetworkProfile, exit: ExitSpec | None) -> str:
    """Etiqueta legible de una salida, p. ej. '(3,5,7)'; 'default' si no hay salida"""
    if exit is None:
        return "default"
    return "(" + ",".join(str(sub_id) for sub_id in exit_key(profile, exit)) + ")"


def validate_profile(profile: NetworkProfile) -> NetworkProfile:
    """
    Comprueba las invariantes que el esquema no puede expresar: referencias,
    aciclicidad, escalas y la designación única de la salida final.
    """
    if not profile.scales:
        raise ProfileError("El perfil debe declarar al menos una escala")
    if len(set(profile.scales)) != len(profile.scales):
        raise ProfileError("Escalas duplicadas en el perfil")

    ids = [layer.id for layer in profile.layers]
    if not ids:
        raise ProfileError("El perfil no tiene capas")
    if len(set(ids)) != len(ids):
        raise ProfileError("Ids de capa duplicados")
    conocidas = set(ids)
    for layer in profile.layers:
        for dep in layer.deps:
            if dep not in conocidas:
                raise DanglingReferenceError(dep, f"deps de la capa {layer.id}")

    try:
        ciclo = nx.find_cycle(layer_graph(profile))
    except nx.NetworkXNoCycle:
        ciclo = None
    if ciclo:
        raise CycleError([u for u, _ in ciclo])

    sub_ids = [sub.id for sub in profile.sub_exits]
    if len(set(sub_ids)) != len(sub_ids):
        raise ProfileError("Ids de sub-salida duplicados")
    for sub in profile.sub_exits:
        if sub.attach_layer not in conocidas:
            raise DanglingReferenceError(sub.attach_layer, f"attach_layer de la sub-salida {sub.id}")
        if sub.scale not in profile.scales:
            raise ProfileError(f"La sub-salida {sub.id} usa la escala no declarada '{sub.scale}'")

    if not profile.exits:
        raise ProfileError("El perfil no declara ninguna salida utilizable")
    subs = {sub.id: sub for sub in profile.sub_exits}
    for pos, exit in enumerate(profile.exits):
        if set(exit.sub_exits) != set(profile.scales):
            raise ProfileError(f"La salida #{pos} debe tener exactamente una sub-salida por escala {list(profile.scales)}")
        for scale, sub_id in exit.sub_exits.items():
            if sub_id not in subs:
                raise DanglingReferenceError(sub_id, f"salida #{pos}")
            if subs[sub_id].scale != scale:
                raise ProfileError(
                    f"La salida #{pos} asigna la sub-salida {sub_id} (escala '{subs[sub_id].scale}') a la escala '{scale}'"
                )
        if exit.head_layer is not None and exit.head_layer not in conocidas:
            raise DanglingReferenceError(exit.head_layer, f"head_layer de la salida #{pos}")

    index = ProfileIndex(profile)
    finales = [
        exit for exit, _ in _dedupe_exits(profile, index)
        if index.required_mask(exit) == index.full_mask
    ]
    if len(finales) != 1:
        raise ProfileError(
            f"Debe existir exactamente una salida final que requiera todas las capas (hay {len(finales)})"
        )
    if not math.isclose(finales[0].quality, profile.final_quality, rel_tol=1e-9, abs_tol=1e-9):
        raise ProfileError(
            f"La calidad de la salida final ({finales[0].quality}) no coincide con final_quality ({profile.final_quality})"
        )
    return profile


def parse_profile(document: dict) -> NetworkProfile:
    try:
        profile = NetworkProfile.model_validate(document)
    except ValidationError as e:
        raise SchemaError(f"Documento de perfil inválido: {e}") from e
    return validate_profile(profile)


def load_profile(source: str | Path | bytes | BinaryIO) -> NetworkProfile:
    """
    Carga y valida un perfil desde una ruta, bytes o un flujo binario.

    Raises:
        SchemaError: JSON mal formado o campos ausentes / mal tipados
        CycleError: dependencias cíclicas entre capas
        DanglingReferenceError: referencia a un id inexistente
    """
    if isinstance(source, (bytes, bytearray)):
        raw = bytes(source)
    elif hasattr(source, "read"):
        raw = source.read()
    else:
        raw = Path(source).read_bytes()

    try:
        document = json.loads(raw)
    except (json.JSONDecodeError, UnicodeDecodeError) as e:
        raise SchemaError(f"El perfil no es JSON válido: {e}") from e
    if not isinstance(document, dict):
        raise SchemaError("El perfil debe ser un objeto JSON")

    profile = parse_profile(document)
    logger.debug("Perfil %s cargado: %d capas, %d salidas", profile.name, len(profile.layers), len(profile.exits))
    return profile


def load_fixture(name: str) -> NetworkProfile:
    ruta = fixture_path(name)
    if ruta is None:
        raise ProfileError(f"No existe el fixture '{name}'")
    return load_profile(ruta)


def save_profile(profile: NetworkProfile, path: str | Path | None = None) -> str:
    """Serializa el perfil en su forma canónica (capas y sub-salidas ordenadas por id)"""
    document = profile.model_dump(mode="json", exclude_none=True)
    text = json.dumps(document, indent=2, ensure_ascii=False) + "\n"
    if path is not None:
        write_artifact(path, text)
    return text


def required_layers(profile: NetworkProfile, exit: ExitSpec) -> frozenset[int]:
    """Unión de las clausuras de dependencias de las capas de enganche de la salida"""
    index = ProfileIndex(profile)
    return frozenset(index.ids_of(index.required_mask(exit)))


def _dedupe_exits(profile: NetworkProfile, index: ProfileIndex) -> list[tuple[ExitSpec, int]]:
    vistas: set[tuple[int, ...]] = set()
    salidas = []
    for exit in profile.exits:
        key = exit_key(profile, exit)
        if key in vistas:
            continue
        vistas.add(key)
        salidas.append((exit, index.required_mask(exit)))
    return salidas


def enumerate_reachable_exits(profile: NetworkProfile) -> list[tuple[ExitSpec, frozenset[int]]]:
    """Salidas utilizables (sin duplicados de asignación) con su conjunto de capas requeridas"""
    index = ProfileIndex(profile)
    salidas = [(exit, frozenset(index.ids_of(mask))) for exit, mask in _dedupe_exits(profile, index)]
    if not salidas:
        raise ProfileError("El perfil no declara ninguna salida utilizable")
    return salidas


def usable_exits(profile: NetworkProfile) -> list[ExitSpec]:
    return [exit for exit, _ in enumerate_reachable_exits(profile)]


def final_exit(profile: NetworkProfile) -> ExitSpec:
    index = ProfileIndex(profile)
    for exit, mask in _dedupe_exits(profile, index):
        if mask == index.full_mask:
            return exit
    raise ProfileError("El perfil no tiene salida final")


def cumulative_latencies(profile: NetworkProfile, order: list[int] | None = None) -> list[tuple[int, float]]:
    """Latencia acumulada tras cada capa siguiendo el orden dado (por defecto, el de la tabla)"""
    latencias = {layer.id: layer.latency_ms for layer in profile.layers}
    orden = list(order) if order is not None else [layer.id for layer in profile.layers]
    return list(zip(orden, accumulate(latencias[layer_id] for layer_id in orden)))


def profile_summary(profile: NetworkProfile) -> ProfileSummary:
    total = cumulative_latencies(profile)[-1][1]
    return ProfileSummary(
        name=profile.name,
        layers=len(profile.layers),
        sub_exits=len(profile.sub_exits),
        exits=len(enumerate_reachable_exits(profile)),
        total_latency_ms=total,
        final_quality=profile.final_quality,
        final_quality_ap50_90=final_exit(profile).quality_ap50_90,
        summary=f"{len(profile.layers)} layers, {len(profile.sub_exits)} sub-exits",
    )

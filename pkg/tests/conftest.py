import numpy as np
import pytest

from app.schemas.profile import NetworkProfile
from app.services.profile_service import load_fixture, validate_profile


def build_profile(
    layers,
    exits,
    scales=("a", "b"),
    sub_exits=None,
    default_quality=0.0,
    name="test",
):
    """
    Perfil pequeño a partir de tuplas.

    layers: [(id, latency, deps), ...]
    exits: [({scale: sub_id}, quality, head_layer | None), ...]; la salida que
        requiere todas las capas es la final y fija final_quality.
    sub_exits: [(id, attach_layer, scale, head_latency), ...]; por defecto una
        sub-salida por capa y escala con id = capa * len(scales) + índice de escala.
    """
    if sub_exits is None:
        sub_exits = [
            (layer_id * len(scales) + pos, layer_id, scale, 0.0)
            for layer_id, _, _ in layers
            for pos, scale in enumerate(scales)
        ]
    document = {
        "name": name,
        "scales": list(scales),
        "layers": [{"id": i, "name": f"L{i}", "latency_ms": lat, "deps": list(deps)} for i, lat, deps in layers],
        "sub_exits": [
            {"id": i, "attach_layer": attach, "scale": scale, "head_latency_ms": head}
            for i, attach, scale, head in sub_exits
        ],
        "exits": [
            {"sub_exits": mapping, "quality": q, "trained": True, **({"head_layer": head} if head is not None else {})}
            for mapping, q, head in exits
        ],
        "default_quality": default_quality,
        "final_quality": max(q for _, q, _ in exits),
    }
    return validate_profile(NetworkProfile.model_validate(document))


def random_profile(rng: np.random.Generator, max_chains: int = 3, max_len: int = 3) -> NetworkProfile:
    """
    Tallo (capa 0), hasta max_chains cadenas de hasta max_len capas colgando
    del tallo y una capa 'detect' que las une y realiza la cabeza de la salida
    final. Las salidas intermedias usan pares distintos de capas de enganche.
    """
    layers = [(0, float(rng.uniform(0.05, 1.0)), ())]
    ends = []
    next_id = 1
    for _ in range(int(rng.integers(1, max_chains + 1))):
        prev = 0
        for _ in range(int(rng.integers(1, max_len + 1))):
            layers.append((next_id, float(rng.uniform(0.05, 1.0)), (prev,)))
            prev = next_id
            next_id += 1
        ends.append(prev)
    detect = next_id
    layers.append((detect, float(rng.uniform(0.05, 1.0)), tuple(ends)))

    scales = ("a", "b")
    heads = {"a": float(rng.uniform(0.0, 0.5)), "b": float(rng.uniform(0.0, 0.5))}
    sub_exits = [
        (layer_id * 2 + pos, layer_id, scale, heads[scale])
        for layer_id, _, _ in layers[:-1]
        for pos, scale in enumerate(scales)
    ]

    final_quality = 50.0
    candidates = [(la, lb) for la in range(detect) for lb in range(detect) if (la, lb) != (0, 0)]
    chosen = rng.choice(len(candidates), size=min(len(candidates), int(rng.integers(1, 7))), replace=False)
    exits = [
        ({"a": candidates[c][0] * 2, "b": candidates[c][1] * 2 + 1}, float(rng.uniform(0.0, final_quality)), None)
        for c in sorted(chosen.tolist())
    ]
    exits.append(({"a": 0, "b": 1}, final_quality, detect))
    return build_profile(
        layers,
        exits,
        scales=scales,
        sub_exits=sub_exits,
        default_quality=float(rng.uniform(0.0, 5.0)),
        name="random",
    )


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def gelan_t():
    return load_fixture("gelan-t")


@pytest.fixture(scope="session")
def gelan_t_transposed():
    return load_fixture("gelan-t-transposed")


@pytest.fixture(scope="session")
def greedy_trap():
    return load_fixture("greedy-trap")


@pytest.fixture
def chain_profile():
    """Cadena 0 -> 1 -> 2 con una salida en la capa 0 y la final en la 2"""
    return build_profile(
        [(0, 1.0, ()), (1, 2.0, (0,)), (2, 3.0, (1,))],
        [({"a": 0, "b": 1}, 10.0, None), ({"a": 4, "b": 5}, 40.0, None)],
    )

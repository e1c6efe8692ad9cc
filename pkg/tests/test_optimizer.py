import itertools

import numpy as np
import pytest

from app.core.errors import ExitGraphError, GreedyDeadEndError, OracleLimitError
from app.schemas.quality import WeightingSpec
from app.services.graph_service import build_execution_graph, build_exit_graph, path_value
from app.services.optimizer_service import (
    bellman_ford_longest,
    brute_force_order,
    count_topological_orders,
    evaluate_order,
    greedy_perf,
    greedy_time,
    longest_path,
    optimal_order,
    select_exits,
)
from app.services.profile_service import exit_key, final_exit, load_fixture, required_layers, usable_exits
from app.services.quality_service import anytime_quality, build_curve, validate_order

from tests.conftest import build_profile, random_profile

UNIFORM = WeightingSpec()


def _one_scale_apart(profile, a, b):
    return sum(x != y for x, y in zip(exit_key(profile, a), exit_key(profile, b))) == 1


def _best_subset_within(profile, k):
    """
    Oráculo independiente del grafo: enumera subconjuntos de como mucho k-1
    salidas intermedias más la final, descarta los que no forman una cadena
    admisible y evalúa cada cadena con la curva de calidad.
    """
    final = final_exit(profile)
    intermedias = [exit for exit in usable_exits(profile) if exit != final]
    requeridas = [required_layers(profile, exit) for exit in intermedias]
    capas_final = required_layers(profile, final)

    def admisible(previa, siguiente):
        if previa is None:
            return siguiente[0].quality >= profile.default_quality
        (a, req_a), (b, req_b) = previa, siguiente
        return _one_scale_apart(profile, a, b) and req_a < req_b and b.quality >= a.quality

    mejor = float("-inf")
    for r in range(0, k):
        for combo in itertools.combinations(range(len(intermedias)), r):
            cadena = sorted(((intermedias[i], requeridas[i]) for i in combo), key=lambda par: len(par[1]))
            if any(not admisible(p, s) for p, s in zip([None] + cadena, cadena)):
                continue
            if cadena and not admisible(cadena[-1], (final, capas_final)):
                continue
            orden, hechas = [], set()
            for _, req in cadena + [(final, capas_final)]:
                orden += sorted(req - hechas)
                hechas |= req
            salidas = [exit for exit, _ in cadena] + [final]
            curva = build_curve(profile, orden, "soft", salidas)
            mejor = max(mejor, anytime_quality(curva, UNIFORM, normalize=False))
    return mejor


@pytest.mark.parametrize("seed", range(200))
def test_dp_matches_brute_force_and_bellman_ford(seed):
    rng = np.random.default_rng(seed)
    profile = random_profile(rng)
    mode = "hard" if seed % 4 == 3 else "soft"
    w = UNIFORM
    if seed % 5 == 1:
        w = WeightingSpec(kind="empirical_samples", samples=tuple(rng.uniform(0.0, 6.0, 15).tolist()))
    graph = build_execution_graph(profile, w, mode)

    plan = optimal_order(graph)
    oraculo = brute_force_order(profile, w, mode=mode)

    assert plan.q_unnormalized == pytest.approx(oraculo.q_unnormalized, rel=1e-12, abs=1e-12)
    assert bellman_ford_longest(graph) == pytest.approx(plan.q_unnormalized, rel=1e-9, abs=1e-9)
    assert evaluate_order(profile, plan.order, w, mode).q_unnormalized == pytest.approx(plan.q_unnormalized, rel=1e-9)


def test_pyramidal_network_has_single_order(gelan_t):
    plan = optimal_order(build_execution_graph(gelan_t, UNIFORM))

    assert plan.order == tuple(range(23))
    assert plan.curve.horizon_ms == pytest.approx(11.35, abs=0.05)
    assert validate_order(gelan_t, plan.order) == plan.order


def test_single_edge_graph():
    profile = build_profile([(0, 2.0, ())], [({"a": 0, "b": 1}, 12.0, None)], default_quality=1.5)
    graph = build_execution_graph(profile, UNIFORM)
    plan = optimal_order(graph)

    assert plan.order == (0,)
    assert plan.q_unnormalized == pytest.approx(graph.edges[0].weight)
    assert plan.q_unnormalized == pytest.approx(3.0)


def test_plan_metrics_agree_with_curve(gelan_t_transposed):
    plan = optimal_order(build_execution_graph(gelan_t_transposed, UNIFORM))

    assert plan.q_normalized == pytest.approx(anytime_quality(plan.curve, UNIFORM), rel=1e-9)
    assert plan.q_unnormalized == pytest.approx(anytime_quality(plan.curve, UNIFORM, normalize=False), rel=1e-9)
    assert plan.exit_labels[-1] == "(15,21,20)"


def test_greedy_trap(greedy_trap):
    exit_graph = build_exit_graph(greedy_trap, UNIFORM)

    optimo = optimal_order(exit_graph)
    tiempo = greedy_time(exit_graph)
    calidad = greedy_perf(exit_graph)

    assert optimo.exit_labels == ("(0,4,2)", "(0,1,2)")
    assert optimo.q_unnormalized == pytest.approx(117.0)
    assert optimo.q_normalized == pytest.approx(23.4)
    assert tiempo.exit_labels == ("(0,1,3)", "(0,1,2)")
    assert tiempo.q_unnormalized == pytest.approx(40.0)
    assert calidad.exit_labels == ("(5,1,2)", "(0,1,2)")
    assert calidad.q_unnormalized == pytest.approx(32.0)


def test_all_exits_beat_exit_subsets(greedy_trap):
    plan = optimal_order(build_execution_graph(greedy_trap, UNIFORM))

    assert plan.order == (0, 1, 2, 3)
    assert plan.q_unnormalized == pytest.approx(119.8)


@pytest.mark.parametrize(
    "fixture",
    ["gelan-t", "gelan-m", "gelan-t-transposed", "gelan-m-transposed", "gelan-t-9", "gelan-t-transposed-9"],
)
def test_optimal_dominates_greedy(fixture):
    exit_graph = build_exit_graph(load_fixture(fixture), UNIFORM)
    optimo = optimal_order(exit_graph).q_unnormalized
    for heuristica in (greedy_time, greedy_perf):
        assert optimo >= heuristica(exit_graph).q_unnormalized - 1e-9


def test_transposed_greedy_gap_is_strict(gelan_t_transposed):
    exit_graph = build_exit_graph(gelan_t_transposed, UNIFORM)
    optimo = optimal_order(exit_graph).q_unnormalized

    assert optimo > greedy_time(exit_graph).q_unnormalized
    assert optimo > greedy_perf(exit_graph).q_unnormalized


def test_chain_of_exits_greedies_match_optimal():
    profile = build_profile(
        [(0, 1.0, ()), (1, 2.0, (0,)), (2, 3.0, (1,))],
        [({"a": 0, "b": 1}, 10.0, None), ({"a": 2, "b": 1}, 20.0, None), ({"a": 4, "b": 1}, 40.0, None)],
    )
    exit_graph = build_exit_graph(profile, UNIFORM)
    optimo = optimal_order(exit_graph)

    for heuristica in (greedy_time, greedy_perf):
        plan = heuristica(exit_graph)
        assert plan.exit_labels == optimo.exit_labels == ("(0,1)", "(2,1)", "(4,1)")
        assert plan.q_unnormalized == pytest.approx(optimo.q_unnormalized)


def test_greedy_dead_end():
    layers = [(0, 1.0, ()), (1, 1.0, (0,)), (2, 1.0, (1,))]
    exits = [({"a": 0, "b": 1}, 10.0, None), ({"a": 2, "b": 1}, 5.0, None), ({"a": 4, "b": 5}, 20.0, None)]
    exit_graph = build_exit_graph(build_profile(layers, exits), UNIFORM)

    # (2,1) empeora la calidad y la salida final difiere de (0,1) en dos escalas
    with pytest.raises(GreedyDeadEndError) as info:
        greedy_time(exit_graph)
    assert info.value.stuck == "(0,1)"


def test_select_exits_k1_is_final_exit_alone(gelan_t):
    plan = select_exits(build_exit_graph(gelan_t, UNIFORM), 1)
    assert plan.exit_labels == ("(15,18,21)",)
    assert plan.q_unnormalized == 0.0


def test_select_exits_all_equals_unrestricted(gelan_t_transposed):
    exit_graph = build_exit_graph(gelan_t_transposed, UNIFORM)
    k = len(exit_graph.nodes) - 1

    assert select_exits(exit_graph, k).q_unnormalized == pytest.approx(optimal_order(exit_graph).q_unnormalized)


@pytest.mark.parametrize("seed", range(100))
def test_select_exits_matches_subset_enumeration(seed):
    profile = random_profile(np.random.default_rng(500 + seed))
    exit_graph = build_exit_graph(profile, UNIFORM)
    for k in range(1, len(exit_graph.nodes)):
        plan = select_exits(exit_graph, k)
        assert plan.q_unnormalized == pytest.approx(_best_subset_within(profile, k), rel=1e-9, abs=1e-9)
        assert len(plan.selected_exits) <= k
        assert plan.selected_exits[-1] == final_exit(profile)


@pytest.mark.parametrize("seed", range(100))
def test_select_exits_non_decreasing_in_k(seed):
    profile = random_profile(np.random.default_rng(700 + seed))
    exit_graph = build_exit_graph(profile, UNIFORM)
    valores = [select_exits(exit_graph, k).q_unnormalized for k in range(1, len(exit_graph.nodes))]

    assert all(b >= a for a, b in zip(valores, valores[1:]))


@pytest.mark.parametrize("fixture", ["gelan-t", "gelan-t-transposed"])
def test_select_exits_non_decreasing_in_k_on_fixtures(fixture):
    exit_graph = build_exit_graph(load_fixture(fixture), UNIFORM)
    valores = [select_exits(exit_graph, k).q_unnormalized for k in range(1, len(exit_graph.nodes))]

    assert all(b >= a for a, b in zip(valores, valores[1:]))
    assert valores[-1] == pytest.approx(optimal_order(exit_graph).q_unnormalized)


def test_select_exits_tie_prefers_fewer_exits():
    # La salida intermedia no aporta calidad: con o sin ella Q = 0
    profile = build_profile(
        [(0, 1.0, ()), (1, 1.0, (0,)), (2, 1.0, (1,))],
        [({"a": 0, "b": 1}, 0.0, None), ({"a": 4, "b": 1}, 9.0, None)],
    )
    plan = select_exits(build_exit_graph(profile, UNIFORM), 2)

    assert plan.exit_labels == ("(4,1)",)
    assert plan.q_unnormalized == 0.0


@pytest.mark.parametrize("seed", range(100))
def test_optimal_order_invariant_under_weight_scaling(seed):
    rng = np.random.default_rng(900 + seed)
    profile = random_profile(rng)
    cortes = np.sort(rng.uniform(0.0, 3.0, 3)).tolist()
    pesos = rng.uniform(0.1, 2.0, 3)
    c = float(rng.uniform(0.5, 10.0))
    w = WeightingSpec(kind="piecewise_constant", breakpoints=tuple(zip(cortes, pesos.tolist())))
    w_c = WeightingSpec(kind="piecewise_constant", breakpoints=tuple(zip(cortes, (c * pesos).tolist())))

    plan = optimal_order(build_execution_graph(profile, w))
    escalado = optimal_order(build_execution_graph(profile, w_c))

    assert escalado.q_unnormalized == pytest.approx(c * plan.q_unnormalized, rel=1e-9, abs=1e-9)
    # El orden óptimo para w sigue siendo óptimo para c·w
    assert evaluate_order(profile, plan.order, w_c).q_unnormalized == pytest.approx(
        escalado.q_unnormalized, rel=1e-9, abs=1e-9
    )


def test_select_exits_on_greedy_trap(greedy_trap):
    exit_graph = build_exit_graph(greedy_trap, UNIFORM)

    assert select_exits(exit_graph, 2).q_unnormalized == pytest.approx(117.0)
    assert select_exits(exit_graph, 3).exit_labels == ("(0,4,2)", "(0,1,2)")


def test_select_exits_rejects_bad_k(greedy_trap):
    exit_graph = build_exit_graph(greedy_trap, UNIFORM)
    with pytest.raises(ExitGraphError):
        select_exits(exit_graph, 0)
    with pytest.raises(ExitGraphError):
        select_exits(exit_graph, len(exit_graph.nodes))


def test_longest_path_value_matches_edges(gelan_t_transposed):
    graph = build_execution_graph(gelan_t_transposed, UNIFORM)
    valor, camino = longest_path(graph)
    assert valor == path_value(graph, camino)


def test_count_topological_orders_small_cases(chain_profile):
    assert count_topological_orders(chain_profile) == 1

    layers = [(0, 1.0, ()), (1, 1.0, (0,)), (2, 1.0, ()), (3, 1.0, (2,))]
    profile = build_profile(layers, [({"a": 2, "b": 7}, 10.0, None)])
    assert count_topological_orders(profile) == 6


def test_brute_force_limit(gelan_t_transposed):
    with pytest.raises(OracleLimitError) as info:
        brute_force_order(gelan_t_transposed, UNIFORM, limit=100)
    assert info.value.count > 100

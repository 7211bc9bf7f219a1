import math

import numpy as np
import pytest

from srpc import (CandidateSet, SolverConfig, batched_inner_products,
                  batched_membership_degrees, candidate_set, from_edge_list,
                  generate, p_biased_rescale, refine, solve,
                  strategy_clique_union, strategy_erdos_renyi, threshold_for,
                  verify_clique)
from srpc import linalg
from srpc.errors import ParameterError
from tests.test_graphs import random_graph


def complete_graph(n):
    return from_edge_list(n, [(i, j) for i in range(n) for j in range(i + 1, n)])


def test_threshold_values():
    assert threshold_for(100, 0.5) == 50.0
    assert threshold_for(100, 4 / 5) == 3.125
    assert threshold_for(100, 1 / 5) == 800.0
    with pytest.raises(ParameterError):
        threshold_for(0, 0.5)
    with pytest.raises(ParameterError):
        threshold_for(10, 1.0)


def test_candidate_set_complete_graph():
    g = complete_graph(9)
    cand = candidate_set(g, [(0, 3, 5)], tau=threshold_for(4, 0.5))
    assert cand.members == tuple(range(9))
    assert cand.stage == "raw"


def test_candidate_set_empty_graph_oracle():
    # brute-force oracle: all inner products of the row product on the empty
    # graph, frozen alongside a direct recomputation
    g = from_edge_list(6, [])
    alpha = (0, 1, 2)
    row = np.prod(g.signs[list(alpha)].astype(np.int64), axis=0)
    direct = {j for j in range(6) if int(row @ g.signs[j].astype(np.int64)) >= 2}
    assert direct == {0, 1, 2}  # computed by hand: products are +-2
    cand = candidate_set(g, [alpha], tau=2)
    assert set(cand.members) == direct


def test_candidate_set_contains_planted_for_planted_alpha():
    # conditioning the sampled triple inside the planted set captures S*
    hits = 0
    for seed in range(20):
        inst = generate(300, 120, 0.5, strategy_erdos_renyi(), seed=seed)
        alpha = inst.planted[:3]
        cand = candidate_set(inst.graph, [alpha], threshold_for(inst.k, 0.5))
        if set(inst.planted) <= set(cand.members):
            hits += 1
    assert hits >= 19


def test_candidate_completeness_matches_realized_inner_products():
    # S* is captured exactly when every out-block inner product clears the
    # margin; both sides computed directly on the instance
    inst = generate(200, 60, 0.5, strategy_erdos_renyi(), seed=5)
    planted = list(inst.planted)
    rest = np.setdiff1d(np.arange(200), planted)
    alpha = planted[:3]
    tau = threshold_for(60, 0.5)
    out = inst.graph.signs[:, rest].astype(np.int64)
    row_out = np.prod(out[alpha], axis=0)
    cand = candidate_set(inst.graph, [alpha], tau)
    captured = set(inst.planted) <= set(cand.members)
    worst = min(int(row_out @ out[j]) for j in planted)
    assert captured == (60 + worst >= tau)


def test_monotone_in_tau():
    g = random_graph(40, 3)
    sizes = []
    for tau in (1, 5, 10, 20, 40):
        sizes.append(len(candidate_set(g, [(0, 1)], tau).members))
    assert sizes == sorted(sizes, reverse=True)


def test_refine_keeps_exact_clique():
    g = complete_graph(6)
    cand = CandidateSet(((0, 1, 2),), tuple(range(6)), "raw")
    refined = refine(g, cand, 6)
    assert refined.members == tuple(range(6))
    assert refined.stage == "refined"


def test_refine_drops_isolated_vertex():
    k = 5
    g = from_edge_list(6, [(i, j) for i in range(5) for j in range(i + 1, 5)])
    cand = CandidateSet(((0, 1, 2),), tuple(range(6)), "raw")
    refined = refine(g, cand, k)
    assert refined.members == tuple(range(5))


def test_refine_single_pass_against_original_members():
    # one sweep: degrees are counted against the incoming member set
    edges = [(0, 1), (1, 2), (0, 2), (2, 3)]
    g = from_edge_list(5, edges)
    cand = CandidateSet(((0,),), (0, 1, 2, 3), "raw")
    refined = refine(g, cand, 3)
    # degree-in-set: 0->2, 1->2, 2->3, 3->1; threshold k-1 = 2 removes only 3
    assert refined.members == (0, 1, 2)
    fixpoint = refine(g, cand, 3, iterate=True)
    assert fixpoint.members == (0, 1, 2)  # already stable after one sweep


def test_refine_never_removes_planted_with_small_contamination():
    inst = generate(240, 80, 0.5, strategy_erdos_renyi(), seed=6)
    planted = set(inst.planted)
    extras = [v for v in range(240) if v not in planted][:5]
    members = tuple(sorted(planted | set(extras)))
    cand = CandidateSet(((0, 1, 2),), members, "raw")
    refined = refine(inst.graph, cand, 80)
    assert planted <= set(refined.members)
    # spurious vertices with under-threshold degree are gone
    adj = inst.graph.adjacency01(np.int64)
    for j in extras:
        degree = sum(adj[j, v] for v in members)
        if degree < 79:
            assert j not in refined.members


def test_verify_accepts_planted_and_rejects_near_clique():
    inst = generate(60, 12, 0.5, strategy_erdos_renyi(), seed=7)
    cand = CandidateSet(((0, 1, 2),), inst.planted, "refined")
    accepted = verify_clique(inst.graph, cand, 12)
    assert accepted is not None and accepted.stage == "verified-clique"

    # complete graph minus one edge fails
    edges = [(i, j) for i in range(12) for j in range(i + 1, 12) if (i, j) != (3, 7)]
    g = from_edge_list(12, edges)
    cand = CandidateSet(((0,),), tuple(range(12)), "refined")
    assert verify_clique(g, cand, 12) is None


def test_batched_inner_products_matches_triple_loop():
    rng = np.random.default_rng(9)
    g = random_graph(64, 10)
    alphas = [tuple(sorted(rng.choice(64, size=3, replace=False))) for _ in range(128)]
    table = batched_inner_products(g, alphas)
    signs = g.signs.astype(np.int64)
    for a, alpha in enumerate(alphas):
        row = signs[alpha[0]] * signs[alpha[1]] * signs[alpha[2]]
        for j in range(0, 64, 5):
            direct = sum(int(row[u]) * int(signs[j][u]) for u in range(64))
            assert table[a, j] == direct


def test_batched_inner_products_single_alpha_matches_candidate_path():
    g = random_graph(50, 11)
    table = batched_inner_products(g, [(2, 9)])
    cand = candidate_set(g, [(2, 9)], tau=4)
    assert set(cand.members) == set(np.nonzero(table[0] >= 4)[0])


def test_batched_inner_products_complete_graph():
    g = complete_graph(17)
    table = batched_inner_products(g, [(0, 1, 2), (3, 4)])
    assert np.all(table == 17)


def test_batched_inner_products_float_path_close_to_direct():
    g = random_graph(48, 12)
    m = p_biased_rescale(g, 0.3)
    alphas = [(0, 1, 2), (5, 9), (17,)]
    table = batched_inner_products(m, alphas)
    for a, alpha in enumerate(alphas):
        row = np.prod(m.values[list(alpha)], axis=0)
        direct = row @ m.values.T
        assert np.allclose(table[a], direct, rtol=1e-9, atol=1e-9)


def test_batched_membership_degrees_cases():
    g = complete_graph(8)
    table = batched_membership_degrees(g, [(), tuple(range(8))])
    assert np.all(table[0] == 0)
    assert np.all(table[1] == 7)  # self excluded from its own neighborhood

    rg = random_graph(64, 13)
    rng = np.random.default_rng(1)
    sets = [tuple(sorted(rng.choice(64, size=int(rng.integers(1, 20)),
                                    replace=False))) for _ in range(10)]
    table = batched_membership_degrees(rg, sets)
    adj = rg.adjacency01(np.int64)
    for a, members in enumerate(sets):
        for j in range(64):
            direct = sum(int(adj[j, v]) for v in members)
            assert table[a, j] == direct


def test_solve_complete_graph_returns_single_clique():
    g = complete_graph(12)
    result = solve(g, 12, 0.5, SolverConfig(seed=1))
    assert len(result.entries) == 1
    assert result.entries[0].vertices == tuple(range(12))


def test_solve_single_vertex_graph():
    g = from_edge_list(1, [])
    result = solve(g, 1, 0.5, SolverConfig(order=1, seed=0))
    assert [e.vertices for e in result.entries] == [(0,)]


def test_solve_deterministic_given_seed():
    inst = generate(200, 70, 0.5, strategy_erdos_renyi(), seed=14)
    a = solve(inst.graph, 70, 0.5, SolverConfig(seed=5))
    b = solve(inst.graph, 70, 0.5, SolverConfig(seed=5))
    assert [e.vertices for e in a.entries] == [e.vertices for e in b.entries]
    assert a.stats["rounds_nonempty"] == b.stats["rounds_nonempty"]


def test_solve_output_passes_independent_clique_recheck():
    inst = generate(200, 70, 0.5, strategy_erdos_renyi(), seed=15)
    result = solve(inst.graph, 70, 0.5, SolverConfig(seed=6))
    for entry in result.entries:
        sub = inst.graph.signs[np.ix_(entry.vertices, entry.vertices)]
        assert np.all(sub == 1)
        assert len(entry.vertices) >= 70


def test_solve_recovers_planted_er_instance():
    inst = generate(500, 8 * math.ceil(math.sqrt(500)), 0.5,
                    strategy_erdos_renyi(), seed=16)
    result = solve(inst.graph, inst.k, 0.5, SolverConfig(seed=7))
    assert tuple(sorted(inst.planted)) in [e.vertices for e in result.entries]


def test_solve_empty_output_on_hopeless_instance():
    # k far above any clique the graph contains: no rounds survive
    g = random_graph(60, 17)
    result = solve(g, 30, 0.5, SolverConfig(seed=8, rounds=50))
    assert result.entries == []


def test_solve_recovers_all_clique_union_decoys():
    inst = generate(400, 100, 0.5, strategy_clique_union(), seed=18)
    result = solve(inst.graph, 100, 0.5, SolverConfig(seed=9))
    found = {e.vertices for e in result.entries}
    assert tuple(sorted(inst.planted)) in found
    for decoy in inst.details["decoy_cliques"]:
        if len(decoy) == 100:
            assert tuple(sorted(decoy)) in found
    assert len(result.entries) == 400 // 100


def test_solve_order_one_and_reps():
    inst = generate(300, 8 * math.ceil(math.sqrt(300)), 0.5,
                    strategy_erdos_renyi(), seed=19)
    for cfg in (SolverConfig(order=1, seed=10), SolverConfig(order=2, seed=11),
                SolverConfig(order=2, reps=2, seed=12)):
        result = solve(inst.graph, inst.k, 0.5, cfg)
        assert tuple(sorted(inst.planted)) in [e.vertices for e in result.entries]


def test_solve_general_p_paths():
    for p in (0.3, 0.7):
        k = math.ceil(8 * math.ceil(math.sqrt(300)) * max(1.0, (p / (1 - p)) ** 2))
        k = min(k, 290)
        inst = generate(300, k, p, strategy_erdos_renyi(), seed=20)
        result = solve(inst.graph, k, p, SolverConfig(seed=13))
        assert tuple(sorted(inst.planted)) in [e.vertices for e in result.entries]


def test_solve_round_count_and_oracle_batches():
    inst = generate(128, 64, 0.5, strategy_erdos_renyi(), seed=21)
    cfg = SolverConfig(order=3, reps=1, c_rounds=10.0, seed=14)
    result = solve(inst.graph, 64, 0.5, cfg)
    rounds = result.stats["rounds"]
    assert rounds == math.ceil(10.0 * (128 / 64) ** 3)
    assert result.stats["oracle_calls"]["candidate"] == math.ceil(rounds / 128)


def test_solver_config_validation():
    with pytest.raises(ParameterError):
        SolverConfig(order=4)
    with pytest.raises(ParameterError):
        SolverConfig(reps=0)
    with pytest.raises(ParameterError):
        SolverConfig(rounds=0)
    with pytest.raises(ParameterError):
        SolverConfig(threshold=-1.0)


def test_stage_validation():
    g = complete_graph(4)
    refined = CandidateSet(((0,),), (0, 1, 2, 3), "refined")
    with pytest.raises(ParameterError):
        refine(g, refined, 3)
    raw = CandidateSet(((0,),), (0, 1, 2, 3), "raw")
    with pytest.raises(ParameterError):
        verify_clique(g, raw, 3)

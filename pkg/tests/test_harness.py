import math

import numpy as np
import pytest

from srpc import CliqueEntry, CliqueList, SolverConfig, generate, solve
from srpc import strategy_clique_union, strategy_erdos_renyi
from srpc.errors import ParameterError
from srpc.harness import (ExperimentGrid, adversary_demo, evaluate, grid_csv,
                          resolve_k_rule, run_grid)


def solved_instance(n=200, k=70, p=0.5, seed=30):
    inst = generate(n, k, p, strategy_erdos_renyi(), seed=seed)
    result = solve(inst.graph, k, p, SolverConfig(seed=seed + 1))
    return inst, result


def test_evaluate_recovered():
    inst, result = solved_instance()
    ev = evaluate(inst, result)
    assert ev.recovered
    assert ev.entries_matching_planted == 1
    assert ev.list_size == len(result.entries)
    assert ev.all_entries_valid_cliques
    assert ev.stage_counts["rounds"] == result.stats["rounds"]


def test_evaluate_empty_list():
    inst, result = solved_instance()
    ev = evaluate(inst, CliqueList([], dict(result.stats)))
    assert not ev.recovered and ev.list_size == 0


def test_evaluate_spurious_replay_matches_planted_alpha_measurement():
    # the replayed max |S_alpha \ S*| must dominate what any single planted
    # alpha admits, and equal a direct recomputation
    inst, result = solved_instance(seed=31)
    ev = evaluate(inst, result)
    from srpc.solver import iter_round_members
    cfg = SolverConfig.from_dict(result.stats["config"])
    planted = set(inst.planted)
    direct = 0
    for _, _, members in iter_round_members(inst.graph, inst.k, inst.p, cfg):
        direct = max(direct, len(set(members.tolist()) - planted))
    assert ev.max_spurious == direct


def test_evaluate_clique_union_flags_indistinguishable_decoys():
    inst = generate(400, 100, 0.5, strategy_clique_union(), seed=32)
    result = solve(inst.graph, 100, 0.5, SolverConfig(seed=33))
    ev = evaluate(inst, result)
    assert ev.recovered
    assert ev.list_size == 400 // 100  # every decoy clique is a valid answer
    assert ev.entries_matching_planted == 1
    assert ev.all_entries_valid_cliques


def test_resolve_k_rule():
    assert resolve_k_rule("360", 2000) == 360
    assert resolve_k_rule("8*ceilsqrt", 2000) == 8 * math.ceil(math.sqrt(2000))
    assert resolve_k_rule("2*sqrt", 400) == 40
    expected = math.ceil(0.5 * math.sqrt(400) * math.log(400) ** 2)
    assert resolve_k_rule("0.5*sqrt*log^2", 400) == expected
    with pytest.raises(ParameterError):
        resolve_k_rule("sqrt(n)", 100)


def test_grid_single_cell_complete_recovery():
    grid = ExperimentGrid(ns=(30,), k_rules=("30",), ps=(0.5,),
                          solvers=(SolverConfig(),),
                          adversaries=(("erdos_renyi", {}),),
                          trials=3, seed=1)
    rows = run_grid(grid)
    assert len(rows) == 1
    assert rows[0]["success_rate"] == 1.0  # n = k: the whole graph is the clique


def test_grid_reruns_are_byte_identical_and_thread_invariant():
    grid = ExperimentGrid(ns=(120,), k_rules=("40",), ps=(0.5,),
                          solvers=(SolverConfig(),),
                          adversaries=(("erdos_renyi", {}),),
                          trials=4, seed=2)
    a = grid_csv(run_grid(grid, threads=1))
    b = grid_csv(run_grid(grid, threads=1))
    c = grid_csv(run_grid(grid, threads=4))
    assert a == b == c


def test_grid_success_monotone_in_k():
    # success rate cannot drop as the planted clique grows
    grid = ExperimentGrid(ns=(512,), k_rules=("2*ceilsqrt", "4*ceilsqrt", "8*ceilsqrt"),
                          ps=(0.5,), solvers=(SolverConfig(),),
                          adversaries=(("erdos_renyi", {}),), trials=10, seed=3)
    rows = run_grid(grid)
    rates = [row["success_rate"] for row in rows]
    assert rates == sorted(rates)
    assert rates[-1] >= 0.9


def test_grid_from_dict_and_cells():
    grid = ExperimentGrid.from_dict({
        "ns": [100, 200], "k_rules": ["20", "4*ceilsqrt"], "ps": [0.5, 0.3],
        "solvers": [{"order": 3}], "adversaries": [{"name": "erdos_renyi"}],
        "trials": 2, "seed": 9})
    cells = grid.cells()
    assert len(cells) == 8
    assert {c["k"] for c in cells if c["n"] == 100 and c["k_rule"] == "4*ceilsqrt"} == {40}


def test_adversary_demo_m1_min_correlation_is_n():
    report = adversary_demo(n=64, k=16, m=1, seed=4, c_rounds=4.0)
    assert report["min_correlation"] == 64  # w equals the single vector
    assert report["order1_chosen_total"] == 1


def test_adversary_demo_contamination_and_separation():
    # order 1 admits decoys into most chosen vertices' candidate sets while
    # order 3 still recovers the planted set
    report = adversary_demo(n=400, k=80, m=21, seed=5)
    assert report["order1_any_chosen_contaminated"]
    assert report["order1_chosen_contaminated"] >= report["order1_chosen_total"] // 2
    assert report["order3_recovered"]
    assert report["fitted_constant_mean"] > 0.5


def test_adversary_demo_validation():
    with pytest.raises(ParameterError):
        adversary_demo(n=64, k=16, m=2, seed=0)
    with pytest.raises(ParameterError):
        adversary_demo(n=64, k=3, m=5, seed=0)

"""End-to-end experiment driving: generate -> solve -> evaluate.

Evaluation owns the hidden planted set; the solver never sees it.  The
spurious-membership statistic is recomputed by replaying the solver's
round sampling (a pure function of the echoed config) against the
instance, so the solver output document stays small and planted-free.
"""

from __future__ import annotations

import csv
import io
import json
import math
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import linalg, solver
from .cliquelist import CliqueList
from .errors import ParameterError
from .instances import (Instance, generate, majority_vector, strategy_by_name,
                        strategy_majority_adversary)


@dataclass(frozen=True)
class EvalResult:
    recovered: bool
    list_size: int
    stage_counts: dict
    max_spurious: int
    entries_matching_planted: int
    all_entries_valid_cliques: bool
    oracle_calls: dict
    wall_times: dict

    def to_dict(self) -> dict:
        return {"recovered": self.recovered, "list_size": self.list_size,
                "stage_counts": self.stage_counts,
                "max_spurious": self.max_spurious,
                "entries_matching_planted": self.entries_matching_planted,
                "all_entries_valid_cliques": self.all_entries_valid_cliques,
                "oracle_calls": self.oracle_calls}


def max_spurious_members(instance: Instance, cfg: solver.SolverConfig) -> int:
    """max over rounds of |S_alpha \\ S*|, replayed from the solve config."""
    planted = np.zeros(instance.n, dtype=bool)
    planted[list(instance.planted)] = True
    worst = 0
    for _, _, members in solver.iter_round_members(instance.graph, instance.k,
                                                   instance.p, cfg):
        if members.size:
            worst = max(worst, int((~planted[members]).sum()))
    return worst


def evaluate(instance: Instance, clique_list: CliqueList,
             compute_spurious: bool = True) -> EvalResult:
    """Score a solve output against the instance's hidden planted set."""
    planted = tuple(sorted(instance.planted))
    matching = sum(1 for e in clique_list.entries if e.vertices == planted)
    valid = True
    for entry in clique_list.entries:
        sub = instance.graph.signs[np.ix_(entry.vertices, entry.vertices)]
        if len(entry.vertices) < instance.k or not np.all(sub == 1):
            valid = False
    stats = clique_list.stats
    stage_counts = {key: stats.get(key) for key in
                    ("rounds", "rounds_nonempty", "rounds_short_skipped",
                     "distinct_raw", "distinct_refined", "rounds_accepted",
                     "accepted_distinct", "pruned_size")}
    spurious = 0
    if compute_spurious and "config" in stats:
        spurious = max_spurious_members(
            instance, solver.SolverConfig.from_dict(stats["config"]))
    return EvalResult(recovered=matching > 0, list_size=len(clique_list.entries),
                      stage_counts=stage_counts, max_spurious=spurious,
                      entries_matching_planted=matching,
                      all_entries_valid_cliques=valid,
                      oracle_calls=dict(stats.get("oracle_calls", {})),
                      wall_times=dict(stats.get("wall_times", {})))


_K_RULE_RE = re.compile(
    r"^(?P<c>\d+(?:\.\d+)?)\*(?P<kind>sqrt|ceilsqrt)(?:\*log\^(?P<e>\d+))?$")


def resolve_k_rule(rule: str, n: int) -> int:
    """k from a rule: '360' (absolute), '8*ceilsqrt', or 'c*sqrt[*log^e]'."""
    rule = rule.strip()
    if rule.isdigit():
        return int(rule)
    m = _K_RULE_RE.match(rule)
    if m is None:
        raise ParameterError(f"unrecognized k rule {rule!r}")
    c = float(m.group("c"))
    root = math.ceil(math.sqrt(n)) if m.group("kind") == "ceilsqrt" else math.sqrt(n)
    k = c * root * (math.log(n) ** int(m.group("e") or 0))
    return max(1, min(n, math.ceil(k)))


@dataclass(frozen=True)
class ExperimentGrid:
    ns: tuple[int, ...]
    k_rules: tuple[str, ...]
    ps: tuple[float, ...]
    solvers: tuple[solver.SolverConfig, ...]
    adversaries: tuple[tuple[str, dict], ...]  # (name, params)
    trials: int = 20
    seed: int = 0

    @classmethod
    def from_dict(cls, doc: dict) -> "ExperimentGrid":
        solvers = tuple(
            solver.SolverConfig(order=s.get("order", 3), reps=s.get("reps", 1),
                                c_rounds=s.get("c_rounds", 10.0),
                                backend=linalg.parse_backend(s.get("backend", "naive")))
            for s in doc.get("solvers", [{}]))
        adversaries = tuple(
            (a["name"], {k: v for k, v in a.items() if k != "name"})
            for a in doc.get("adversaries", [{"name": "erdos_renyi"}]))
        return cls(ns=tuple(doc["ns"]), k_rules=tuple(str(r) for r in doc["k_rules"]),
                   ps=tuple(doc.get("ps", [0.5])), solvers=solvers,
                   adversaries=adversaries, trials=doc.get("trials", 20),
                   seed=doc.get("seed", 0))

    def cells(self) -> list[dict]:
        out = []
        for n in self.ns:
            for rule in self.k_rules:
                for p in self.ps:
                    for cfg in self.solvers:
                        for name, params in self.adversaries:
                            out.append({"n": n, "k_rule": rule,
                                        "k": resolve_k_rule(rule, n), "p": p,
                                        "solver": cfg, "adversary": name,
                                        "adversary_params": params})
        return out


def _trial_seed(root: int, cell_index: int, trial: int) -> int:
    ss = np.random.SeedSequence(root, spawn_key=(cell_index, trial))
    return int(ss.generate_state(1)[0])


def _run_trial(cell: dict, root_seed: int, cell_index: int, trial: int) -> EvalResult:
    seed = _trial_seed(root_seed, cell_index, trial)
    strategy = strategy_by_name(cell["adversary"], **cell["adversary_params"])
    inst = generate(cell["n"], cell["k"], cell["p"], strategy, seed)
    cfg_doc = cell["solver"].to_dict()
    cfg_doc["seed"] = seed + 1
    cfg = solver.SolverConfig.from_dict(cfg_doc)
    result = solver.solve(inst.graph, cell["k"], cell["p"], cfg)
    return evaluate(inst, result)


GRID_COLUMNS = ["cell", "n", "k_rule", "k", "p", "adversary", "order", "reps",
                "trials", "successes", "success_rate", "mean_list_size",
                "mean_max_spurious", "mean_oracle_calls"]


def run_grid(grid: ExperimentGrid, threads: int = 1) -> list[dict]:
    """One row per cell; trials are independent and individually seeded.

    A trial that raises is recorded as a failure for that cell rather than
    aborting the grid.
    """
    cells = grid.cells()
    rows = []
    for index, cell in enumerate(cells):
        results: list[EvalResult | None] = [None] * grid.trials
        if threads > 1:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                futures = [pool.submit(_run_trial, cell, grid.seed, index, t)
                           for t in range(grid.trials)]
                for t, fut in enumerate(futures):
                    try:
                        results[t] = fut.result()
                    except Exception:
                        results[t] = None
        else:
            for t in range(grid.trials):
                try:
                    results[t] = _run_trial(cell, grid.seed, index, t)
                except Exception:
                    results[t] = None
        done = [r for r in results if r is not None]
        successes = sum(1 for r in done if r.recovered)

        def mean(vals):
            return sum(vals) / len(vals) if vals else 0.0

        rows.append({
            "cell": index, "n": cell["n"], "k_rule": cell["k_rule"],
            "k": cell["k"], "p": cell["p"], "adversary": cell["adversary"],
            "order": cell["solver"].order, "reps": cell["solver"].reps,
            "trials": grid.trials, "successes": successes,
            "success_rate": successes / grid.trials,
            "mean_list_size": mean([r.list_size for r in done]),
            "mean_max_spurious": mean([r.max_spurious for r in done]),
            "mean_oracle_calls": mean([sum(r.oracle_calls.values()) for r in done]),
        })
    return rows


def grid_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(GRID_COLUMNS)
    for row in rows:
        writer.writerow([repr(row[c]) if isinstance(row[c], float) else row[c]
                         for c in GRID_COLUMNS])
    return buf.getvalue()


def adversary_demo(n: int, k: int, m: int, seed: int, p: float = 0.5,
                   c_rounds: float = 10.0) -> dict:
    """Majority-adversary study: correlation constants plus paired solver runs.

    The correlation half follows the abstract construction (m random sign
    vectors of length n, w their coordinate-wise majority); the instance
    half builds the actual adversarial graph, runs order 3 end to end, and
    checks each chosen planted vertex's raw order-1 candidate set for
    decoy contamination.
    """
    if m % 2 == 0 or m < 1:
        raise ParameterError(f"m must be odd and positive, got {m}")
    if m > k:
        raise ParameterError(f"m={m} exceeds k={k}")

    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(1000,)))
    vectors = rng.choice(np.array([-1, 1], dtype=np.int64), size=(m, n))
    w = majority_vector(vectors)
    corrs = vectors @ w.astype(np.int64)
    scale = n / math.sqrt(m)
    min_corr = int(corrs.min())

    inst = generate(n, k, p, strategy_majority_adversary(m), seed)
    decoys = set(inst.details.get("decoys", []))
    chosen = inst.details.get("chosen", [])
    tau = solver.threshold_for(k, p)

    contaminated = []
    table = solver.batched_inner_products(
        inst.graph, [(i,) for i in chosen])
    for row, i in zip(table, chosen):
        members = set(np.nonzero(row >= tau)[0].tolist())
        hit = sorted(members & decoys)
        contaminated.append({"vertex": int(i), "decoys_admitted": len(hit)})
    order1_contaminated = sum(1 for c in contaminated if c["decoys_admitted"] > 0)

    cfg = solver.SolverConfig(order=3, reps=1, c_rounds=c_rounds, seed=seed + 1)
    result = solver.solve(inst.graph, k, p, cfg)
    planted = tuple(sorted(inst.planted))
    recovered = any(e.vertices == planted for e in result.entries)

    return {
        "n": n, "k": k, "m": m, "p": p, "seed": seed,
        "min_correlation": min_corr,
        "mean_correlation": float(corrs.mean()),
        "fitted_constant_min": min_corr / scale,
        "fitted_constant_mean": float(corrs.mean()) / scale,
        "order3_recovered": recovered,
        "order3_list_size": len(result.entries),
        "order1_chosen_contaminated": order1_contaminated,
        "order1_chosen_total": len(chosen),
        "order1_all_chosen_contaminated": order1_contaminated == len(chosen),
        "order1_any_chosen_contaminated": order1_contaminated > 0,
        "per_vertex": contaminated,
    }


def report_json(doc) -> str:
    """Canonical JSON used for every emitted document (byte-reproducible)."""
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"

"""Instance generation for the semirandom planted-clique model.

Generation is a pure function of (n, k, p, strategy, seed).  One root seed
is split into three labeled substreams -- planted-set choice, cut edges,
adversary -- so the edges inside the planted set and across its cut are
identical for every adversary run from the same seed.

An adversary sees the realized cut rows (it is adaptive) but only ever
writes the block outside the planted set.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InputError, ParameterError
from .graphs import GRAPH_HEADER, SignedAdjacency, read_graph, write_graph

INSTANCE_HEADER = "srpc-instance v1"

# Substream labels under the root seed; order is part of the on-disk contract.
_STREAM_PLANTED, _STREAM_CUT, _STREAM_ADVERSARY = 0, 1, 2


def _substream(seed: int, label: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(label,)))


def majority_vector(rows) -> np.ndarray:
    """Coordinate-wise majority sign of an odd number of +-1 vectors."""
    arr = np.atleast_2d(np.asarray(rows, dtype=np.int64))
    if arr.shape[0] % 2 == 0:
        raise ParameterError(f"majority needs an odd number of rows, got {arr.shape[0]}")
    if not np.all(np.abs(arr) == 1):
        raise InputError("majority rows must be +-1 vectors")
    return np.where(arr.sum(axis=0) > 0, 1, -1).astype(np.int8)


class AdversaryStrategy:
    """Fills the induced +-1 block on the non-planted vertices.

    ``fill`` receives the realized cut rows (planted x complement, in sorted
    vertex order) and must return a symmetric +-1 block with +1 diagonal for
    the complement, plus a detail dict for evaluation-side bookkeeping.
    """

    name = "base"

    def params(self) -> dict:
        return {}

    def fill(self, rng: np.random.Generator, n: int, k: int, p: float,
             cut_block: np.ndarray) -> tuple[np.ndarray, dict]:
        raise NotImplementedError


def _iid_block(rng: np.random.Generator, size: int, p: float) -> np.ndarray:
    """Symmetric +-1 block with i.i.d. upper-triangle edges and +1 diagonal."""
    block = np.ones((size, size), dtype=np.int8)
    if size > 1:
        iu = np.triu_indices(size, 1)
        edges = rng.random(len(iu[0])) < p
        vals = np.where(edges, 1, -1).astype(np.int8)
        block[iu] = vals
        block[(iu[1], iu[0])] = vals
    return block


class ErdosRenyiStrategy(AdversaryStrategy):
    name = "erdos_renyi"

    def fill(self, rng, n, k, p, cut_block):
        return _iid_block(rng, n - k, p), {}


class CliqueUnionStrategy(AdversaryStrategy):
    """Disjoint decoy cliques of size k on the complement, remainder smaller."""

    name = "clique_union"

    def fill(self, rng, n, k, p, cut_block):
        size = n - k
        block = _iid_block(rng, size, p)
        cliques = []
        for start in range(0, size, k):
            stop = min(start + k, size)
            block[start:stop, start:stop] = 1
            cliques.append((start, stop))
        return block, {"decoy_cliques": cliques}


class MajorityAdversaryStrategy(AdversaryStrategy):
    """Correlates decoy rows with m planted rows via their majority vector.

    Reads the realized cut rows of m planted vertices, takes the
    coordinate-wise majority w, and writes w as the row of each decoy
    toward the non-planted non-decoy vertices.  Edges among decoys and all
    other complement pairs stay i.i.d. with probability p.
    """

    name = "majority"

    def __init__(self, m: int, decoy_count: int | None = None):
        if m % 2 == 0:
            raise ParameterError(f"m must be odd, got {m}")
        if m < 1:
            raise ParameterError("m must be >= 1")
        self.m = m
        self.decoy_count = decoy_count

    def params(self) -> dict:
        return {"m": self.m, "decoy_count": self.decoy_count}

    def fill(self, rng, n, k, p, cut_block):
        if self.m > k:
            raise ParameterError(f"m={self.m} exceeds clique size k={k}")
        size = n - k
        block = _iid_block(rng, size, p)
        decoys = self.decoy_count if self.decoy_count is not None else math.ceil(n / k)
        decoys = min(decoys, size)
        chosen = np.sort(rng.choice(k, size=self.m, replace=False))
        decoy_idx = np.sort(rng.choice(size, size=decoys, replace=False)) if decoys else \
            np.empty(0, dtype=np.int64)
        if size and decoys:
            w = majority_vector(cut_block[chosen])
            others = np.setdiff1d(np.arange(size), decoy_idx)
            for d in decoy_idx:
                block[d, others] = w[others]
                block[others, d] = w[others]
        return block, {"chosen_planted_positions": chosen.tolist(),
                       "decoy_positions": decoy_idx.tolist()}


def strategy_erdos_renyi() -> AdversaryStrategy:
    return ErdosRenyiStrategy()


def strategy_clique_union() -> AdversaryStrategy:
    return CliqueUnionStrategy()


def strategy_majority_adversary(m: int, decoy_count: int | None = None) -> AdversaryStrategy:
    return MajorityAdversaryStrategy(m, decoy_count=decoy_count)


_STRATEGIES = {
    "erdos_renyi": ErdosRenyiStrategy,
    "clique_union": CliqueUnionStrategy,
    "majority": MajorityAdversaryStrategy,
}


def strategy_by_name(name: str, **params) -> AdversaryStrategy:
    try:
        cls = _STRATEGIES[name]
    except KeyError:
        raise ParameterError(f"unknown adversary strategy {name!r}") from None
    return cls(**params)


@dataclass(frozen=True)
class Instance:
    """Generated graph plus its (evaluation-only) hidden planted set."""

    graph: SignedAdjacency
    n: int
    k: int
    p: float
    planted: tuple[int, ...]
    adversary: str
    adversary_params: dict = field(default_factory=dict)
    seed: int = 0
    details: dict = field(default_factory=dict)

    def __post_init__(self):
        sub = self.graph.signs[np.ix_(self.planted, self.planted)]
        if not np.all(sub == 1):
            raise InputError("planted set does not induce a complete subgraph")


def generate(n: int, k: int, p: float, strategy: AdversaryStrategy,
             seed: int) -> Instance:
    """Draw an instance: plant a clique, randomize the cut, let the adversary fill the rest."""
    if not 1 <= k <= n:
        raise ParameterError(f"need 1 <= k <= n, got k={k}, n={n}")
    if not 0.0 < p < 1.0:
        raise ParameterError(f"p must lie in (0,1), got {p}")

    planted = np.sort(_substream(seed, _STREAM_PLANTED).choice(n, size=k, replace=False))
    complement = np.setdiff1d(np.arange(n), planted)

    cut_edges = _substream(seed, _STREAM_CUT).random((k, n - k)) < p
    cut_block = np.where(cut_edges, 1, -1).astype(np.int8)

    outside, details = strategy.fill(_substream(seed, _STREAM_ADVERSARY),
                                     n, k, p, cut_block)

    signs = np.empty((n, n), dtype=np.int8)
    signs[np.ix_(planted, planted)] = 1
    signs[np.ix_(planted, complement)] = cut_block
    signs[np.ix_(complement, planted)] = cut_block.T
    signs[np.ix_(complement, complement)] = outside

    # Translate complement-local detail positions to vertex ids.
    resolved = dict(details)
    if "chosen_planted_positions" in details:
        resolved["chosen"] = [int(planted[i]) for i in details["chosen_planted_positions"]]
        resolved["decoys"] = [int(complement[i]) for i in details["decoy_positions"]]
    if "decoy_cliques" in details:
        resolved["decoy_cliques"] = [
            [int(v) for v in complement[start:stop]]
            for start, stop in details["decoy_cliques"]]

    return Instance(graph=SignedAdjacency.from_signs(signs), n=n, k=k, p=p,
                    planted=tuple(int(v) for v in planted),
                    adversary=strategy.name, adversary_params=strategy.params(),
                    seed=seed, details=resolved)


def write_instance(inst: Instance, graph_path, meta_path) -> None:
    """Graph file plus a human-readable sidecar with the hidden set."""
    write_graph(inst.graph, graph_path)
    lines = [INSTANCE_HEADER,
             f"n = {inst.n}",
             f"k = {inst.k}",
             f"p = {inst.p!r}",
             f"adversary = {inst.adversary}",
             f"seed = {inst.seed}",
             "planted = " + " ".join(str(v) for v in inst.planted)]
    for key in sorted(inst.adversary_params):
        value = inst.adversary_params[key]
        if value is not None:
            lines.append(f"param_{key} = {value}")
    for key in ("chosen", "decoys"):
        if key in inst.details:
            lines.append(f"{key} = " + " ".join(str(v) for v in inst.details[key]))
    with open(meta_path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def read_instance(graph_path, meta_path) -> Instance:
    graph = read_graph(graph_path)
    meta = read_instance_meta(meta_path)
    params = {k[len("param_"):]: int(v) for k, v in meta.items()
              if k.startswith("param_")}
    details = {}
    for key in ("chosen", "decoys"):
        if key in meta:
            details[key] = [int(v) for v in meta[key].split()]
    return Instance(graph=graph, n=int(meta["n"]), k=int(meta["k"]),
                    p=float(meta["p"]), planted=tuple(int(v) for v in meta["planted"].split()),
                    adversary=meta["adversary"], adversary_params=params,
                    seed=int(meta["seed"]), details=details)


def read_instance_meta(meta_path) -> dict:
    with open(meta_path) as fh:
        header = fh.readline().strip()
        if header != INSTANCE_HEADER:
            raise InputError(f"unrecognized instance header: {header!r}")
        meta = {}
        for line in fh:
            line = line.strip()
            if not line:
                continue
            key, _, value = line.partition(" = ")
            meta[key] = value
    return meta

"""Sign-matrix graph representation and row algebra.

A graph on n vertices is stored as a symmetric n x n matrix over {+1, -1}
with the diagonal fixed to +1 (an edge is +1, a non-edge -1).  Rows are
bit-packed; signs are decoded on read.  The p-biased rescaling maps +1 to
p_plus = sqrt((1-p)/p) and -1 to -p_minus = -sqrt(p/(1-p)), which gives
mean-zero unit-variance entries when edges appear with probability p.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Union

import numpy as np

from . import bits
from .errors import InputError, ParameterError

GRAPH_HEADER = "srpc-graph v1"


class SignedAdjacency:
    """Immutable bit-packed +-1 adjacency matrix with +1 diagonal."""

    def __init__(self, packed: np.ndarray, n: int):
        packed = np.ascontiguousarray(packed, dtype=np.uint64)
        if packed.shape != (n, bits.words_per_row(n)):
            raise InputError(f"packed shape {packed.shape} does not match n={n}")
        self.n = n
        self.packed = packed
        self.packed.setflags(write=False)
        self._check_invariants()

    def _check_invariants(self) -> None:
        signs = self.signs
        if not np.array_equal(signs, signs.T):
            raise InputError("adjacency matrix is not symmetric")
        if not np.all(np.diag(signs) == 1):
            raise InputError("diagonal entries must decode to +1")

    @cached_property
    def signs(self) -> np.ndarray:
        """Dense int8 +-1 matrix, decoded from the packed rows."""
        out = bits.unpack_sign_rows(self.packed, self.n)
        out.setflags(write=False)
        return out

    @classmethod
    def from_signs(cls, signs: np.ndarray) -> "SignedAdjacency":
        signs = np.asarray(signs)
        if signs.ndim != 2 or signs.shape[0] != signs.shape[1]:
            raise InputError("sign matrix must be square")
        if not np.all(np.abs(signs) == 1):
            raise InputError("entries must be +1 or -1")
        return cls(bits.pack_sign_rows(signs), signs.shape[0])

    def row(self, i: int) -> np.ndarray:
        return self.signs[i]

    def adjacency01(self, dtype=np.float64) -> np.ndarray:
        """0/1 adjacency with a zero diagonal (a vertex is not its own neighbor)."""
        a = (self.signs > 0).astype(dtype)
        np.fill_diagonal(a, 0)
        return a

    def edges(self) -> list[tuple[int, int]]:
        iu, ju = np.nonzero(np.triu(self.signs, 1) > 0)
        return list(zip(iu.tolist(), ju.tolist()))

    def __eq__(self, other) -> bool:
        return (isinstance(other, SignedAdjacency) and self.n == other.n
                and np.array_equal(self.packed, other.packed))

    def __hash__(self):
        return hash((self.n, self.packed.tobytes()))


def from_edge_list(n: int, edges: Iterable[tuple[int, int]]) -> SignedAdjacency:
    """Build the sign matrix with +1 exactly on the given undirected edges."""
    if n < 1:
        raise ParameterError("n must be >= 1")
    signs = -np.ones((n, n), dtype=np.int8)
    np.fill_diagonal(signs, 1)
    for i, j in edges:
        if not (0 <= i < n and 0 <= j < n):
            raise InputError(f"edge ({i},{j}) has an endpoint outside [0,{n})")
        if i == j:
            raise InputError(f"self-loop ({i},{i}) is not allowed")
        signs[i, j] = 1
        signs[j, i] = 1
    return SignedAdjacency(bits.pack_sign_rows(signs), n)


class PBiasedMatrix:
    """Real rescaling of a sign matrix with entries in {p_plus, -p_minus}."""

    def __init__(self, graph: SignedAdjacency, p: float):
        if not 0.0 < p < 1.0:
            raise ParameterError(f"p must lie in (0,1), got {p}")
        self.n = graph.n
        self.p = float(p)
        # 1/p - 1 == (1-p)/p but stays exact at p = 4/5, 1/5, ... in binary
        ratio = 1.0 / p - 1.0
        self.p_plus = float(np.sqrt(ratio))
        self.p_minus = float(np.sqrt(1.0 / ratio))
        self.bound = max(self.p_plus, self.p_minus)
        if abs(self.p_plus * self.p_minus - 1.0) > 1e-12:
            raise ParameterError("p_plus * p_minus deviates from 1 beyond rounding")
        values = np.where(graph.signs > 0, self.p_plus, -self.p_minus)
        self.values = values
        self.values.setflags(write=False)

    def row(self, i: int) -> np.ndarray:
        return self.values[i]


def p_biased_rescale(graph: SignedAdjacency, p: float) -> PBiasedMatrix:
    return PBiasedMatrix(graph, p)


@dataclass(frozen=True)
class RowProduct:
    """Entrywise product of up to three rows of a (rescaled) sign matrix."""

    base: Union[SignedAdjacency, PBiasedMatrix]
    alpha: tuple[int, ...]
    values: np.ndarray
    packed: np.ndarray | None = None  # present only for sign-matrix bases


def _check_alpha(alpha, n: int) -> tuple[int, ...]:
    idx = tuple(sorted(int(i) for i in alpha))
    if not 1 <= len(idx) <= 3:
        raise InputError(f"alpha must have 1..3 indices, got {len(idx)}")
    if len(set(idx)) != len(idx):
        raise InputError(f"alpha has duplicate indices: {idx}")
    if idx and (idx[0] < 0 or idx[-1] >= n):
        raise InputError(f"alpha {idx} has indices outside [0,{n})")
    return idx


def hadamard_rows(matrix: Union[SignedAdjacency, PBiasedMatrix],
                  alpha: Iterable[int]) -> RowProduct:
    """values[j] = product over i in alpha of matrix[i][j]."""
    idx = _check_alpha(alpha, matrix.n)
    if isinstance(matrix, SignedAdjacency):
        packed = bits.hadamard_pack(matrix.packed[list(idx)], matrix.n)
        values = bits.unpack_sign_rows(packed, matrix.n)[0]
        return RowProduct(matrix, idx, values, packed=packed)
    values = matrix.values[idx[0]].copy()
    for i in idx[1:]:
        values *= matrix.values[i]
    return RowProduct(matrix, idx, values)


def restrict(v: RowProduct, coords: Iterable[int]) -> np.ndarray:
    """Values of the row product at the given coordinates, in sorted order."""
    n = len(v.values)
    sel = sorted(int(c) for c in coords)
    if sel and (sel[0] < 0 or sel[-1] >= n):
        raise InputError("restriction coordinates outside vertex range")
    return v.values[sel]


def write_graph(graph: SignedAdjacency, path) -> None:
    """Write the versioned edge-list format; output is byte-reproducible."""
    lines = [f"{GRAPH_HEADER} n={graph.n}"]
    for i, j in sorted(graph.edges()):
        lines.append(f"{i} {j}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def read_graph(path) -> SignedAdjacency:
    with open(path) as fh:
        header = fh.readline().strip()
        parts = header.split()
        if parts[:2] != ["srpc-graph", "v1"] or not parts[-1].startswith("n="):
            raise InputError(f"unrecognized graph header: {header!r}")
        n = int(parts[-1][2:])
        edges = []
        for line in fh:
            line = line.strip()
            if not line:
                continue
            i, j = line.split()
            edges.append((int(i), int(j)))
    return from_edge_list(n, edges)

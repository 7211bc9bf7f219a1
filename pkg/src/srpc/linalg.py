"""Matrix-multiplication backends and small dense spectral routines.

Matrices are plain 2-D numpy arrays, row-major, with dtype int64 (exact)
or float64.  All backends compute the same product; the int64 kind is
checked against a precomputed overflow bound before multiplying.

Every call to :func:`matmul` (or the packed-sign fast path
:func:`sign_matmul`) counts as one call to the abstract multiplication
oracle; callers that batch work into n-row chunks therefore get call
counts proportional to the number of chunks.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from . import bits
from .errors import InternalInvariantError, NonConvergenceError, ParameterError

INT64_MAX = np.iinfo(np.int64).max

# Above this dimension the packed-popcount inner products lose to an exact
# BLAS product on the unpacked +-1 rows (every partial sum is an integer
# below 2**24, so float32 accumulation is exact in any order).
_SIGN_GEMM_MIN_N = 2048


@dataclass
class Counters:
    """Instrumentation for the multiplication oracle."""

    oracle_calls: int = 0
    madds: int = 0
    seconds: float = 0.0

    def record(self, m: int, inner: int, n: int, elapsed: float) -> None:
        self.oracle_calls += 1
        self.madds += m * inner * n
        self.seconds += elapsed

    def merge(self, other: "Counters") -> None:
        self.oracle_calls += other.oracle_calls
        self.madds += other.madds
        self.seconds += other.seconds


@dataclass(frozen=True)
class Backend:
    """Multiplication strategy: 'naive', 'blocked', or 'recursive'."""

    kind: str = "naive"
    block_size: int = 64
    cutoff: int = 128

    def __post_init__(self):
        if self.kind not in ("naive", "blocked", "recursive"):
            raise ParameterError(f"unknown backend kind {self.kind!r}")
        if self.block_size < 1 or self.cutoff < 1:
            raise ParameterError("block size and cutoff must be >= 1")


NAIVE = Backend("naive")
BLOCKED = Backend("blocked")
RECURSIVE = Backend("recursive")


def parse_backend(name: str, block_size: int = 64, cutoff: int = 128) -> Backend:
    return Backend(name, block_size=block_size, cutoff=cutoff)


def _check_operands(a: np.ndarray, b: np.ndarray) -> None:
    if a.ndim != 2 or b.ndim != 2:
        raise ParameterError("matmul operands must be 2-D")
    if a.shape[1] != b.shape[0]:
        raise ParameterError(
            f"dimension mismatch: {a.shape} x {b.shape}")
    if a.dtype != b.dtype:
        raise ParameterError(f"operand kinds differ: {a.dtype} vs {b.dtype}")
    if a.dtype not in (np.dtype(np.int64), np.dtype(np.float64)):
        raise ParameterError(f"unsupported entry kind {a.dtype}")


def _check_int_overflow(a: np.ndarray, b: np.ndarray, levels: int) -> None:
    # Each Strassen level can double operand magnitudes and sums four block
    # products, so 8**levels is a safe inflation factor; levels == 0 covers
    # the naive and blocked paths.
    max_a = int(np.abs(a).max(initial=0))
    max_b = int(np.abs(b).max(initial=0))
    bound = max_a * max_b * a.shape[1] * (8 ** levels)
    if bound > INT64_MAX:
        raise OverflowError(
            f"int64 product may overflow: |A|<={max_a}, |B|<={max_b}, "
            f"inner={a.shape[1]}, inflation=8^{levels}, bound={bound} > {INT64_MAX}")


def _matmul_blocked(a: np.ndarray, b: np.ndarray, block: int) -> np.ndarray:
    m, inner = a.shape
    n = b.shape[1]
    out = np.zeros((m, n), dtype=a.dtype)
    for i0 in range(0, m, block):
        for k0 in range(0, inner, block):
            a_blk = a[i0:i0 + block, k0:k0 + block]
            b_rows = b[k0:k0 + block]
            for j0 in range(0, n, block):
                out[i0:i0 + block, j0:j0 + block] += a_blk @ b_rows[:, j0:j0 + block]
    return out


def _strassen(a: np.ndarray, b: np.ndarray, cutoff: int) -> np.ndarray:
    m, inner = a.shape
    n = b.shape[1]
    if max(m, inner, n) <= cutoff or min(m, inner, n) <= 1:
        return a @ b
    # Zero-pad odd dimensions to even before splitting.
    m2, k2, n2 = m + m % 2, inner + inner % 2, n + n % 2
    if (m2, k2) != (m, inner):
        ap = np.zeros((m2, k2), dtype=a.dtype)
        ap[:m, :inner] = a
    else:
        ap = a
    if (k2, n2) != (inner, n):
        bp = np.zeros((k2, n2), dtype=b.dtype)
        bp[:inner, :n] = b
    else:
        bp = b
    hm, hk, hn = m2 // 2, k2 // 2, n2 // 2
    a11, a12 = ap[:hm, :hk], ap[:hm, hk:]
    a21, a22 = ap[hm:, :hk], ap[hm:, hk:]
    b11, b12 = bp[:hk, :hn], bp[:hk, hn:]
    b21, b22 = bp[hk:, :hn], bp[hk:, hn:]

    p1 = _strassen(a11 + a22, b11 + b22, cutoff)
    p2 = _strassen(a21 + a22, b11, cutoff)
    p3 = _strassen(a11, b12 - b22, cutoff)
    p4 = _strassen(a22, b21 - b11, cutoff)
    p5 = _strassen(a11 + a12, b22, cutoff)
    p6 = _strassen(a21 - a11, b11 + b12, cutoff)
    p7 = _strassen(a12 - a22, b21 + b22, cutoff)

    out = np.empty((m2, n2), dtype=a.dtype)
    out[:hm, :hn] = p1 + p4 - p5 + p7
    out[:hm, hn:] = p3 + p5
    out[hm:, :hn] = p2 + p4
    out[hm:, hn:] = p1 - p2 + p3 + p6
    return out[:m, :n]


def _strassen_levels(a: np.ndarray, b: np.ndarray, cutoff: int) -> int:
    levels = 0
    dims = max(a.shape[0], a.shape[1], b.shape[1])
    while dims > cutoff:
        dims = (dims + 1) // 2
        levels += 1
    return levels


def matmul(a: np.ndarray, b: np.ndarray, backend: Backend = NAIVE,
           counters: Counters | None = None) -> np.ndarray:
    """Product A @ B under the selected backend.

    Integer results are exact for every backend (and therefore identical
    across backends); float results agree across backends to within
    1e-12 * max|A| * max|B| * inner per entry.
    """
    a = np.ascontiguousarray(a)
    b = np.ascontiguousarray(b)
    _check_operands(a, b)
    if a.dtype == np.int64:
        levels = _strassen_levels(a, b, backend.cutoff) if backend.kind == "recursive" else 0
        _check_int_overflow(a, b, levels)
    start = time.perf_counter()
    if backend.kind == "naive":
        out = a @ b
    elif backend.kind == "blocked":
        out = _matmul_blocked(a, b, backend.block_size)
    else:
        out = _strassen(a, b, backend.cutoff)
    if counters is not None:
        counters.record(a.shape[0], a.shape[1], b.shape[1], time.perf_counter() - start)
    return out


def sign_matmul(packed_a: np.ndarray, packed_b: np.ndarray, n: int,
                counters: Counters | None = None) -> np.ndarray:
    """Inner-product table for bit-packed +-1 operands.

    T[i, j] = <a_i, b_j> computed as n - 2*popcount(a_i XOR b_j); equals the
    generic integer matmul of the unpacked rows exactly.  For large n the
    same table is produced by an exact float32 product (all partial sums are
    integers < 2**24), which is faster than word-parallel popcounts there.
    """
    packed_a = np.atleast_2d(packed_a)
    packed_b = np.atleast_2d(packed_b)
    start = time.perf_counter()
    if n <= _SIGN_GEMM_MIN_N:
        out = bits.sign_inner_popcount(packed_a, packed_b, n)
    else:
        rows = bits.unpack_sign_rows(packed_a, n).astype(np.float32)
        cols = bits.unpack_sign_rows(packed_b, n).astype(np.float32)
        out = (rows @ cols.T).astype(np.int32)
    if counters is not None:
        counters.record(packed_a.shape[0], n, packed_b.shape[0],
                        time.perf_counter() - start)
    return out


def gram(u: np.ndarray, backend: Backend = NAIVE,
         counters: Counters | None = None) -> np.ndarray:
    """U @ U.T with a symmetry check on the result."""
    out = matmul(u, np.ascontiguousarray(u.T), backend, counters)
    if not np.array_equal(out, out.T):
        raise InternalInvariantError("gram product is not symmetric")
    return out


def power_iteration(m: np.ndarray, tol: float = 1e-9, cap: int = 10_000,
                    seed: int = 0) -> tuple[float, np.ndarray]:
    """Top singular value and right singular vector by power iteration.

    Iterates on the smaller Gram side with a deterministic seeded start.
    Raises :class:`NonConvergenceError` (carrying the last estimate) if the
    relative change in the estimate has not dropped below ``tol`` within
    ``cap`` iterations.
    """
    m = np.asarray(m, dtype=np.float64)
    if m.ndim != 2 or m.size == 0:
        raise ParameterError("power_iteration needs a non-empty 2-D matrix")
    if not np.any(m):
        raise ParameterError("power_iteration needs a nonzero matrix")
    rng = np.random.default_rng(seed)
    tall = m.shape[0] >= m.shape[1]
    dim = m.shape[1] if tall else m.shape[0]
    v = rng.standard_normal(dim)
    v /= np.linalg.norm(v)
    sigma = 0.0
    for _ in range(cap):
        if tall:
            w = m.T @ (m @ v)
        else:
            w = m @ (m.T @ v)
        norm = np.linalg.norm(w)
        if norm == 0.0:
            # Start vector fell in the kernel; re-draw deterministically.
            v = rng.standard_normal(dim)
            v /= np.linalg.norm(v)
            continue
        v = w / norm
        new_sigma = float(np.sqrt(norm))
        if abs(new_sigma - sigma) <= tol * max(new_sigma, 1e-300):
            right = v if tall else m.T @ v
            nrm = np.linalg.norm(right)
            return new_sigma, right / nrm
        sigma = new_sigma
    raise NonConvergenceError(
        f"power iteration did not converge in {cap} iterations "
        f"(last estimate {sigma})", last_estimate=sigma)

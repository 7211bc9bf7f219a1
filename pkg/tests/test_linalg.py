import numpy as np
import pytest

from srpc import bits, linalg
from srpc.errors import NonConvergenceError, ParameterError

BACKENDS = [linalg.NAIVE, linalg.BLOCKED, linalg.RECURSIVE]


def test_hand_checked_2x2():
    a = np.array([[1, 2], [3, 4]], dtype=np.int64)
    b = np.array([[5, 6], [7, 8]], dtype=np.int64)
    expected = np.array([[19, 22], [43, 50]])
    for backend in BACKENDS:
        assert np.array_equal(linalg.matmul(a, b, backend), expected)


def test_identity_is_neutral():
    rng = np.random.default_rng(0)
    a = rng.integers(-50, 50, size=(31, 31)).astype(np.int64)
    eye = np.eye(31, dtype=np.int64)
    for backend in BACKENDS:
        assert np.array_equal(linalg.matmul(a, eye, backend), a)


def test_backends_bit_identical_on_odd_shapes():
    rng = np.random.default_rng(1)
    a = rng.integers(-100, 100, size=(257, 129)).astype(np.int64)
    b = rng.integers(-100, 100, size=(129, 63)).astype(np.int64)
    naive = linalg.matmul(a, b, linalg.NAIVE)
    for backend in BACKENDS[1:]:
        assert np.array_equal(naive, linalg.matmul(a, b, backend))


def test_blocked_result_independent_of_block_size():
    rng = np.random.default_rng(2)
    a = rng.integers(-9, 9, size=(70, 41)).astype(np.int64)
    b = rng.integers(-9, 9, size=(41, 55)).astype(np.int64)
    ref = linalg.matmul(a, b, linalg.NAIVE)
    for block in (1, 7, 16, 64, 200):
        got = linalg.matmul(a, b, linalg.Backend("blocked", block_size=block))
        assert np.array_equal(got, ref)


def test_float_backends_agree_within_tolerance():
    rng = np.random.default_rng(3)
    a = rng.standard_normal((143, 91))
    b = rng.standard_normal((91, 77))
    ref = linalg.matmul(a, b, linalg.NAIVE)
    bound = 1e-12 * np.abs(a).max() * np.abs(b).max() * a.shape[1]
    for backend in BACKENDS[1:]:
        got = linalg.matmul(a, b, backend)
        assert np.abs(got - ref).max() <= bound


def test_dimension_and_kind_mismatches():
    a = np.zeros((3, 4), dtype=np.int64)
    with pytest.raises(ParameterError):
        linalg.matmul(a, np.zeros((5, 2), dtype=np.int64))
    with pytest.raises(ParameterError):
        linalg.matmul(a, np.zeros((4, 2), dtype=np.float64))
    with pytest.raises(ParameterError):
        linalg.matmul(a.astype(np.int32), np.zeros((4, 2), dtype=np.int32))


def test_integer_overflow_is_refused():
    big = np.full((2, 2), 2**62, dtype=np.int64)
    with pytest.raises(OverflowError):
        linalg.matmul(big, big)


def test_sign_matmul_equals_generic_integer_path():
    # exhaustive diff against the dense product for n <= 256
    rng = np.random.default_rng(4)
    for n in (1, 2, 63, 64, 65, 129, 256):
        signs = rng.choice(np.array([-1, 1], dtype=np.int8), size=(n, n))
        packed = bits.pack_sign_rows(signs)
        table = linalg.sign_matmul(packed, packed, n)
        dense = linalg.matmul(signs.astype(np.int64), signs.T.astype(np.int64))
        assert np.array_equal(table, dense)


def test_sign_matmul_gemm_route_matches_popcount_route():
    # n above the internal switch runs the exact float product; both routes
    # must produce identical integer tables.
    rng = np.random.default_rng(5)
    n = 2500
    signs = rng.choice(np.array([-1, 1], dtype=np.int8), size=(40, n))
    packed = bits.pack_sign_rows(signs)
    table = linalg.sign_matmul(packed, packed, n)
    popcount = bits.sign_inner_popcount(packed, packed, n)
    assert np.array_equal(table, popcount)


def test_gram_counts_intersections():
    u = np.zeros((2, 10), dtype=np.int64)
    u[0, [1, 2, 3]] = 1
    u[1, [2, 3, 4, 5]] = 1
    g = linalg.gram(u)
    assert g[0, 0] == 3 and g[1, 1] == 4
    assert g[0, 1] == g[1, 0] == 2


def test_gram_matches_direct_intersection_counting():
    rng = np.random.default_rng(6)
    u = (rng.random((64, 100)) < 0.3).astype(np.int64)
    g = linalg.gram(u, linalg.BLOCKED)
    sets = [set(np.nonzero(row)[0]) for row in u]
    for i in range(0, 64, 7):
        for j in range(0, 64, 11):
            assert g[i, j] == len(sets[i] & sets[j])


def test_gram_is_positive_semidefinite_via_negation_shift():
    # top eigenvalue of (c I - G) is c - lambda_min(G); PSD means it stays <= c
    rng = np.random.default_rng(7)
    u = rng.standard_normal((6, 9))
    g = linalg.gram(u)
    c = float(np.trace(g)) + 1.0  # safely above lambda_max
    shifted = c * np.eye(6) - g   # symmetric PSD iff g's spectrum <= c
    top, _ = linalg.power_iteration(shifted)
    lambda_min = c - top
    assert lambda_min >= -1e-8


def test_counters_track_calls_and_madds():
    counters = linalg.Counters()
    a = np.ones((4, 5), dtype=np.int64)
    b = np.ones((5, 6), dtype=np.int64)
    linalg.matmul(a, b, counters=counters)
    linalg.matmul(a, b, counters=counters)
    assert counters.oracle_calls == 2
    assert counters.madds == 2 * 4 * 5 * 6


def test_power_iteration_on_diagonal():
    sigma, v = linalg.power_iteration(np.diag([5.0, 2.0, 1.0]))
    assert sigma == pytest.approx(5.0, rel=1e-9)
    assert abs(v[0]) == pytest.approx(1.0, rel=1e-6)


def test_power_iteration_rank_one():
    u = np.array([0.0, 2.0, 0.0])
    v = np.array([3.0, 0.0, 4.0, 0.0, 0.0])
    m = np.outer(u, v)  # norms 2 and 5
    sigma, _ = linalg.power_iteration(m)
    assert sigma == pytest.approx(10.0, rel=1e-9)


def test_power_iteration_vs_characteristic_polynomial_blocks():
    # block-diagonal M built from blocks of size <= 3; the top singular value
    # is the square root of the largest eigenvalue of M^T M, and each block's
    # eigenvalues come from its characteristic polynomial.
    rng = np.random.default_rng(7)
    blocks = [rng.standard_normal((3, 3)), rng.standard_normal((3, 3)),
              rng.standard_normal((2, 2))]
    m = np.zeros((8, 8))
    at = 0
    expected = 0.0
    for blk in blocks:
        d = blk.shape[0]
        m[at:at + d, at:at + d] = blk
        gram = blk.T @ blk
        expected = max(expected, float(np.max(np.real(np.roots(
            np.poly(gram))))))
        at += d
    sigma, _ = linalg.power_iteration(m, seed=3)
    assert sigma == pytest.approx(np.sqrt(expected), rel=1e-7)


def test_power_iteration_deflation_cross_check():
    rng = np.random.default_rng(8)
    m = rng.standard_normal((12, 9))
    sigma, v = linalg.power_iteration(m)
    u = m @ v / sigma
    deflated = m - sigma * np.outer(u, v)
    sigma2, _ = linalg.power_iteration(deflated)
    assert sigma2 <= sigma + 1e-9
    # removing the top component leaves the second singular value
    svals = np.linalg.svd(m, compute_uv=False)
    assert sigma == pytest.approx(svals[0], rel=1e-8)
    assert sigma2 == pytest.approx(svals[1], rel=1e-6)


def test_power_iteration_nonconvergence_carries_estimate():
    m = np.diag([1.0, 0.9999])  # tiny gap: estimates still moving after 3 steps
    try:
        linalg.power_iteration(m, tol=1e-16, cap=3)
    except NonConvergenceError as exc:
        assert exc.last_estimate is not None
    else:
        pytest.fail("expected NonConvergenceError at cap")


def test_power_iteration_rejects_zero_matrix():
    with pytest.raises(ParameterError):
        linalg.power_iteration(np.zeros((3, 3)))

import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from quasimod.exponents import INF
from quasimod.matrices import (
    ExponentError,
    LatticeMatrix,
    WeightConditionError,
    apply,
    check_continuity,
    diagonal_profile,
    factorize_chain,
    factorize_left_diagonal,
    factorize_right_diagonal,
    u_norm,
)
from quasimod.norms import SequenceArray
from quasimod.weights import Lattice, Weight, make_lattice


def lat(n, d=1):
    return make_lattice((1.0,) * d, ((0, n - 1),) * d)


def M(entries, d=1):
    entries = np.asarray(entries, dtype=complex)
    n = round(entries.shape[0] ** (1 / d))
    return LatticeMatrix(lat(n, d), entries)


def test_u_norm_examples():
    eye = M(np.eye(4))
    h = diagonal_profile(eye, 2)
    assert h.max() == pytest.approx(2.0) and np.count_nonzero(h) == 1
    assert u_norm(eye, 2, 2) == pytest.approx(2.0)
    e = np.zeros((5, 5))
    e[1, 3] = 1
    for p, q in [(0.5, 1), (1, INF), (2, 0.3)]:
        assert u_norm(M(e), p, q) == pytest.approx(1.0)
    d = np.array([1.0, -2.0, 0.5, 3.0])
    for p, q in [(0.5, 1), (1.5, INF), (2, 0.3)]:
        assert u_norm(M(np.diag(d)), p, q) == pytest.approx(np.sum(np.abs(d) ** p) ** (1 / p))


def test_left_factorization_all_ones():
    A = M(np.ones((2, 2)))
    A1, A2 = factorize_left_diagonal(A, 1, 2, 2)
    np.testing.assert_allclose(A1.entries, math.sqrt(2) * np.eye(2))
    np.testing.assert_allclose(A2.entries, np.full((2, 2), 1 / math.sqrt(2)))
    assert u_norm(A1, 2) == pytest.approx(2.0)
    assert u_norm(A2, 2) == pytest.approx(math.sqrt(2))
    assert u_norm(A1, 2) * u_norm(A2, 2) <= u_norm(A, 1)


def test_factorization_zero_row_and_identity():
    a = np.random.default_rng(0).standard_normal((4, 4))
    a[2] = 0
    A1, A2 = factorize_left_diagonal(M(a), 1, 2, 2)
    assert A1.entries[2, 2] == 0 and not np.any(A2.entries[2])
    np.testing.assert_allclose(A1.entries @ A2.entries, a, atol=1e-14)
    B1, B2 = factorize_left_diagonal(M(np.eye(5)), 1, 2, 2)
    np.testing.assert_allclose(B1.entries, np.eye(5))
    np.testing.assert_allclose(B2.entries, np.eye(5))


def test_right_factorization_examples():
    A1, A2 = factorize_right_diagonal(M(np.ones((2, 2))), 1, 2, 2)
    np.testing.assert_allclose(A2.entries, math.sqrt(2) * np.eye(2))
    D = M(np.diag([1.0, 2.0, 3.0]))
    F1, F2 = factorize_right_diagonal(D, 1, 2, 2)
    assert F1.is_diagonal and F2.is_diagonal
    a = np.ones((3, 3))
    a[:, 1] = 0
    G1, G2 = factorize_right_diagonal(M(a), 1, 2, 2)
    np.testing.assert_allclose(G1.entries @ G2.entries, a)


exps = st.sampled_from([(1, 2, 2), (0.5, 1, 1), (2 / 3, 2, 1), (1, INF, 1), (0.5, 2, 2 / 3), (2, INF, 2)])


@given(st.integers(0, 10_000), exps, st.booleans())
def test_factorization_bounds_random(seed, ps, left):
    p0, p1, p2 = ps
    rng = np.random.default_rng(seed)
    n = 6
    a = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    a *= rng.random((n, n)) < 0.7
    A = M(a)
    w0 = Weight.pair_quotient(Weight.poly(1.0), Weight.poly(0.5))
    # the diagonal factor carries the trivial weight, the full factor carries w0
    ws = (w0, None, w0) if left else (w0, w0, None)
    split = factorize_left_diagonal if left else factorize_right_diagonal
    A1, A2 = split(A, p0, p1, p2, *ws)
    np.testing.assert_allclose(A1.entries @ A2.entries, a, atol=1e-12)
    n0, n1, n2 = u_norm(A, p0, None, ws[0]), u_norm(A1, p1, None, ws[1]), u_norm(A2, p2, None, ws[2])
    assert n1 * n2 <= n0 * (1 + 1e-10)


def test_factorization_rejects_bad_input():
    A = M(np.ones((3, 3)))
    with pytest.raises(ExponentError):
        factorize_left_diagonal(A, 1, 2, 3)
    bad = Weight.const(2.0)
    with pytest.raises(WeightConditionError):
        factorize_left_diagonal(A, 1, 2, 2, None, bad, None)


def test_chain_examples():
    two = factorize_chain(M(np.ones((2, 2))), 2)
    np.testing.assert_allclose(two.factors[0].entries, math.sqrt(2) * np.eye(2))
    assert two.certified
    ident = factorize_chain(M(np.eye(4)), 4)
    assert all(F.is_diagonal for F in ident.factors) and ident.certified
    a = np.random.default_rng(5).standard_normal((8, 8))
    ch = factorize_chain(M(a), 3)
    assert np.abs(ch.product - a).max() <= 1e-10 and ch.certified
    with pytest.raises(ValueError):
        factorize_chain(M(a), 1)


def test_weighted_chain_certified():
    rng = np.random.default_rng(6)
    a = rng.standard_normal((9, 9))
    A = LatticeMatrix(lat(3, 2), a)
    ch = factorize_chain(A, 4, Weight.poly(1.0), Weight.exp(0.2))
    assert ch.certified
    np.testing.assert_allclose(ch.product, a, atol=1e-10)


def test_apply_examples():
    rng = np.random.default_rng(8)
    L = lat(5)
    f = SequenceArray(L, rng.standard_normal(5))
    np.testing.assert_allclose(apply(M(np.eye(5)), f).values, f.values)
    delta = SequenceArray(L, np.eye(5)[0])
    np.testing.assert_allclose(apply(M(np.ones((5, 5))), delta).values, np.ones(5))
    a = rng.standard_normal((5, 5))
    ref = [sum(a[j, k] * f.values[k] for k in range(5)) for j in range(5)]
    np.testing.assert_allclose(apply(M(a), f).values, ref, atol=1e-14)


def test_continuity_examples():
    rng = np.random.default_rng(9)
    L2 = lat(4, 2)
    rep = check_continuity(LatticeMatrix(L2, np.eye(16)), (2, 2), (2, 2), INF, 1, rng=rng)
    assert rep.passed and rep.worst_ratio <= 1 + 1e-12
    A = LatticeMatrix(L2, rng.standard_normal((16, 16)))
    assert check_continuity(A, (2, 2), (2, 2), INF, 1, trials=200, rng=rng).passed
    u, v = rng.standard_normal(16), rng.standard_normal(16)
    R = LatticeMatrix(L2, np.outer(u, v))
    assert check_continuity(R, (INF, INF), (1, 1), 1, 1, rng=rng).passed


def test_continuity_rejects_before_trials():
    A = LatticeMatrix(lat(3), np.eye(3))
    with pytest.raises(ExponentError):
        check_continuity(A, 1, INF, 2, 2, trials=0)


def test_lattice_matrix_validation():
    with pytest.raises(ValueError):
        LatticeMatrix(lat(3), np.eye(2))
    A = LatticeMatrix(Lattice.cyclic((1.0,), (3,)), np.eye(3))
    assert (A @ A).is_diagonal

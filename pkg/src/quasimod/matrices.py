"""Lattice-indexed matrices, the U^{p,q} quasi-norms and diagonal factorizations.

For a matrix ``A = (a(j,k))`` over a lattice and a pair weight ``w``, entries
are grouped by the index difference ``j - k``.  Along each diagonal the
``l^p`` quasi-norm of ``a(j,k) w(j,k)`` is taken, and the resulting sequence
over differences is measured in ``l^q``.  Differences outside the box carry
zero, so the truncated model is a finite section of the infinite one.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field
from fractions import Fraction
import numpy as np

from .exponents import as_mixed, parse_exponent, pq_conditions, recip
from .norms import SequenceArray, lp_reduce, mixed_seq_norm
from .weights import Lattice, check_pair_weight_condition, lattice_weights, pair_weights


class ExponentError(ValueError):
    """Exponents violate a required relation."""


class WeightConditionError(ValueError):
    """Weights violate a required compatibility condition on the lattice."""


@dataclass
class LatticeMatrix:
    """Dense complex matrix with rows and columns indexed by one lattice."""

    lattice: Lattice
    entries: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.entries, dtype=complex)
        n = self.lattice.size
        if a.shape != (n, n):
            raise ValueError(f"matrix shape {a.shape} does not match lattice size {n}")
        if not np.all(np.isfinite(a)):
            raise ValueError("matrix entries must be finite")
        self.entries = a

    @property
    def is_diagonal(self) -> bool:
        off = self.entries - np.diag(np.diag(self.entries))
        return not np.any(off)

    @property
    def T(self) -> "LatticeMatrix":
        return LatticeMatrix(self.lattice, self.entries.T.copy())

    def __matmul__(self, other: "LatticeMatrix") -> "LatticeMatrix":
        if other.lattice != self.lattice:
            raise ValueError("matrices live on different lattices")
        return LatticeMatrix(self.lattice, self.entries @ other.entries)


@functools.lru_cache(maxsize=64)
def _difference_groups(lattice: Lattice) -> tuple[np.ndarray, int]:
    """Group id of ``j - k`` for every flat pair, and the number of groups."""
    diff = lattice.index_differences().reshape(-1, lattice.dim)
    _, inverse = np.unique(diff, axis=0, return_inverse=True)
    inverse = inverse.reshape(-1)
    return inverse, int(inverse.max()) + 1


def diagonal_profile(A: LatticeMatrix, p, w=None) -> np.ndarray:
    """``h(k) = ||a(., . - k) w(., . - k)||_{l^p}`` over the difference set."""
    p = parse_exponent(p)
    mag = (np.abs(A.entries) * pair_weights(w, A.lattice)).reshape(-1)
    groups, ng = _difference_groups(A.lattice)
    if math.isinf(p):
        h = np.zeros(ng)
        np.maximum.at(h, groups, mag)
        return h
    top = float(mag.max()) if mag.size else 0.0
    if top == 0.0:
        return np.zeros(ng)
    s = np.bincount(groups, weights=(mag / top) ** p, minlength=ng)
    return top * s ** (1.0 / p)


def u_norm(A: LatticeMatrix, p, q=None, w=None) -> float:
    """Quasi-norm of ``A`` in ``U^{p,q}(w)``; ``q`` defaults to ``p``."""
    p = parse_exponent(p)
    q = p if q is None else parse_exponent(q)
    if p == q:
        mag = np.abs(A.entries) * pair_weights(w, A.lattice)
        return float(lp_reduce(mag.reshape(-1), p))
    return float(lp_reduce(diagonal_profile(A, p, w), q))


def weighted_frobenius(A: LatticeMatrix, w=None) -> float:
    return float(np.sqrt(np.sum((np.abs(A.entries) * pair_weights(w, A.lattice)) ** 2)))


def _row_norms(mag: np.ndarray, p: float) -> np.ndarray:
    return lp_reduce(mag, p, axis=1)


def _left_arrays(a: np.ndarray, p0: float, p1: float, p2: float, W0: np.ndarray, W1diag: np.ndarray):
    """Core of the left factorization on raw arrays; returns ``(b, c)``."""
    rows = _row_norms(np.abs(a) * W0, p0)
    if math.isinf(p1):
        # exponent p0/p1 is zero: only the support of the row survives
        scale = np.where(rows > 0, 1.0, 0.0)
    else:
        expo = float(recip(p1) / recip(p0))
        scale = rows ** expo
    b = scale / W1diag
    c = np.zeros_like(a)
    nz = b > 0
    c[nz] = a[nz] / b[nz, None]
    return b, c


def _validate_holder(p0, p1, p2) -> tuple[float, float, float]:
    p0, p1, p2 = (parse_exponent(v) for v in (p0, p1, p2))
    if recip(p0) != recip(p1) + recip(p2):
        raise ExponentError(f"1/p0 = 1/p1 + 1/p2 fails for (p0, p1, p2) = {(p0, p1, p2)}")
    return p0, p1, p2


def factorize_left_diagonal(A0: LatticeMatrix, p0, p1, p2, w0=None, w1=None, w2=None, check_weights: bool = True):
    """Split ``A0 = A1 A2`` with ``A1`` diagonal.

    ``b(j,j) = w1(j,j)^{-1} (sum_m |a(j,m) w0(j,m)|^{p0})^{1/p1}`` and
    ``c(j,k) = a(j,k) / b(j,j)`` (zero on rows where ``b`` vanishes).  Then
    ``||A1||_{U^{p1}(w1)} = ||A0||_{U^{p0}(w0)}^{p0/p1}`` and
    ``||A2||_{U^{p2}(w2)} <= ||A0||^{p0/p2}`` whenever
    ``w1(j,j) w2(j,k) <= w0(j,k)``.

    When ``p1 = inf`` the exponent ``p0/p1`` is zero and ``b(j,j)`` reduces to
    ``w1(j,j)^{-1}`` on nonzero rows.
    """
    p0, p1, p2 = _validate_holder(p0, p1, p2)
    lat = A0.lattice
    W0, W1, W2 = (pair_weights(w, lat) for w in (w0, w1, w2))
    if check_weights:
        rep = check_pair_weight_condition("wc1", W0, W1, W2, lat)
        if not rep.passed:
            raise WeightConditionError(f"w1(j,j) w2(j,k) <= w0(j,k) fails: ratio {rep.worst_ratio:.6g} at {rep.witness}")
    b, c = _left_arrays(A0.entries, p0, p1, p2, W0, np.diag(W1))
    return LatticeMatrix(lat, np.diag(b).astype(complex)), LatticeMatrix(lat, c)


def factorize_right_diagonal(A0: LatticeMatrix, p0, p1, p2, w0=None, w1=None, w2=None, check_weights: bool = True):
    """Split ``A0 = A1 A2`` with ``A2`` diagonal, by transposing the left case.

    Requires ``w1(j,k) w2(k,k) <= w0(j,k)``.
    """
    p0, p1, p2 = _validate_holder(p0, p1, p2)
    lat = A0.lattice
    W0, W1, W2 = (pair_weights(w, lat) for w in (w0, w1, w2))
    if check_weights:
        rep = check_pair_weight_condition("wc2", W0, W1, W2, lat)
        if not rep.passed:
            raise WeightConditionError(f"w1(j,k) w2(k,k) <= w0(j,k) fails: ratio {rep.worst_ratio:.6g} at {rep.witness}")
    b, c = _left_arrays(A0.entries.T, p0, p2, p1, W0.T, np.diag(W2))
    return LatticeMatrix(lat, c.T.copy()), LatticeMatrix(lat, np.diag(b).astype(complex))


@dataclass
class FactorChain:
    factors: list[LatticeMatrix]
    weights: list[np.ndarray]
    norms: list[float]
    source_norm: float

    @property
    def product(self) -> np.ndarray:
        return functools.reduce(np.matmul, (f.entries for f in self.factors))

    @property
    def certified(self) -> bool:
        return bool(np.prod(self.norms) <= self.source_norm * (1 + 1e-10))


def factorize_chain(A: LatticeMatrix, N: int, w1=None, w2=None) -> FactorChain:
    """Write ``A = A_1 ... A_N`` with every factor Hilbert-Schmidt.

    ``w1`` and ``w2`` are weights on the lattice (domain and target).  ``A``
    is measured in ``U^{2/N}`` with the pair weight ``w2(j)/w1(k)``.  The
    first factor carries the weight ``w2(j)``, the middle ones are unweighted
    and the last carries ``1/w1(k)``, so each factor norm is at most
    ``||A||^{1/N}``.
    """
    if int(N) != N or N < 2:
        raise ValueError(f"chain length must be an integer >= 2, got {N}")
    N = int(N)
    lat = A.lattice
    n = lat.size
    v1 = lattice_weights(w1, lat)
    v2 = lattice_weights(w2, lat)
    col = np.tile(1.0 / v1, (n, 1))
    w0 = v2[:, None] * col
    source = u_norm(A, 2.0 / N, None, w0)
    factors, weights, norms = [], [], []
    rest = A.entries
    rest_w = w0
    for m in range(1, N):
        p0 = Fraction(2, N - m + 1)
        p2 = Fraction(2, N - m)
        diag_w = v2 if m == 1 else np.ones(n)
        b, c = _left_arrays(rest, float(p0), 2.0, float(p2), rest_w, diag_w)
        D = LatticeMatrix(lat, np.diag(b).astype(complex))
        factors.append(D)
        weights.append(np.outer(diag_w, np.ones(n)))
        norms.append(u_norm(D, 2, 2, np.outer(diag_w, np.ones(n))))
        rest = c
        rest_w = col
    last = LatticeMatrix(lat, rest)
    factors.append(last)
    weights.append(col)
    norms.append(u_norm(last, 2, 2, col))
    return FactorChain(factors, weights, norms, source)


def apply(A: LatticeMatrix, f: SequenceArray) -> SequenceArray:
    """``(Af)(j) = sum_k a(j,k) f(k)``."""
    if f.lattice != A.lattice:
        raise ValueError("matrix and sequence live on different lattices")
    return SequenceArray(A.lattice, A.entries @ f.values)


@dataclass
class ContinuityReport:
    u_norm: float
    worst_ratio: float
    trials: int
    passed: bool
    ratios: np.ndarray = field(repr=False, default_factory=lambda: np.zeros(0))


def random_test_vectors(rng: np.random.Generator, A: np.ndarray, trials: int) -> np.ndarray:
    """Random trial vectors mixing dense, sparse and row-aligned draws."""
    n = A.shape[0]
    out = np.empty((trials, n), dtype=complex)
    for t in range(trials):
        kind = t % 3
        z = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        if kind == 1:
            mask = rng.random(n) < max(1.0 / n, 0.15)
            mask[rng.integers(n)] = True
            z = z * mask
        elif kind == 2:
            row = A[rng.integers(n)]
            z = np.conj(row) * (1 + 0.1 * rng.standard_normal(n))
            if not np.any(z):
                z = rng.standard_normal(n) + 0j
        out[t] = z
    return out


def check_continuity(A: LatticeMatrix, p1, p2, p, q, sigma=None, w0=None, w1=None, w2=None,
                     trials: int = 200, rng: np.random.Generator | None = None, rtol: float = 1e-10) -> ContinuityReport:
    """Test ``||Af||_{l^{p2}(w2)} <= ||A||_{U^{p,q}(w0)} ||f||_{l^{p1}(w1)}`` on random ``f``.

    Exponents are validated first; inadmissible tuples raise
    :class:`ExponentError` before any trial runs.
    """
    lat = A.lattice
    d = lat.dim
    e1 = as_mixed(p1, d)
    e2 = as_mixed(p2, d)
    if sigma is not None:
        e1 = type(e1)(e1.p, tuple(sigma))
        e2 = type(e2)(e2.p, tuple(sigma))
    problems = pq_conditions(e1.p, e2.p, p, q)
    if problems:
        raise ExponentError("; ".join(problems))
    a1 = lattice_weights(w1, lat)
    a2 = lattice_weights(w2, lat)
    rep = check_pair_weight_condition("wi1", w0, a1, a2, lat)
    if not rep.passed:
        raise WeightConditionError(f"w2(j)/w1(k) <= w0(j,k) fails: ratio {rep.worst_ratio:.6g} at {rep.witness}")
    rng = np.random.default_rng(0) if rng is None else rng
    U = u_norm(A, p, q, w0)
    fs = random_test_vectors(rng, A.entries, trials)
    ratios = np.empty(trials)
    for t, fv in enumerate(fs):
        f = SequenceArray(lat, fv)
        lhs = mixed_seq_norm(apply(A, f), e2, a2)
        rhs = U * mixed_seq_norm(f, e1, a1)
        ratios[t] = 0.0 if lhs == 0 else lhs / rhs
    worst = float(ratios.max()) if trials else 0.0
    return ContinuityReport(U, worst, trials, bool(worst <= 1 + rtol), ratios)

"""Weighted singular values and Schatten-von Neumann quasi-norms.

A matrix acting from ``l^2_{(w1)}`` to ``l^2_{(w2)}`` is unitarily
equivalent to ``D_{w2} A D_{w1}^{-1}`` on plain ``l^2``; its singular values
are computed from that conjugated matrix.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.special import logsumexp

from .exponents import holder_holds, parse_exponent
from .matrices import ExponentError, LatticeMatrix, u_norm
from .weights import lattice_weights

LOG_SPACE_THRESHOLD = 0.2
RANK_TOL = 1e-13


@dataclass(frozen=True)
class SingularSpectrum:
    """Non-increasing list of singular values."""

    values: tuple[float, ...]

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if np.any(vals < 0) or np.any(np.diff(vals) > 0):
            raise ValueError("singular values must be nonnegative and non-increasing")
        object.__setattr__(self, "values", tuple(float(v) for v in vals))

    def __len__(self) -> int:
        return len(self.values)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.values)

    def rank(self, tol: float = RANK_TOL) -> int:
        s = self.as_array()
        return int(np.sum(s > tol * s[0])) if s.size and s[0] > 0 else 0


def spectrum_of(M: np.ndarray) -> SingularSpectrum:
    s = np.linalg.svd(np.asarray(M, dtype=complex), compute_uv=False)
    return SingularSpectrum(tuple(np.sort(s)[::-1]))


def conjugated(A: LatticeMatrix, w1=None, w2=None) -> np.ndarray:
    """``D_{w2} A D_{w1}^{-1}`` for weights on the lattice."""
    a1 = lattice_weights(w1, A.lattice)
    a2 = lattice_weights(w2, A.lattice)
    if not (np.all(np.isfinite(a1)) and np.all(a1 > 0) and np.all(np.isfinite(1 / a1))):
        raise OverflowError("domain weight is numerically singular on the lattice")
    return a2[:, None] * A.entries / a1[None, :]


def singular_values(A: "LatticeMatrix | np.ndarray", w1=None, w2=None) -> SingularSpectrum:
    """Singular values of ``A`` as a map ``l^2_{(w1)} -> l^2_{(w2)}``."""
    if isinstance(A, np.ndarray):
        if w1 is not None or w2 is not None:
            raise ValueError("weights need a LatticeMatrix")
        return spectrum_of(A)
    return spectrum_of(conjugated(A, w1, w2))


def schatten_norm(s: "SingularSpectrum | np.ndarray", p) -> float:
    """``l^p`` quasi-norm of the spectrum; ``p = inf`` is the operator norm."""
    p = parse_exponent(p)
    vals = s.as_array() if isinstance(s, SingularSpectrum) else np.asarray(s, dtype=float)
    if vals.size == 0:
        return 0.0
    top = float(vals.max())
    if math.isinf(p) or top == 0.0:
        return top
    if p < LOG_SPACE_THRESHOLD:
        pos = vals[vals > 0]
        return float(math.exp(logsumexp(p * np.log(pos)) / p))
    return float(top * np.sum((vals / top) ** p) ** (1.0 / p))


def schatten_of(M: np.ndarray, p) -> float:
    return schatten_norm(spectrum_of(M), p)


@dataclass
class SchattenReport:
    i_p: float
    u_p: float
    passed: bool | None

    @property
    def ratio(self) -> float:
        return 0.0 if self.i_p == 0 else self.i_p / self.u_p


def pair_quotient_array(A: LatticeMatrix, w1=None, w2=None) -> np.ndarray:
    """``w0(j,k) = w2(j) / w1(k)`` on the lattice."""
    a1 = lattice_weights(w1, A.lattice)
    a2 = lattice_weights(w2, A.lattice)
    return a2[:, None] / a1[None, :]


def verify_schatten_embedding(A: LatticeMatrix, p, w1=None, w2=None, probe: bool = False, rtol: float = 1e-10) -> SchattenReport:
    """Compare ``||A||_{I_p(l^2_{(w1)}, l^2_{(w2)})}`` with ``||A||_{U^p(w0)}``.

    ``w0`` is the pair quotient ``w2(j)/w1(k)``.  The inequality is only
    asserted for ``p <= 2``; with ``probe=True`` larger ``p`` are allowed and
    the report carries no verdict.
    """
    p = parse_exponent(p)
    if p > 2 and not probe:
        raise ValueError(f"the embedding is only asserted for p <= 2, got p={p}; use probe mode")
    i_p = schatten_norm(singular_values(A, w1, w2), p)
    u_p = u_norm(A, p, p, pair_quotient_array(A, w1, w2))
    passed = None if p > 2 else bool(i_p <= u_p * (1 + rtol))
    return SchattenReport(i_p, u_p, passed)


@dataclass
class CompositionReport:
    lhs: float
    rhs: float
    passed: bool


def check_holder_composition(T1: np.ndarray, T2: np.ndarray, p0, p1, p2, rtol: float = 1e-10) -> CompositionReport:
    """``||T2 T1||_{I_{p0}} <= ||T1||_{I_{p1}} ||T2||_{I_{p2}}`` with ``1/p0 = 1/p1 + 1/p2``."""
    if not holder_holds(p0, p1, p2):
        raise ExponentError(f"1/p0 = 1/p1 + 1/p2 fails for {(p0, p1, p2)}")
    T1, T2 = np.asarray(T1), np.asarray(T2)
    lhs = schatten_of(T2 @ T1, p0)
    rhs = schatten_of(T1, p1) * schatten_of(T2, p2)
    return CompositionReport(lhs, rhs, bool(lhs <= rhs * (1 + rtol)))


def check_p_triangle(summands: Sequence[np.ndarray], p, rtol: float = 1e-10) -> CompositionReport:
    """``||sum T_k||_{I_p}^p <= sum ||T_k||_{I_p}^p`` for ``p <= 1``."""
    p = parse_exponent(p)
    if p > 1:
        raise ValueError(f"the p-triangle inequality needs p <= 1, got {p}")
    mats = [np.asarray(T) for T in summands]
    if not mats:
        return CompositionReport(0.0, 0.0, True)
    if len({m.shape for m in mats}) != 1:
        raise ValueError("summands have different shapes")
    lhs = schatten_of(sum(mats), p) ** p
    rhs = float(sum(schatten_of(m, p) ** p for m in mats))
    return CompositionReport(lhs, rhs, bool(lhs <= rhs * (1 + rtol)))


def decay_bound_holds(s: SingularSpectrum, p) -> bool:
    """``sigma_j <= ||s||_p j^{-1/p}`` for every ``j``."""
    norm = schatten_norm(s, p)
    p = parse_exponent(p)
    vals = s.as_array()
    j = np.arange(1, vals.size + 1)
    bound = norm * (j ** (-1.0 / p) if not math.isinf(p) else 1.0)
    return bool(np.all(vals <= bound * (1 + 1e-12)))


def gram_sqrt(G: np.ndarray, inverse: bool = False) -> np.ndarray:
    """Hermitian square root (or inverse square root) of a positive definite matrix."""
    vals, vecs = np.linalg.eigh(G)
    if vals.min() <= 0:
        raise np.linalg.LinAlgError("Gram matrix is not positive definite")
    r = vals ** (-0.5 if inverse else 0.5)
    return (vecs * r) @ vecs.conj().T

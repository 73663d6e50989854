"""Mixed quasi-norms on finite lattices and uniform grids, plus discrete convolution.

Reduction order: axes are first permuted by ``sigma``; then axis 0 of the
permuted array is reduced with ``p[0]``, the next one with ``p[1]`` and so on.
Exponents below ``LOG_SPACE_THRESHOLD`` are evaluated in log space.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.signal import convolve as _sp_convolve
from scipy.special import logsumexp

from .exponents import INF, MixedExponent, as_mixed, parse_exponent, recip
from .weights import Lattice, Weight, lattice_weights

LOG_SPACE_THRESHOLD = 0.1


@dataclass
class SequenceArray:
    """Complex sequence on a finite lattice, stored in lexicographic order."""

    lattice: Lattice
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=complex).reshape(-1)
        if vals.size != self.lattice.size:
            raise ValueError(f"{vals.size} values for a lattice with {self.lattice.size} points")
        if not np.all(np.isfinite(vals)):
            raise ValueError("sequence values must be finite")
        self.values = vals

    def as_array(self) -> np.ndarray:
        """Values reshaped to the lattice box."""
        return self.values.reshape(self.lattice.shape)


@dataclass
class GridFunction:
    """Uniform samples of a function on a box of ``R^d``."""

    values: np.ndarray
    step: tuple[float, ...]

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=complex)
        step = tuple(float(s) for s in np.atleast_1d(self.step))
        if len(step) == 1 and vals.ndim > 1:
            step = step * vals.ndim
        if len(step) != vals.ndim:
            raise ValueError(f"{len(step)} steps for a {vals.ndim}-dimensional grid")
        if any(not (s > 0) for s in step):
            raise ValueError("grid steps must be positive")
        self.values = vals
        self.step = step

    @property
    def dim(self) -> int:
        return self.values.ndim

    @property
    def n(self) -> tuple[int, ...]:
        return self.values.shape


def lp_reduce(x: np.ndarray, p: float, axis: int = 0, step: float = 1.0) -> np.ndarray:
    """``(sum |x|^p step)^{1/p}`` along ``axis`` (max for ``p = inf``).

    ``x`` is assumed nonnegative.  Finite ``p`` uses max-scaling to avoid
    overflow; ``p < LOG_SPACE_THRESHOLD`` goes through ``logsumexp``.
    """
    x = np.asarray(x, dtype=float)
    if math.isinf(p):
        return np.max(x, axis=axis)
    if p < LOG_SPACE_THRESHOLD:
        with np.errstate(divide="ignore"):
            logs = np.log(x)
        lse = logsumexp(p * logs, axis=axis) + math.log(step)
        with np.errstate(over="ignore"):
            out = np.exp(lse / p)
        return np.where(np.isneginf(lse), 0.0, out)
    scale = np.max(x, axis=axis, keepdims=True)
    safe = np.where(scale > 0, scale, 1.0)
    s = np.sum((x / safe) ** p, axis=axis) * step
    return np.squeeze(safe, axis=axis) * s ** (1.0 / p)


def _mixed_reduce(mag: np.ndarray, e: MixedExponent, steps: Sequence[float]) -> float:
    g = np.transpose(mag, e.sigma)
    steps = [steps[s] for s in e.sigma]
    for p, st in zip(e.p, steps):
        g = lp_reduce(g, p, axis=0, step=st)
    return float(g)


def mixed_seq_norm(f: SequenceArray, e, w: "Weight | np.ndarray | None" = None) -> float:
    """Weighted mixed quasi-norm ``||f||_{l^p_{sigma,(w)}}`` with counting measure."""
    d = f.lattice.dim
    e = as_mixed(e, d)
    mag = np.abs(f.values) * lattice_weights(w, f.lattice)
    return _mixed_reduce(mag.reshape(f.lattice.shape), e, [1.0] * d)


def mixed_array_norm(arr: np.ndarray, e, weights: np.ndarray | None = None) -> float:
    """Mixed quasi-norm of a plain array with counting measure on every axis."""
    arr = np.asarray(arr)
    e = as_mixed(e, arr.ndim)
    mag = np.abs(arr) if weights is None else np.abs(arr) * weights
    return _mixed_reduce(mag, e, [1.0] * arr.ndim)


def mixed_grid_norm(F: GridFunction, e, w: "Weight | np.ndarray | None" = None, points: np.ndarray | None = None) -> float:
    """Riemann-sum analogue of :func:`mixed_seq_norm` on a uniform grid.

    ``w`` may be a weight array of the grid shape, or a :class:`Weight`
    evaluated at ``points`` (an array of shape ``grid_shape + (d,)``).
    """
    e = as_mixed(e, F.dim)
    mag = np.abs(F.values)
    if w is not None:
        if isinstance(w, np.ndarray):
            mag = mag * w
        else:
            if points is None:
                raise ValueError("evaluating a Weight on a grid needs the sample points")
            mag = mag * np.asarray(w(points)).reshape(mag.shape)
    return _mixed_reduce(mag, e, list(F.step))


def flat_norm(x: np.ndarray, p) -> float:
    """Plain ``l^p`` quasi-norm of all entries of ``x``."""
    p = parse_exponent(p)
    return float(lp_reduce(np.abs(np.asarray(x)).reshape(-1), p))


def convolve(h: SequenceArray, c: SequenceArray) -> SequenceArray:
    """``(h*c)(j) = sum_k h(k) c(j-k)`` on the sum box, zero outside the inputs."""
    if h.lattice.theta != c.lattice.theta:
        raise ValueError(f"incompatible lattice steps {h.lattice.theta} and {c.lattice.theta}")
    if h.lattice.period is not None or c.lattice.period is not None:
        raise ValueError("convolution is defined on truncated (non-periodic) lattices")
    out = _sp_convolve(h.as_array(), c.as_array(), method="direct")
    box = tuple((a[0] + b[0], a[1] + b[1]) for a, b in zip(h.lattice.box, c.lattice.box))
    return SequenceArray(Lattice(h.lattice.theta, box), out.reshape(-1))


@dataclass
class InequalityReport:
    lhs: float
    rhs: float
    passed: bool

    @property
    def ratio(self) -> float:
        if self.rhs == 0:
            return 0.0 if self.lhs == 0 else INF
        return self.lhs / self.rhs


def check_young_quasi(h: SequenceArray, c: SequenceArray, p, q: float, rtol: float = 1e-12) -> InequalityReport:
    """``||h*c||_{l^p} <= ||h||_{l^q} ||c||_{l^p}`` for ``q <= 1``, ``q <= min(p)``."""
    q = parse_exponent(q)
    if q > 1:
        raise ValueError(f"q={q} > 1: use check_young for the Banach range")
    e = as_mixed(p, c.lattice.dim)
    if q > e.min():
        raise ValueError(f"q={q} exceeds min(p)={e.min()}")
    lhs = mixed_seq_norm(convolve(h, c), e)
    rhs = mixed_seq_norm(h, MixedExponent.uniform(q, h.lattice.dim)) * mixed_seq_norm(c, e)
    return InequalityReport(lhs, rhs, bool(lhs <= rhs * (1 + rtol)))


def check_young(h: SequenceArray, c: SequenceArray, p, q, r, rtol: float = 1e-12) -> InequalityReport:
    """Classical Young inequality ``||h*c||_r <= ||h||_q ||c||_p`` with ``1/p + 1/q = 1 + 1/r``."""
    p, q, r = (parse_exponent(v) for v in (p, q, r))
    if min(p, q, r) < 1:
        raise ValueError("classical Young inequality needs p, q, r >= 1")
    if recip(p) + recip(q) != 1 + recip(r):
        raise ValueError(f"1/p + 1/q != 1 + 1/r for (p, q, r) = {(p, q, r)}")
    d = h.lattice.dim
    lhs = mixed_seq_norm(convolve(h, c), MixedExponent.uniform(r, d))
    rhs = mixed_seq_norm(h, MixedExponent.uniform(q, d)) * mixed_seq_norm(c, MixedExponent.uniform(p, d))
    return InequalityReport(lhs, rhs, bool(lhs <= rhs * (1 + rtol)))

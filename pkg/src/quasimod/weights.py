"""Lattices ``T_theta Z^d`` restricted to finite boxes, and weight functions.

Weights form a small closed algebra of symbolic forms (constants, Japanese
brackets ``<x>^s``, exponentials ``e^{r|x|}``, tensor products, pointwise
products and quotients, pair quotients ``w2(j)/w1(k)`` and composition with
a linear map).  Keeping them symbolic makes moderateness and the pair-weight
conditions machine-checkable on finite boxes.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Any, Iterable, Sequence

import numpy as np


@dataclass(frozen=True)
class Lattice:
    """Finite box ``{(theta_1 j_1, ..., theta_d j_d) : lo_i <= j_i <= hi_i}``.

    With ``period`` set, the index set is cyclic (``j_i`` taken modulo
    ``period[i]``); the box must then be ``0..period[i]-1`` and coordinates
    use the centered representative of each index.
    """

    theta: tuple[float, ...]
    box: tuple[tuple[int, int], ...]
    period: tuple[int, ...] | None = None

    def __post_init__(self):
        theta = tuple(float(t) for t in self.theta)
        box = tuple((int(lo), int(hi)) for lo, hi in self.box)
        if not theta:
            raise ValueError("lattice dimension must be at least 1")
        if len(theta) != len(box):
            raise ValueError("theta and box have different dimensions")
        if any(not (t > 0) or not math.isfinite(t) for t in theta):
            raise ValueError(f"theta must be positive and finite, got {theta}")
        if any(hi < lo for lo, hi in box):
            raise ValueError(f"empty index box {box}")
        if self.period is not None:
            period = tuple(int(n) for n in self.period)
            if len(period) != len(theta) or any(b != (0, n - 1) for b, n in zip(box, period)):
                raise ValueError("a periodic lattice needs box 0..period-1 on every axis")
            object.__setattr__(self, "period", period)
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "box", box)

    @classmethod
    def cyclic(cls, theta: Sequence[float], period: Sequence[int]) -> "Lattice":
        return cls(tuple(theta), tuple((0, n - 1) for n in period), tuple(period))

    @property
    def dim(self) -> int:
        return len(self.theta)

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(hi - lo + 1 for lo, hi in self.box)

    @property
    def size(self) -> int:
        return int(np.prod(self.shape))

    def indices(self) -> np.ndarray:
        """Integer multi-indices, shape ``(size, d)``, lexicographic order."""
        axes = [np.arange(lo, hi + 1) for lo, hi in self.box]
        grid = np.meshgrid(*axes, indexing="ij")
        idx = np.stack([g.ravel() for g in grid], axis=-1)
        if self.period is not None:
            per = np.asarray(self.period)
            idx = np.where(idx >= (per + 1) // 2, idx - per, idx)
        return idx

    def points(self) -> np.ndarray:
        """Lattice points ``T_theta j``, shape ``(size, d)``."""
        return self.indices() * np.asarray(self.theta)

    def index_differences(self) -> np.ndarray:
        """All row-minus-column index differences, shape ``(size, size, d)``.

        On periodic lattices differences are reduced modulo the period.
        """
        idx = self.indices()
        diff = idx[:, None, :] - idx[None, :, :]
        if self.period is not None:
            diff = np.mod(diff, np.asarray(self.period))
        return diff


def make_lattice(theta: Sequence[float], box: Sequence[Sequence[int]] | Sequence[int]) -> Lattice:
    """Build a :class:`Lattice`; a bare ``(lo, hi)`` pair is accepted for d=1."""
    theta = tuple(theta) if isinstance(theta, (list, tuple, np.ndarray)) else (theta,)
    if len(box) == 2 and all(isinstance(b, (int, np.integer)) for b in box):
        box = (tuple(box),)
    return Lattice(tuple(theta), tuple(tuple(b) for b in box))


_KINDS = ("const", "poly", "exp", "tensor", "product", "quotient", "pair_quotient", "linear")


@dataclass(frozen=True)
class Weight:
    """Symbolic positive weight.

    Use the constructors (:meth:`const`, :meth:`poly`, :meth:`exp`,
    :meth:`tensor`, :meth:`pair_quotient`, :meth:`linear`) and the ``*`` and
    ``/`` operators rather than filling the fields by hand.
    """

    kind: str
    value: float = 1.0
    parts: tuple["Weight", ...] = ()
    matrix: tuple[tuple[float, ...], ...] = ()

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"unknown weight kind {self.kind!r}")
        if self.kind == "const" and not (self.value > 0 and math.isfinite(self.value)):
            raise ValueError("constant weight must be positive and finite")

    # constructors -------------------------------------------------------
    @classmethod
    def const(cls, c: float = 1.0) -> "Weight":
        return cls("const", float(c))

    @classmethod
    def poly(cls, s: float) -> "Weight":
        """``<x>^s`` with ``<x> = (1 + |x|^2)^{1/2}``."""
        return cls("poly", float(s))

    @classmethod
    def exp(cls, r: float) -> "Weight":
        """``e^{r|x|}``."""
        return cls("exp", float(r))

    @classmethod
    def tensor(cls, *parts: "Weight") -> "Weight":
        """Tensor product; the coordinates are split evenly between the parts."""
        if not parts:
            raise ValueError("tensor product needs at least one factor")
        return cls("tensor", parts=tuple(parts))

    @classmethod
    def pair_quotient(cls, w2: "Weight", w1: "Weight") -> "Weight":
        """Weight on pairs ``(j, k)`` given by ``w2(j) / w1(k)``."""
        return cls("pair_quotient", parts=(w2, w1))

    @classmethod
    def linear(cls, w: "Weight", matrix: Sequence[Sequence[float]]) -> "Weight":
        """``x -> w(M x)`` for a real matrix ``M``."""
        mat = tuple(tuple(float(v) for v in row) for row in matrix)
        return cls("linear", parts=(w,), matrix=mat)

    def __mul__(self, other: "Weight") -> "Weight":
        return Weight("product", parts=(self, other))

    def __truediv__(self, other: "Weight") -> "Weight":
        return Weight("quotient", parts=(self, other))

    @property
    def is_trivial(self) -> bool:
        return self.kind == "const" and self.value == 1.0

    # evaluation ---------------------------------------------------------
    def _raw(self, x: np.ndarray) -> np.ndarray:
        kind = self.kind
        if kind == "const":
            return np.full(x.shape[:-1], self.value)
        if kind == "poly":
            return (1.0 + np.sum(x * x, axis=-1)) ** (self.value / 2)
        if kind == "exp":
            return np.exp(self.value * np.sqrt(np.sum(x * x, axis=-1)))
        if kind == "tensor":
            n = len(self.parts)
            dim = x.shape[-1]
            if dim % n:
                raise ValueError(f"cannot split {dim} coordinates among {n} tensor factors")
            step = dim // n
            out = np.ones(x.shape[:-1])
            for i, part in enumerate(self.parts):
                out = out * part._raw(x[..., i * step:(i + 1) * step])
            return out
        if kind == "product":
            return self.parts[0]._raw(x) * self.parts[1]._raw(x)
        if kind == "quotient":
            return self.parts[0]._raw(x) / self.parts[1]._raw(x)
        if kind == "pair_quotient":
            dim = x.shape[-1]
            if dim % 2:
                raise ValueError("pair weights need an even number of coordinates")
            half = dim // 2
            return self.parts[0]._raw(x[..., :half]) / self.parts[1]._raw(x[..., half:])
        if kind == "linear":
            mat = np.asarray(self.matrix)
            return self.parts[0]._raw(x @ mat.T)
        raise AssertionError(kind)

    def __call__(self, x: Any) -> np.ndarray | float:
        arr = np.asarray(x, dtype=float)
        scalar = arr.ndim <= 1
        if arr.ndim == 0:
            arr = arr.reshape(1, 1)
        elif arr.ndim == 1:
            arr = arr.reshape(1, -1)
        with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
            out = self._raw(arr)
        if not np.all(np.isfinite(out)):
            raise OverflowError(f"weight {self.describe()} is not finite on the given points")
        if not np.all(out > 0):
            raise OverflowError(f"weight {self.describe()} underflows to zero on the given points")
        return float(out[0]) if scalar else out

    # serialisation --------------------------------------------------------
    def to_dict(self) -> dict:
        if self.kind == "const":
            return {"kind": "const", "c": self.value}
        if self.kind == "poly":
            return {"kind": "poly", "s": self.value}
        if self.kind == "exp":
            return {"kind": "exp", "r": self.value}
        if self.kind == "linear":
            return {"kind": "linear", "of": self.parts[0].to_dict(), "matrix": [list(r) for r in self.matrix]}
        return {"kind": self.kind, "parts": [p.to_dict() for p in self.parts]}

    @classmethod
    def from_dict(cls, spec: dict) -> "Weight":
        kind = spec.get("kind")
        if kind in (None, "const", "constant", "trivial"):
            return cls.const(spec.get("c", 1.0))
        if kind in ("poly", "polynomial"):
            return cls.poly(spec["s"])
        if kind in ("exp", "exponential"):
            return cls.exp(spec["r"])
        if kind == "linear":
            return cls.linear(cls.from_dict(spec["of"]), spec["matrix"])
        if kind in ("tensor", "product", "quotient", "pair_quotient"):
            parts = tuple(cls.from_dict(p) for p in spec["parts"])
            if kind == "tensor":
                return cls.tensor(*parts)
            if len(parts) != 2:
                raise ValueError(f"{kind} weight needs exactly two parts")
            if kind == "pair_quotient":
                return cls.pair_quotient(*parts)
            return parts[0] * parts[1] if kind == "product" else parts[0] / parts[1]
        raise ValueError(f"unknown weight kind {kind!r}")

    def describe(self) -> str:
        if self.kind == "const":
            return f"{self.value:g}"
        if self.kind == "poly":
            return f"<x>^{self.value:g}"
        if self.kind == "exp":
            return f"exp({self.value:g}|x|)"
        if self.kind == "tensor":
            return " ⊗ ".join(f"({p.describe()})" for p in self.parts)
        if self.kind == "product":
            return f"({self.parts[0].describe()})·({self.parts[1].describe()})"
        if self.kind == "quotient":
            return f"({self.parts[0].describe()})/({self.parts[1].describe()})"
        if self.kind == "pair_quotient":
            return f"{self.parts[0].describe()}(j)/{self.parts[1].describe()}(k)"
        return f"{self.parts[0].describe()}∘M"


TRIVIAL = Weight.const(1.0)


def weight_eval(w: Weight, x) -> float | np.ndarray:
    """Evaluate ``w`` at a point (or an array of points, last axis = coordinates)."""
    return w(x)


def as_weight(w: "Weight | dict | None") -> Weight:
    if w is None:
        return TRIVIAL
    if isinstance(w, dict):
        return Weight.from_dict(w)
    return w


def lattice_weights(w: "Weight | np.ndarray | None", lattice: Lattice) -> np.ndarray:
    """Weight values at the lattice points (flattened, lexicographic)."""
    if w is None:
        return np.ones(lattice.size)
    if isinstance(w, np.ndarray):
        arr = np.asarray(w, dtype=float).ravel()
        if arr.size != lattice.size:
            raise ValueError("weight array does not match lattice size")
        return arr
    return np.asarray(as_weight(w)(lattice.points())).reshape(lattice.size)


def pair_weights(w: "Weight | np.ndarray | None", lattice: Lattice) -> np.ndarray:
    """Weight values ``w(j, k)`` on all lattice pairs, shape ``(size, size)``."""
    n = lattice.size
    if w is None:
        return np.ones((n, n))
    if isinstance(w, np.ndarray):
        arr = np.asarray(w, dtype=float)
        if arr.shape != (n, n):
            raise ValueError(f"pair weight array has shape {arr.shape}, expected {(n, n)}")
        return arr
    w = as_weight(w)
    if w.kind == "const":
        return np.full((n, n), w.value)
    pts = lattice.points()
    if w.kind == "pair_quotient":
        return np.outer(w.parts[0](pts).reshape(n), 1.0 / w.parts[1](pts).reshape(n))
    d = lattice.dim
    xy = np.empty((n, n, 2 * d))
    xy[..., :d] = pts[:, None, :]
    xy[..., d:] = pts[None, :, :]
    return np.asarray(w(xy)).reshape(n, n)


@dataclass
class ModerateReport:
    max_ratio: float
    witness: tuple[tuple[float, ...], tuple[float, ...]]
    constant: float | None = None
    passed: bool | None = None


def check_moderate(w: Weight, v: Weight, sample_box: Iterable, constant: float | None = None) -> ModerateReport:
    """Largest sampled value of ``w(x+y) / (w(x) v(y))`` over ``x, y`` in the box.

    ``sample_box`` is a finite point set (array of shape ``(n, d)`` or a
    :class:`Lattice`).  With ``constant`` given the report also says whether
    the sampled ratio stays below it.
    """
    pts = sample_box.points() if isinstance(sample_box, Lattice) else np.atleast_2d(np.asarray(sample_box, dtype=float))
    if pts.ndim == 2 and pts.shape[0] == 1 and pts.shape[1] > 1 and not isinstance(sample_box, Lattice):
        # a flat 1-d list of scalars
        if np.asarray(sample_box).ndim == 1:
            pts = pts.T
    wx = np.asarray(w(pts)).reshape(-1)
    vy = np.asarray(v(pts)).reshape(-1)
    sums = pts[:, None, :] + pts[None, :, :]
    wsum = np.asarray(w(sums)).reshape(len(pts), len(pts))
    ratio = wsum / (wx[:, None] * vy[None, :])
    i, j = np.unravel_index(int(np.argmax(ratio)), ratio.shape)
    max_ratio = float(ratio[i, j])
    passed = None if constant is None else bool(max_ratio <= constant * (1 + 1e-12))
    return ModerateReport(max_ratio, (tuple(pts[i]), tuple(pts[j])), constant, passed)


@dataclass
class PairWeightReport:
    kind: str
    worst_ratio: float
    witness: tuple[int, ...]
    passed: bool
    tol: float = 1e-12


def check_pair_weight_condition(kind: str, w0, w1, w2, lattice: Lattice, tol: float = 1e-12) -> PairWeightReport:
    """Exhaustively verify a weight compatibility condition on a finite lattice.

    ``wc1``: ``w1(j,j) w2(j,k) <= w0(j,k)``;
    ``wc2``: ``w1(j,k) w2(k,k) <= w0(j,k)``;
    ``wc3``: ``w1(j,m) w2(m,k) <= w0(j,k)`` for all ``j, k, m``;
    ``wi1``: ``w2(j) / w1(k) <= w0(j,k)`` with ``w1, w2`` weights on the lattice.

    The reported ratio is ``lhs / rhs``; the witness holds flat lattice
    indices.
    """
    W0 = pair_weights(w0, lattice)
    if kind == "wi1":
        a1 = lattice_weights(w1, lattice)
        a2 = lattice_weights(w2, lattice)
        ratio = np.outer(a2, 1.0 / a1) / W0
    elif kind == "wc1":
        W1, W2 = pair_weights(w1, lattice), pair_weights(w2, lattice)
        ratio = np.diag(W1)[:, None] * W2 / W0
    elif kind == "wc2":
        W1, W2 = pair_weights(w1, lattice), pair_weights(w2, lattice)
        ratio = W1 * np.diag(W2)[None, :] / W0
    elif kind == "wc3":
        W1, W2 = pair_weights(w1, lattice), pair_weights(w2, lattice)
        # ratio[j, m, k] = W1[j, m] W2[m, k] / W0[j, k]
        ratio = W1[:, :, None] * W2[None, :, :] / W0[:, None, :]
    else:
        raise ValueError(f"unknown weight condition {kind!r}")
    flat = int(np.argmax(ratio))
    witness = tuple(int(i) for i in np.unravel_index(flat, ratio.shape))
    worst = float(ratio.flat[flat])
    return PairWeightReport(kind, worst, witness, bool(worst <= 1 + tol), tol)


def sample_box(half_width: float, n: int, d: int) -> np.ndarray:
    """Uniform sample grid of ``[-half_width, half_width]^d`` with ``n`` points per axis."""
    axis = np.linspace(-half_width, half_width, n)
    return np.array(list(itertools.product(axis, repeat=d)))

"""Lebesgue exponents in (0, inf] and their reciprocal arithmetic.

Exponents are plain floats with ``math.inf`` standing for the sup-norm
exponent.  Relations between exponents (Hoelder-type identities, the
continuity conditions for matrix operators) are checked on reciprocals in
exact rational arithmetic, with ``1/inf = 0`` and ``1/0 = inf``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence, Union

INF = math.inf

ExponentLike = Union[float, int, str, Fraction]

# Denominator cap used when turning floats such as 2/3 into exact rationals.
_MAX_DENOMINATOR = 10**6


def parse_exponent(p: ExponentLike) -> float:
    """Convert ``p`` (number, ``"inf"``, ``"2/3"``) to a float in (0, inf]."""
    if isinstance(p, str):
        s = p.strip().lower()
        if s in ("inf", "infinity", "oo", "∞"):
            value = INF
        else:
            value = float(Fraction(s))
    else:
        value = float(p)
    if math.isnan(value) or value <= 0:
        raise ValueError(f"exponent must lie in (0, inf], got {p!r}")
    return value


def recip(p: ExponentLike) -> Fraction:
    """Exact reciprocal ``1/p`` with ``1/inf = 0``."""
    if isinstance(p, str):
        s = p.strip().lower()
        if s in ("inf", "infinity", "oo", "∞"):
            return Fraction(0)
        frac = Fraction(s)
        if frac <= 0:
            raise ValueError(f"exponent must lie in (0, inf], got {p!r}")
        return 1 / frac
    if isinstance(p, Fraction):
        if p <= 0:
            raise ValueError(f"exponent must lie in (0, inf], got {p!r}")
        return 1 / p
    value = parse_exponent(p)
    if math.isinf(value):
        return Fraction(0)
    return 1 / Fraction(value).limit_denominator(_MAX_DENOMINATOR)


def from_recip(r: Fraction) -> float:
    """Inverse of :func:`recip`; ``1/0`` is ``inf``."""
    if r < 0:
        raise ValueError("negative reciprocal exponent")
    return INF if r == 0 else float(1 / r)


def conjugate_exponent(p: ExponentLike) -> float:
    """Conjugate exponent extended to (0, inf].

    ``inf -> 1``, ``1 < p < inf -> p/(p-1)`` and ``0 < p <= 1 -> inf``.
    """
    value = parse_exponent(p)
    if math.isinf(value):
        return 1.0
    if value <= 1:
        return INF
    return value / (value - 1)


def holder_holds(p0: ExponentLike, p1: ExponentLike, p2: ExponentLike, *, equality: bool = True) -> bool:
    """Check ``1/p0 = 1/p1 + 1/p2`` (or ``<=`` when ``equality`` is False)."""
    lhs = recip(p0)
    rhs = recip(p1) + recip(p2)
    return lhs == rhs if equality else lhs <= rhs


@dataclass(frozen=True)
class MixedExponent:
    """Exponent vector ``p`` in (0, inf]^d together with an axis permutation.

    ``sigma`` is 0-based: after permuting, the k-th reduced axis is the
    original axis ``sigma[k]``, and it is reduced with ``p[k]``.
    """

    p: tuple[float, ...]
    sigma: tuple[int, ...] | None = None

    def __post_init__(self):
        p = tuple(parse_exponent(v) for v in self.p)
        if not p:
            raise ValueError("empty exponent vector")
        sigma = tuple(range(len(p))) if self.sigma is None else tuple(int(s) for s in self.sigma)
        if sorted(sigma) != list(range(len(p))):
            raise ValueError(f"sigma={sigma} is not a permutation of 0..{len(p) - 1}")
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "sigma", sigma)

    @classmethod
    def uniform(cls, p: ExponentLike, d: int) -> "MixedExponent":
        return cls((parse_exponent(p),) * d)

    @property
    def dim(self) -> int:
        return len(self.p)

    def min(self) -> float:
        return min(self.p)

    def max(self) -> float:
        return max(self.p)

    def recips(self) -> tuple[Fraction, ...]:
        return tuple(recip(v) for v in self.p)


def as_mixed(e: "MixedExponent | Sequence[ExponentLike] | ExponentLike", d: int) -> MixedExponent:
    """Coerce a scalar, sequence or :class:`MixedExponent` to dimension ``d``."""
    if isinstance(e, MixedExponent):
        if e.dim != d:
            raise ValueError(f"exponent has dimension {e.dim}, expected {d}")
        return e
    if isinstance(e, (list, tuple)):
        m = MixedExponent(tuple(e))
        if m.dim != d:
            raise ValueError(f"exponent has dimension {m.dim}, expected {d}")
        return m
    return MixedExponent.uniform(e, d)


def pq_conditions(p1: Sequence[ExponentLike], p2: Sequence[ExponentLike], p: ExponentLike, q: ExponentLike) -> list[str]:
    """Violations of the admissibility conditions for matrix continuity.

    Required: ``1/p2 - 1/p1 = 1/p + min(0, 1/q - 1)`` componentwise and
    ``q <= min(p2) <= max(p2) <= p``.  Returns a list of human readable
    violations; an empty list means the tuple is admissible.
    """
    if len(p1) != len(p2):
        return [f"dimension mismatch: len(p1)={len(p1)} vs len(p2)={len(p2)}"]
    r1 = [recip(v) for v in p1]
    r2 = [recip(v) for v in p2]
    rp, rq = recip(p), recip(q)
    target = rp + min(Fraction(0), rq - 1)
    problems = []
    for i, (a, b) in enumerate(zip(r1, r2)):
        if b - a != target:
            problems.append(
                f"axis {i}: 1/p2 - 1/p1 = {b - a} but 1/p + min(0, 1/q - 1) = {target}"
            )
    # q <= p2_i  <=>  1/q >= 1/p2_i ;  p2_i <= p  <=>  1/p2_i >= 1/p
    if any(rq < b for b in r2):
        problems.append(f"q = {from_recip(rq)} exceeds min(p2) = {from_recip(max(r2))}")
    if any(b < rp for b in r2):
        problems.append(f"max(p2) = {from_recip(min(r2))} exceeds p = {from_recip(rp)}")
    return problems

"""Exploratory growth probe for Schatten norms of modulated single-atom symbols.

The symbol is ``a(X) = sum_k c(k) phi(X) e^{-2 i sigma(X, k)}`` on ``Z_N^2``
with ``sigma((x, xi), (y, eta)) = y xi - x eta``, a Gaussian ``phi`` and
``k`` running over a coarse sublattice.  Coefficients lie in ``l^q`` but not
in ``l^r``; the table records how ``||Op^w(a)||_{I_r}`` behaves as more terms
are kept.  A control column uses coefficients that do lie in ``l^r``.
Nothing here is a pass/fail check: the finite model cannot decide an
inclusion between infinite-dimensional classes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .exponents import parse_exponent
from .gabor import gaussian_window
from .psido import op_t_matrix
from .schatten import schatten_of


@dataclass
class GrowthTable:
    p: float
    q: float
    r: float
    N: int
    spacing: int
    sizes: list[int]
    coeff_norm: list[float] = field(default_factory=list)
    schatten: list[float] = field(default_factory=list)
    control: list[float] = field(default_factory=list)

    @property
    def monotone(self) -> bool:
        s = np.asarray(self.schatten)
        return bool(np.all(np.diff(s) >= -1e-12 * np.abs(s[1:])))

    def rows(self) -> list[dict]:
        return [{"size": n, "coeff_norm_q": c, "schatten_r": s, "control_r": k}
                for n, c, s, k in zip(self.sizes, self.coeff_norm, self.schatten, self.control)]

    def to_csv(self) -> str:
        lines = [f"# p={self.p!r} q={self.q!r} r={self.r!r} N={self.N} spacing={self.spacing}",
                 "size,coeff_norm_q,schatten_r,control_r"]
        lines += [f"{n},{c!r},{s!r},{k!r}" for n, c, s, k in
                  zip(self.sizes, self.coeff_norm, self.schatten, self.control)]
        return "\n".join(lines) + "\n"


def _ordered_shifts(N: int, spacing: int) -> np.ndarray:
    """Sublattice indices ``(i, j)`` sorted by ``<(i, j)>`` with a lexicographic tie-break."""
    m = (N // spacing) // 2
    ij = np.array([(i, j) for i in range(-m, m + 1) for j in range(-m, m + 1)])
    bracket = 1 + (ij**2).sum(axis=1)
    order = np.lexsort((ij[:, 1], ij[:, 0], bracket))
    return ij[order]


def _atoms(N: int, spacing: int, shifts: np.ndarray) -> np.ndarray:
    """``phi(X) e^{-2 i sigma(X, k)}`` for every shift, shape ``(len(shifts), N, N)``."""
    phi = gaussian_window((N, N), 2)
    x = np.arange(N)
    k = shifts * spacing
    # 2 sigma(X, k) in grid units: 2 (2 pi / N)(k1 xi - x k2)
    ph = (k[:, 0, None, None] * x[None, None, :] - x[None, :, None] * k[:, 1, None, None])
    return phi[None] * np.exp(-2j * np.pi * 2 * (ph % N) / N)


def sharpness_probe(p, q, r, sizes, N: int = 127, spacing: int = 7) -> GrowthTable:
    """Tabulate ``||Op^w(a)||_{I_r}`` against the number of kept terms.

    ``p`` labels the quasi-Banach scale of the experiment and is recorded
    only.  Coefficients are ``c(k) = <k>^{-2/q} (1 + log <k>)^{-2/q}`` (in
    ``l^q`` but not ``l^r``); the control uses ``<k>^{-3/r}``.
    """
    p, q, r = (parse_exponent(v) for v in (p, q, r))
    if not q > r:
        raise ValueError(f"the probe needs q > r (got q={q}, r={r}); with q <= r there is nothing to probe")
    if math.isinf(q):
        raise ValueError("q must be finite for the coefficient tail")
    sizes = sorted(int(n) for n in sizes)
    shifts = _ordered_shifts(N, spacing)
    if not sizes or sizes[0] < 1 or sizes[-1] > len(shifts):
        raise ValueError(f"sizes must lie in 1..{len(shifts)} for N={N}, spacing={spacing}")
    bracket = np.sqrt(1.0 + (shifts**2).sum(axis=1))
    c = bracket ** (-2.0 / q) * (1 + np.log(bracket)) ** (-2.0 / q)
    c_ctrl = bracket ** (-3.0 / r)
    atoms = _atoms(N, spacing, shifts[: sizes[-1]])
    table = GrowthTable(p, q, r, N, spacing, sizes)
    for n in sizes:
        a = np.tensordot(c[:n], atoms[:n], axes=1)
        b = np.tensordot(c_ctrl[:n], atoms[:n], axes=1)
        table.coeff_norm.append(float(np.sum(c[:n] ** q) ** (1 / q)))
        table.schatten.append(schatten_of(op_t_matrix(a, 0.5), r))
        table.control.append(schatten_of(op_t_matrix(b, 0.5), r))
    return table


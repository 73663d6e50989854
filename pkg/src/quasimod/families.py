"""Random test objects: lattice matrices, Gabor-atom signals and symbols.

Atom parameters are drawn in continuum units, independently of the grid
size, so one parameter list describes "the same" function on every ``Z_N``.
"""

from __future__ import annotations

import numpy as np

from .gabor import continuum_coords


def complex_gaussian(rng: np.random.Generator, shape) -> np.ndarray:
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def random_matrix(rng: np.random.Generator, n: int, kind: str = "dense") -> np.ndarray:
    """Test matrix of one of the kinds ``dense``, ``sparse``, ``banded``, ``diagonal``, ``rank-one``, ``zero-row``."""
    if kind == "dense":
        return complex_gaussian(rng, (n, n))
    if kind == "sparse":
        mask = rng.random((n, n)) < rng.uniform(0.05, 0.4)
        mask[rng.integers(n), rng.integers(n)] = True
        return complex_gaussian(rng, (n, n)) * mask
    if kind == "banded":
        i, j = np.indices((n, n))
        width = int(rng.integers(0, max(1, n // 4) + 1))
        return complex_gaussian(rng, (n, n)) * (np.abs(i - j) <= width)
    if kind == "diagonal":
        return np.diag(complex_gaussian(rng, n))
    if kind == "rank-one":
        return np.outer(complex_gaussian(rng, n), complex_gaussian(rng, n))
    if kind == "zero-row":
        A = complex_gaussian(rng, (n, n))
        rows = rng.random(n) < 0.3
        rows[rng.integers(n)] = False
        A[rows] = 0
        return A
    raise ValueError(f"unknown matrix kind {kind!r}")


def atom_params(rng: np.random.Generator, count: int, spread: float = 1.5, freq: float = 1.5) -> list[dict]:
    """Parameters of ``count`` signal atoms with summable, decaying coefficients."""
    out = []
    for k in range(count):
        c = complex(*(rng.standard_normal(2) / (1 + k) ** 1.5))
        out.append({"x": round(float(rng.uniform(-spread, spread)), 6),
                    "xi": round(float(rng.uniform(-freq, freq)), 6),
                    "re": round(c.real, 6), "im": round(c.imag, 6)})
    return out


def signal_from_atoms(N: int, atoms: list[dict], width: float = 1.0) -> np.ndarray:
    """``sum c exp(-(x - x0)^2 / (2 width^2)) e^{i xi0 x}`` sampled on ``Z_N``."""
    x = continuum_coords((N,))[0]
    f = np.zeros(N, dtype=complex)
    for a in atoms:
        f += complex(a["re"], a["im"]) * np.exp(-((x - a["x"]) ** 2) / (2 * width**2) + 1j * a["xi"] * x)
    return f


def symbol_atom_params(rng: np.random.Generator, count: int, spread: float = 1.5, freq: float = 1.5) -> list[dict]:
    out = []
    for k in range(count):
        c = complex(*(rng.standard_normal(2) / (1 + k) ** 1.5))
        vals = rng.uniform(-1, 1, 4)
        out.append({"x": round(float(spread * vals[0]), 6), "xi": round(float(spread * vals[1]), 6),
                    "eta": round(float(freq * vals[2]), 6), "y": round(float(freq * vals[3]), 6),
                    "re": round(c.real, 6), "im": round(c.imag, 6)})
    return out


def symbol_from_atoms(N: int, atoms: list[dict], width: float = 1.0) -> np.ndarray:
    """Superposition of phase-space Gabor atoms sampled on ``Z_N x Z_N``."""
    x = continuum_coords((N,))[0]
    X, XI = np.meshgrid(x, x, indexing="ij")
    a = np.zeros((N, N), dtype=complex)
    for p in atoms:
        g = np.exp(-((X - p["x"]) ** 2 + (XI - p["xi"]) ** 2) / (2 * width**2))
        a += complex(p["re"], p["im"]) * g * np.exp(1j * (p["eta"] * X + p["y"] * XI))
    return a

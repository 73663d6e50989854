"""Pseudo-differential operators on ``Z_N``: quantization, Wigner distributions and Gabor matrices.

Symbols are ``N x N`` arrays ``a[x, xi]``.  The Kohn-Nirenberg operator is

    (Op_0(a) f)(x) = N^{-1/2} sum_xi a(x, xi) fhat(xi) e^{2 pi i x xi / N},

with the unitary DFT ``fhat``.  Other quantizations are reached through the
calculus transform, which multiplies the 2D DFT of a symbol by
``exp(i (t1 - t2) 2 pi k l / N)`` on centered dual indices ``k, l``; on the
finite model this is exact, so ``Op_{t1}(a) = Op_{t2}(T(a, t1, t2))`` holds to
rounding error.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .exponents import parse_exponent, pq_conditions, recip
from .gabor import (
    GaborSystem,
    analysis,
    canonical_dual,
    continuum_coords,
    gaussian_window,
    grid_step,
    modulation_norm,
    signed_index,
    stft,
    stft_norms,
    stft_pq_norm,
    synthesis,
)
from .matrices import ExponentError, LatticeMatrix, u_norm
from .schatten import gram_sqrt, schatten_norm, spectrum_of
from .weights import Lattice, as_weight


def _square(a: np.ndarray) -> np.ndarray:
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"symbols are square N x N arrays, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("symbol values must be finite")
    return a


def unitary_dft(f: np.ndarray) -> np.ndarray:
    return np.fft.fft(f, norm="ortho")


def cyclic_lattice(N: int) -> Lattice:
    return Lattice.cyclic((grid_step(N),), (N,))


def op0_matrix(a: np.ndarray) -> np.ndarray:
    """Kernel of ``Op_0(a)``: ``K(x, y) = N^{-1/2} (F_2^{-1} a)(x, x - y)``."""
    a = _square(a)
    N = a.shape[0]
    G = np.fft.ifft(a, axis=1)
    x = np.arange(N)
    return G[x[:, None], (x[:, None] - x[None, :]) % N]


def op0(a: np.ndarray) -> LatticeMatrix:
    """``Op_0(a)`` as a matrix over the cyclic lattice ``Z_N``."""
    return LatticeMatrix(cyclic_lattice(a.shape[0]), op0_matrix(a))


def calculus_multiplier(N: int, s: float) -> np.ndarray:
    """``exp(i s 2 pi k l / N)`` on centered dual indices."""
    k = signed_index(N)
    return np.exp(1j * s * 2 * np.pi * np.outer(k, k) / N)


def calculus_transform(a: np.ndarray, t1: float, t2: float) -> np.ndarray:
    """``exp(i (t1 - t2) <D_x, D_xi>) a`` on the finite model."""
    a = _square(a)
    if t1 == t2:
        return a.copy()
    return np.fft.ifft2(np.fft.fft2(a) * calculus_multiplier(a.shape[0], t1 - t2))


def _check_t(t: float) -> float:
    t = float(t)
    if not 0.0 <= t <= 1.0:
        raise ValueError(f"quantization parameter must lie in [0, 1], got {t}")
    return t


def op_t_matrix(a: np.ndarray, t: float) -> np.ndarray:
    return op0_matrix(calculus_transform(a, _check_t(t), 0.0))


def op_t(a: np.ndarray, t: float) -> LatticeMatrix:
    """``Op_t(a) = Op_0(T(a, t, 0))``."""
    return LatticeMatrix(cyclic_lattice(a.shape[0]), op_t_matrix(a, t))


def rihaczek(f1: np.ndarray, f2: np.ndarray) -> np.ndarray:
    """``f1(x) conj(fhat2(xi)) e^{-2 pi i x xi / N}``."""
    f1 = np.asarray(f1, dtype=complex)
    f2 = np.asarray(f2, dtype=complex)
    if f1.shape != f2.shape or f1.ndim != 1:
        raise ValueError("Wigner distributions need two 1-d signals of equal length")
    N = f1.size
    x = np.arange(N)
    phase = np.exp(-2j * np.pi * np.outer(x, x) / N)
    return f1[:, None] * np.conj(unitary_dft(f2))[None, :] * phase


def rihaczek_window(phi1: np.ndarray, phi2: np.ndarray) -> np.ndarray:
    """Phase-space window ``Phi(x, xi) = phi1(x) conj(phi2hat(xi)) e^{-i x xi}``."""
    return rihaczek(phi1, phi2)


def wigner_t(f1: np.ndarray, f2: np.ndarray, t: float) -> np.ndarray:
    """``W^t_{f1,f2}``: the symbol with ``Op_t(W^t) f = N^{-1/2} (f, f2) f1``."""
    return calculus_transform(rihaczek(f1, f2), 0.0, _check_t(t))


def symplectic_ft(a: np.ndarray) -> np.ndarray:
    """``(F_sigma a)(x, xi) = ahat(-2 xi, 2 x)`` with the unitary 2D DFT; ``N`` odd.

    Doubling is a bijection of ``Z_N`` for odd ``N``, so no Jacobian factor
    appears and the map is an involution.
    """
    a = _square(a)
    N = a.shape[0]
    if N % 2 == 0:
        raise ValueError(f"symplectic Fourier transform needs odd N, got {N}")
    ah = np.fft.fft2(a, norm="ortho")
    x = np.arange(N)
    return ah[(-2 * x[None, :]) % N, (2 * x[:, None]) % N]


# ---------------------------------------------------------------------------
# Gabor matrix of a symbol


@dataclass
class GaborMatrix:
    """``A`` with ``Op_0(a) = D_{phi1} A C_{phi2}`` on the lattice ``aZ_N x bZ_N``."""

    matrix: LatticeMatrix
    sys1: GaborSystem
    sys2: GaborSystem
    phase_space: GaborSystem

    def apply(self, f: np.ndarray) -> np.ndarray:
        c = analysis(self.sys2, f).reshape(-1)
        d = self.matrix.entries @ c
        return synthesis(self.sys1, d.reshape(self.sys1.coeff_shape))


def phase_space_system(phi1: np.ndarray, phi2: np.ndarray, a_step: int, b_step: int) -> GaborSystem:
    """Rihaczek window on ``Z_N^2`` with translations ``(a, b)`` and modulations ``(b, a)``, dual attached."""
    Phi = rihaczek_window(phi1, phi2)
    return canonical_dual(GaborSystem(Phi, (a_step, b_step), (b_step, a_step)))


def gabor_lattice(N: int, a_step: int, b_step: int) -> Lattice:
    h = grid_step(N)
    return Lattice.cyclic((a_step * h, b_step * h), (N // a_step, N // b_step))


def gabor_matrix(a: np.ndarray, phi1: np.ndarray, phi2: np.ndarray, a_step: int, b_step: int,
                 ps: GaborSystem | None = None) -> GaborMatrix:
    """Matrix of ``Op_0(a)`` in the Gabor frames generated by ``phi1`` and ``phi2``.

    ``A((j, iota), (k, kappa)) = N^{-1/2} V_Psi a(j, kappa, iota - kappa, k - j) e^{2 pi i kappa (k - j)/N}``
    where ``Psi`` is the canonical dual of the Rihaczek window of
    ``(phi1, phi2)``.  Pass a precomputed ``ps`` to reuse the dual.
    """
    a = _square(a)
    N = a.shape[0]
    if ps is None:
        ps = phase_space_system(phi1, phi2, a_step, b_step)
    if ps.dual is None:
        raise ValueError("phase-space Gabor system has no dual window")
    V = analysis(ps, a, window=ps.dual)
    na, nb = N // a_step, N // b_step
    j = np.arange(na)[:, None, None, None]
    io = np.arange(nb)[None, :, None, None]
    k = np.arange(na)[None, None, :, None]
    ka = np.arange(nb)[None, None, None, :]
    entries = V[j, ka, (io - ka) % nb, (k - j) % na]
    phase = np.exp(2j * np.pi * (ka * b_step) * ((k - j) * a_step) / N)
    A = (entries * phase / math.sqrt(N)).reshape(na * nb, na * nb)
    sys1 = GaborSystem(phi1, a_step, b_step)
    sys2 = GaborSystem(phi2, a_step, b_step)
    return GaborMatrix(LatticeMatrix(gabor_lattice(N, a_step, b_step), A), sys1, sys2, ps)


@dataclass
class FactorizationIdentityReport:
    residuals: np.ndarray
    worst: float
    passed: bool


def check_factorization_identity(a: np.ndarray, gm: GaborMatrix, trials: int = 20,
                                 rng: np.random.Generator | None = None, tol: float = 1e-6) -> FactorizationIdentityReport:
    """Relative residual of ``Op_0(a) f`` against ``D A C f`` on random ``f``."""
    rng = np.random.default_rng(0) if rng is None else rng
    K = op0_matrix(a)
    N = K.shape[0]
    res = np.empty(trials)
    for i in range(trials):
        f = rng.standard_normal(N) + 1j * rng.standard_normal(N)
        ref = K @ f
        nr = np.linalg.norm(ref)
        diff = np.linalg.norm(ref - gm.apply(f))
        res[i] = diff / nr if nr > 0 else diff
    worst = float(res.max()) if trials else 0.0
    return FactorizationIdentityReport(res, worst, bool(worst <= tol))


def matrix_pair_weight(w0, N: int, a_step: int, b_step: int) -> np.ndarray | None:
    """Pair weight ``w((j,iota),(k,kappa)) = w0(j, kappa, iota - kappa, k - j)`` in continuum units."""
    if w0 is None:
        return None
    w0 = as_weight(w0)
    if w0.is_trivial:
        return None
    h = grid_step(N)
    na, nb = N // a_step, N // b_step
    sx = signed_index(N)
    j = np.arange(na)[:, None, None, None] * a_step
    io = np.arange(nb)[None, :, None, None] * b_step
    k = np.arange(na)[None, None, :, None] * a_step
    ka = np.arange(nb)[None, None, None, :] * b_step
    shape = (na, nb, na, nb)
    pts = np.stack([np.broadcast_to(sx[j % N] * h, shape),
                    np.broadcast_to(sx[ka % N] * h, shape),
                    np.broadcast_to(sx[(io - ka) % N] * h, shape),
                    np.broadcast_to(sx[(k - j) % N] * h, shape)], axis=-1)
    return np.asarray(w0(pts)).reshape(na * nb, na * nb)


def symbol_window(N: int) -> np.ndarray:
    """Reference window for symbol modulation norms: Gaussian on ``Z_N^2``."""
    return gaussian_window((N, N), 2)


def symbol_stride(N: int) -> int:
    """Translation stride used when streaming symbol norms (keeps cost near ``32^4``)."""
    return max(1, N // 64)


def symbol_norm(a: np.ndarray, p, q, w=None, stride: int | None = None, window: np.ndarray | None = None) -> float:
    """``||a||_{M^{p,q}_{(w)}}`` on the finite model (continuum-normalized Riemann sums)."""
    a = _square(a)
    N = a.shape[0]
    window = symbol_window(N) if window is None else window
    stride = symbol_stride(N) if stride is None else stride
    return stft_pq_norm(a, window, p, q, w, stride=stride)


def symbol_norms(a: np.ndarray, pairs, w=None, stride: int | None = None) -> list[float]:
    """Several ``M^{p,q}_{(w)}`` norms of one symbol from a single STFT pass."""
    a = _square(a)
    N = a.shape[0]
    stride = symbol_stride(N) if stride is None else stride
    return stft_norms(a, symbol_window(N), pairs, w, stride=stride)


@dataclass
class RatioReport:
    """Ratios of a left-hand side to a right-hand side over a family."""

    ratios: np.ndarray
    constant: float
    spread: float
    passed: bool
    details: dict = field(default_factory=dict)


def _ratio_report(ratios: Sequence[float], max_spread: float | None = None, **details) -> RatioReport:
    r = np.asarray([x for x in ratios if np.isfinite(x)], dtype=float)
    pos = r[r > 0]
    const = float(r.max()) if r.size else 0.0
    spread = float(pos.max() / pos.min()) if pos.size else 1.0
    ok = bool(np.all(np.isfinite(ratios)))
    if max_spread is not None:
        ok = ok and spread <= max_spread
    return RatioReport(r, const, spread, ok, details)


def check_unorm_modnorm_equiv(symbols: Iterable[np.ndarray], p, q, w0, phi1: np.ndarray, phi2: np.ndarray,
                              a_step: int, b_step: int, max_spread: float = 100.0,
                              norms: Sequence[float] | None = None) -> RatioReport:
    """``||A||_{U^{p,q}(w)} / ||a||_{M^{p,q}_{(w0)}}`` over a symbol family.

    ``w`` is built from ``w0`` by the index change
    ``w((j,iota),(k,kappa)) = w0(j, kappa, iota - kappa, k - j)``.
    Passes when the largest ratio is at most ``max_spread`` times the smallest.
    ``norms`` may carry precomputed symbol norms, one per symbol.
    """
    ps = None
    ratios = []
    W = None
    for i, a in enumerate(symbols):
        a = _square(a)
        N = a.shape[0]
        if ps is None:
            ps = phase_space_system(phi1, phi2, a_step, b_step)
            W = matrix_pair_weight(w0, N, a_step, b_step)
        gm = gabor_matrix(a, phi1, phi2, a_step, b_step, ps)
        un = u_norm(gm.matrix, p, q, W)
        mn = symbol_norm(a, p, q, w0) if norms is None else norms[i]
        ratios.append(un / mn if mn > 0 else 0.0)
    return _ratio_report(ratios, max_spread)


def signal_norm(f: np.ndarray, p, q=None) -> float:
    """``||f||_{M^{p,q}}`` of a signal with the Gaussian reference window."""
    q = p if q is None else q
    f = np.asarray(f, dtype=complex)
    return stft_pq_norm(f, gaussian_window(f.size), p, q)


def signal_mixed_norm(f: np.ndarray, e, w=None) -> float:
    f = np.asarray(f, dtype=complex)
    return modulation_norm(f, e, w, gaussian_window(f.size))


def check_op_continuity(a: np.ndarray, p1, p2, p, q, signals: Iterable[np.ndarray], t: float = 0.0,
                        w0=None, w1=None, w2=None, a_norm: float | None = None) -> RatioReport:
    """``||Op_t(a) f||_{M^{p2}_{(w2)}} / (||a||_{M^{p,q}_{(w0)}} ||f||_{M^{p1}_{(w1)}})`` over ``signals``.

    The exponent tuples must satisfy the admissibility conditions used for
    matrices; the constant is reported, not asserted.
    """
    p1 = tuple(p1) if isinstance(p1, (list, tuple)) else (p1, p1)
    p2 = tuple(p2) if isinstance(p2, (list, tuple)) else (p2, p2)
    problems = pq_conditions(p1, p2, p, q)
    if problems:
        raise ExponentError("; ".join(problems))
    K = op_t_matrix(a, t)
    an = symbol_norm(a, p, q, w0) if a_norm is None else a_norm
    ratios = []
    for f in signals:
        f = np.asarray(f, dtype=complex)
        den = an * signal_mixed_norm(f, p1, w1)
        num = signal_mixed_norm(K @ f, p2, w2)
        ratios.append(num / den if den > 0 else 0.0)
    return _ratio_report(ratios, symbol_norm=an)


def weighted_operator(T: np.ndarray, w1=None, w2=None) -> np.ndarray:
    """``G2^{1/2} T G1^{-1/2}`` with ``G = h^2 C^* diag(w^2) C`` the Gram matrix of ``M^2_{(w)}``.

    Its singular values are those of ``T`` as a map ``M^2_{(w1)} -> M^2_{(w2)}``.
    """
    N = T.shape[0]
    if (w1 is None or as_weight(w1).is_trivial) and (w2 is None or as_weight(w2).is_trivial):
        return T
    phi = gaussian_window(N)
    # C[m, n, y] = V_phi e_y (m, n) = N^{-1/2} conj(phi(y - m)) e^{-2 pi i y n / N}
    y = np.arange(N)
    shifted = np.conj(phi[(y[None, :] - y[:, None]) % N])
    C = (shifted[:, None, :] * np.exp(-2j * np.pi * np.outer(y, y) / N)[None, :, :]).reshape(N * N, N) / math.sqrt(N)
    coords = continuum_coords((N, N))
    mesh = np.stack(np.meshgrid(*coords, indexing="ij"), axis=-1).reshape(-1, 2)
    h2 = grid_step(N) ** 2

    def gram(w):
        ww = np.ones(N * N) if w is None else np.asarray(as_weight(w)(mesh)).reshape(-1)
        return h2 * (C.conj().T * ww**2) @ C

    return gram_sqrt(gram(w2)) @ T @ gram_sqrt(gram(w1), inverse=True)


def check_op_schatten(symbols: Iterable[np.ndarray], p, t: float = 0.0, w0=None, w1=None, w2=None,
                      norms: Sequence[float] | None = None) -> RatioReport:
    """``||Op_t(a)||_{I_p(M^2_{(w1)}, M^2_{(w2)})} / ||a||_{M^{p,p}_{(w0)}}`` over a family."""
    p = parse_exponent(p)
    if p > 2:
        raise ValueError(f"Schatten bound is checked for p <= 2, got {p}")
    ratios = []
    for i, a in enumerate(symbols):
        T = weighted_operator(op_t_matrix(a, t), w1, w2)
        num = schatten_norm(spectrum_of(T), p)
        den = symbol_norm(a, p, p, w0) if norms is None else norms[i]
        ratios.append(num / den if den > 0 else 0.0)
    return _ratio_report(ratios)


def hilbert_schmidt_constant(N: int) -> float:
    """``||Op_t(a)||_{I_2} = N^{-1/2} ||a||_{l^2}`` on the finite model."""
    return 1.0 / math.sqrt(N)


def check_wigner_modulation_bound(pairs: Iterable[tuple[np.ndarray, np.ndarray]], p1, q1, p2, q2, p, q,
                                  t: float = 0.5, w0=None, w1=None, w2=None,
                                  norms: Sequence[float] | None = None) -> RatioReport:
    """``||W^t_{f1,f2}||_{M^{p,q}_{(w0)}} / (||f1||_{M^{p1,q1}_{(w1)}} ||f2||_{M^{p2,q2}_{(w2)}})``."""
    r = [recip(v) for v in (p1, q1, p2, q2, p, q)]
    if not (r[0] + r[2] == r[1] + r[3] == r[4] + r[5]):
        raise ExponentError("need 1/p1 + 1/p2 = 1/q1 + 1/q2 = 1/p + 1/q")
    if not all(r[5] <= x <= r[4] for x in r[:4]):
        raise ExponentError("need p <= p_j, q_j <= q")
    ratios = []
    for i, (f1, f2) in enumerate(pairs):
        num = symbol_norm(wigner_t(f1, f2, t), p, q, w0) if norms is None else norms[i]
        den = (stft_pq_norm(np.asarray(f1, dtype=complex), gaussian_window(len(f1)), p1, q1, w1)
               * stft_pq_norm(np.asarray(f2, dtype=complex), gaussian_window(len(f2)), p2, q2, w2))
        ratios.append(num / den if den > 0 else 0.0)
    return _ratio_report(ratios)


def reflect(f: np.ndarray) -> np.ndarray:
    """``f(-x)`` on ``Z_N``."""
    f = np.asarray(f)
    return f[(-np.arange(f.size)) % f.size]


def symbol_convolution(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Cyclic convolution on ``Z_N^2`` with area element ``h^2``."""
    N = a.shape[0]
    return np.fft.ifft2(np.fft.fft2(a) * np.fft.fft2(b)) * grid_step(N) ** 2


@dataclass
class ConvolutionReport:
    constant: float
    max_deviation: float
    passed: bool
    lp_ratio: float


def check_wigner_convolution(f1, f2, g1, g2, p=1.0, tol: float = 1e-8, constant: float | None = None) -> ConvolutionReport:
    """Pointwise ``|W_{f1,f2} * W_{g1,g2}| = C |V_{f2v} g1| |V_{f1v} g2|`` for Weyl symbols.

    ``fv`` is the reflection ``f(-x)``.  ``C`` is fitted once (or taken from
    ``constant``) and the relative deviation over the grid is reported, along
    with ``||a * b||_{L^p}`` divided by the product of the four ``M^{2p}``
    norms.
    """
    p = parse_exponent(p)
    if p > 1:
        raise ValueError(f"convolution estimate needs p <= 1, got {p}")
    f1, f2, g1, g2 = (np.asarray(v, dtype=complex) for v in (f1, f2, g1, g2))
    a = wigner_t(f1, f2, 0.5)
    b = wigner_t(g1, g2, 0.5)
    conv = np.abs(symbol_convolution(a, b))
    prod = np.abs(stft(g1, reflect(f2))) * np.abs(stft(g2, reflect(f1)))
    N = f1.size
    mask = prod > 1e-12 * prod.max() if prod.max() > 0 else np.zeros_like(prod, dtype=bool)
    if constant is None:
        constant = float(np.sum(conv[mask] * prod[mask]) / np.sum(prod[mask] ** 2)) if mask.any() else 0.0
    scale = max(conv.max(), 1e-300)
    dev = float(np.max(np.abs(conv - constant * prod)) / scale) if conv.max() > 0 else 0.0
    h2 = grid_step(N) ** 2
    lp = float((np.sum(conv**p) * h2) ** (1 / p))
    den = 1.0
    for v in (f1, f2, g1, g2):
        den *= signal_norm(v, 2 * p)
    return ConvolutionReport(constant, dev, bool(dev <= tol), lp / den if den > 0 else 0.0)

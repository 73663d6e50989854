"""Gabor analysis on the cyclic group ``Z_N^d``.

Finite-model dictionary: grid index ``y`` stands for the point ``y h`` with
``h = sqrt(2 pi / N)``, so that ``2 pi y n / N = (y h)(n h)`` and the unitary
DFT ``N^{-1/2} sum_y f(y) e^{-2 pi i y n / N}`` plays the role of
``(2 pi)^{-1/2} int f(y) e^{-i y xi} dy``.

Conventions (all with ``N_tot = prod N_i``):

* ``V_phi f(m, n) = N_tot^{-1/2} sum_y f(y) conj(phi(y - m)) e^{-2 pi i <y, n>/N}``
* analysis ``C_phi f = V_phi f`` sampled on ``alpha Z x beta Z``
* synthesis ``D_psi c(x) = N_tot^{-1/2} sum c(m, k) e^{2 pi i <beta k, x>/N} psi(x - alpha m)``

so ``D_phi`` is exactly the adjoint of ``C_phi``, and on the full lattice
(``alpha = beta = 1``) the frame operator is ``||phi||_2^2 I``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Iterable, Sequence

import numpy as np
from scipy.sparse.linalg import LinearOperator, cg

from .exponents import INF, MixedExponent, parse_exponent
from .norms import GridFunction, lp_reduce, mixed_array_norm, mixed_grid_norm
from .weights import as_weight

FRAME_RATIO_FLOOR = 1e-10
CHUNK = 64


class FrameError(ValueError):
    """The Gabor system is not a frame (numerically)."""

    def __init__(self, message: str, condition: float):
        super().__init__(message)
        self.condition = condition


def grid_step(N: int) -> float:
    """Continuum spacing ``h = sqrt(2 pi / N)`` of the finite model."""
    return math.sqrt(2 * math.pi / N)


def signed_index(N: int) -> np.ndarray:
    """Centered representatives of ``0..N-1`` modulo ``N``."""
    k = np.arange(N)
    return np.where(k >= (N + 1) // 2, k - N, k)


def continuum_coords(shape: Sequence[int]) -> list[np.ndarray]:
    """Continuum coordinate of every index, one array per axis."""
    return [signed_index(n) * grid_step(n) for n in shape]


def _as_shape(N, d: int | None = None) -> tuple[int, ...]:
    if isinstance(N, (tuple, list)):
        return tuple(int(n) for n in N)
    return (int(N),) * (d or 1)


def gaussian_window(N, d: int = 1, center=0, width: float = 1.0, xi=0) -> np.ndarray:
    """Periodized ``exp(-(x - x0)^2 / (2 width^2))`` modulated by ``xi`` (grid units).

    ``center`` and ``xi`` are grid indices (scalars or per-axis tuples).
    """
    shape = _as_shape(N, d)
    center = np.broadcast_to(np.asarray(center, dtype=float), (len(shape),))
    xi = np.broadcast_to(np.asarray(xi, dtype=float), (len(shape),))
    out = np.ones(shape, dtype=complex)
    for ax, n in enumerate(shape):
        h = grid_step(n)
        y = np.arange(n, dtype=float)
        g = np.zeros(n)
        for r in range(-3, 4):
            g += np.exp(-(((y - center[ax] + r * n) * h) ** 2) / (2 * width**2))
        g = g * np.exp(2j * np.pi * y * xi[ax] / n)
        sl = [None] * len(shape)
        sl[ax] = slice(None)
        out = out * g[tuple(sl)]
    return out


def hann_window(N: int, length: int | None = None) -> np.ndarray:
    """Hann window of ``length`` samples centred at index 0."""
    length = N // 2 if length is None else int(length)
    w = np.zeros(N, dtype=complex)
    k = np.arange(length)
    vals = 0.5 - 0.5 * np.cos(2 * np.pi * (k + 1) / (length + 1))
    w[(k - length // 2) % N] = vals
    return w


def delta_window(N, d: int = 1) -> np.ndarray:
    w = np.zeros(_as_shape(N, d), dtype=complex)
    w[(0,) * w.ndim] = 1.0
    return w


def make_window(spec: dict | str | None, N, d: int = 1) -> np.ndarray:
    """Window from a config description such as ``{kind="gaussian", width=1.0}``."""
    if spec is None:
        spec = {"kind": "gaussian"}
    if isinstance(spec, str):
        spec = {"kind": spec}
    kind = spec.get("kind", "gaussian")
    if kind == "gaussian":
        return gaussian_window(N, d, spec.get("center", 0), spec.get("width", 1.0), spec.get("xi", 0))
    if kind == "hann":
        return hann_window(int(N), spec.get("length"))
    if kind == "delta":
        return delta_window(N, d)
    raise ValueError(f"unknown window kind {kind!r}")


def translates(phi: np.ndarray, positions: np.ndarray) -> np.ndarray:
    """``phi(. - m)`` for every row ``m`` of ``positions``; shape ``(P,) + phi.shape``."""
    positions = np.atleast_2d(np.asarray(positions, dtype=int))
    shape = phi.shape
    d = len(shape)
    idx = []
    for ax, n in enumerate(shape):
        y = np.arange(n).reshape((1,) + tuple(n if i == ax else 1 for i in range(d)))
        m = positions[:, ax].reshape((-1,) + (1,) * d)
        idx.append((y - m) % n)
    return phi[tuple(idx)]


def _lattice_positions(shape, step) -> np.ndarray:
    axes = [np.arange(0, n, s) for n, s in zip(shape, step)]
    grid = np.meshgrid(*axes, indexing="ij")
    return np.stack([g.ravel() for g in grid], axis=-1)


def _check_same_shape(f: np.ndarray, phi: np.ndarray):
    if f.shape != phi.shape:
        raise ValueError(f"signal shape {f.shape} does not match window shape {phi.shape}")


def stft_rows(f: np.ndarray, phi: np.ndarray, positions: np.ndarray, fold: Sequence[int] | None = None) -> np.ndarray:
    """STFT at the given translation positions.

    Returns shape ``(P,) + shape`` (all frequencies), or ``(P,) + shape/fold``
    when ``fold`` gives the frequency step per axis.
    """
    f = np.asarray(f, dtype=complex)
    phi = np.asarray(phi, dtype=complex)
    _check_same_shape(f, phi)
    d = f.ndim
    norm = 1.0 / math.sqrt(f.size)
    g = f[None] * np.conj(translates(phi, positions))
    axes = tuple(range(1, d + 1))
    if fold is not None and any(b != 1 for b in fold):
        shape = []
        for n, b in zip(f.shape, fold):
            shape += [b, n // b]
        g = g.reshape((g.shape[0],) + tuple(shape)).sum(axis=tuple(1 + 2 * i for i in range(d)))
    return np.fft.fftn(g, axes=axes) * norm


def stft(f: np.ndarray, phi: np.ndarray) -> np.ndarray:
    """Full STFT, shape ``shape + shape`` (translation axes first)."""
    f = np.asarray(f, dtype=complex)
    phi = np.asarray(phi, dtype=complex)
    _check_same_shape(f, phi)
    pos = _lattice_positions(f.shape, (1,) * f.ndim)
    out = np.empty((len(pos),) + f.shape, dtype=complex)
    for s in range(0, len(pos), CHUNK):
        out[s:s + CHUNK] = stft_rows(f, phi, pos[s:s + CHUNK])
    return out.reshape(f.shape + f.shape)


@dataclass
class GaborSystem:
    """Window on ``Z_N^d`` with translation steps ``alpha`` and modulation steps ``beta``."""

    window: np.ndarray
    alpha: tuple[int, ...]
    beta: tuple[int, ...]
    dual: np.ndarray | None = None
    condition: float | None = None

    def __post_init__(self):
        self.window = np.asarray(self.window, dtype=complex)
        d = self.window.ndim
        self.alpha = _as_shape(self.alpha, d)
        self.beta = _as_shape(self.beta, d)
        if len(self.alpha) != d or len(self.beta) != d:
            raise ValueError("lattice steps must have one entry per axis")
        for n, a, b in zip(self.window.shape, self.alpha, self.beta):
            if a < 1 or b < 1 or n % a or n % b:
                raise ValueError(f"steps ({a}, {b}) must be positive divisors of N={n}")
        if self.dual is not None:
            self.dual = np.asarray(self.dual, dtype=complex)
            if self.dual.shape != self.window.shape:
                raise ValueError("dual window shape differs from the window shape")

    @property
    def shape(self) -> tuple[int, ...]:
        return self.window.shape

    @property
    def coeff_shape(self) -> tuple[int, ...]:
        return tuple(n // a for n, a in zip(self.shape, self.alpha)) + tuple(n // b for n, b in zip(self.shape, self.beta))

    @property
    def positions(self) -> np.ndarray:
        return _lattice_positions(self.shape, self.alpha)

    def lattice_coords(self) -> list[np.ndarray]:
        """Continuum coordinates of the lattice samples, one array per coefficient axis."""
        out = []
        for n, a in zip(self.shape, self.alpha):
            out.append(signed_index(n)[::a] * grid_step(n))
        for n, b in zip(self.shape, self.beta):
            out.append(signed_index(n)[::b] * grid_step(n))
        return out


def analysis(sys: GaborSystem, f: np.ndarray, window: np.ndarray | None = None) -> np.ndarray:
    """``C_phi f``: STFT samples on the lattice, shape ``sys.coeff_shape``."""
    phi = sys.window if window is None else window
    f = np.asarray(f, dtype=complex)
    _check_same_shape(f, phi)
    pos = sys.positions
    rows = np.empty((len(pos),) + tuple(n // b for n, b in zip(sys.shape, sys.beta)), dtype=complex)
    for s in range(0, len(pos), CHUNK):
        rows[s:s + CHUNK] = stft_rows(f, phi, pos[s:s + CHUNK], fold=sys.beta)
    return rows.reshape(sys.coeff_shape)


def synthesis(sys: GaborSystem, c: np.ndarray, window: np.ndarray | None = None) -> np.ndarray:
    """``D_psi c``; modulation is applied after translation of the window."""
    psi = sys.window if window is None else window
    d = psi.ndim
    c = np.asarray(c, dtype=complex)
    if c.shape != sys.coeff_shape:
        raise ValueError(f"coefficient shape {c.shape} differs from {sys.coeff_shape}")
    pos = sys.positions
    L = tuple(n // b for n, b in zip(sys.shape, sys.beta))
    cm = c.reshape((len(pos),) + L)
    out = np.zeros(psi.shape, dtype=complex)
    lsize = int(np.prod(L))
    for s in range(0, len(pos), CHUNK):
        inner = np.fft.ifftn(cm[s:s + CHUNK], axes=tuple(range(1, d + 1))) * lsize
        inner = np.tile(inner, (1,) + tuple(sys.beta))
        out += np.sum(inner * translates(psi, pos[s:s + CHUNK]), axis=0)
    return out / math.sqrt(psi.size)


def _block_view(x: np.ndarray, beta: Sequence[int]) -> np.ndarray:
    """Reshape ``x`` (shape ``N`` or ``(M,) + N``) to ``(..., prod L, prod beta)``."""
    lead = x.shape[: x.ndim - len(beta)]
    shape = x.shape[len(lead):]
    d = len(beta)
    split = []
    for n, b in zip(shape, beta):
        split += [b, n // b]
    y = x.reshape(lead + tuple(split))
    nl = len(lead)
    order = list(range(nl)) + [nl + 2 * i + 1 for i in range(d)] + [nl + 2 * i for i in range(d)]
    y = y.transpose(order)
    lsize = int(np.prod([n // b for n, b in zip(shape, beta)]))
    return y.reshape(lead + (lsize, int(np.prod(beta))))


def _unblock(x: np.ndarray, shape: Sequence[int], beta: Sequence[int]) -> np.ndarray:
    d = len(beta)
    L = [n // b for n, b in zip(shape, beta)]
    y = x.reshape(tuple(L) + tuple(beta))
    order = []
    for i in range(d):
        order += [d + i, i]
    return y.transpose(order).reshape(tuple(shape))


def walnut_blocks(sys: GaborSystem, window: np.ndarray | None = None, dual: np.ndarray | None = None) -> np.ndarray:
    """Frame operator ``D_dual C_window`` as a stack of small blocks.

    ``S(x, y)`` vanishes unless ``x - y`` is a multiple of ``N/beta`` on every
    axis, so splitting ``x = x0 + (N/beta) i`` makes ``S`` block diagonal in
    ``x0`` with blocks indexed by ``i``.
    """
    phi = sys.window if window is None else window
    psi = phi if dual is None else dual
    pos = sys.positions
    lsize = int(np.prod([n // b for n, b in zip(sys.shape, sys.beta)]))
    bsize = int(np.prod(sys.beta))
    blocks = np.zeros((lsize, bsize, bsize), dtype=complex)
    for s in range(0, len(pos), CHUNK):
        Tp = _block_view(translates(psi, pos[s:s + CHUNK]), sys.beta)
        Tf = Tp if dual is None else _block_view(translates(phi, pos[s:s + CHUNK]), sys.beta)
        blocks += np.einsum("mxi,mxj->xij", Tp, np.conj(Tf))
    return blocks / bsize


def frame_operator(sys: GaborSystem, f: np.ndarray) -> np.ndarray:
    """``S f = D_phi C_phi f`` evaluated through the block structure."""
    f = np.asarray(f, dtype=complex)
    _check_same_shape(f, sys.window)
    B = walnut_blocks(sys)
    v = _block_view(f, sys.beta)
    return _unblock(np.einsum("xij,xj->xi", B, v), sys.shape, sys.beta)


def frame_bounds(sys: GaborSystem) -> tuple[float, float]:
    """Smallest and largest eigenvalue of the frame operator."""
    eig = np.linalg.eigvalsh(walnut_blocks(sys))
    return float(eig.min()), float(eig.max())


def canonical_dual(sys: GaborSystem, method: str = "direct", rtol: float = 1e-12) -> GaborSystem:
    """Return a copy of ``sys`` carrying ``psi = S^{-1} phi``.

    ``method="direct"`` solves the Walnut blocks; ``method="cg"`` runs
    conjugate gradients on ``D_phi C_phi`` (tolerance ``rtol``, at most
    ``10 N`` iterations).  Raises :class:`FrameError` when the smallest
    eigenvalue of ``S`` is below ``1e-10`` times the largest.
    """
    B = walnut_blocks(sys)
    eig = np.linalg.eigvalsh(B)
    lo, hi = float(eig.min()), float(eig.max())
    cond = INF if lo <= 0 else hi / lo
    if hi <= 0 or lo <= FRAME_RATIO_FLOOR * hi:
        raise FrameError(f"frame condition fails: eigenvalue ratio {lo / hi if hi > 0 else 0.0:.3g}, condition {cond:.3g}", cond)
    phi = sys.window
    if method == "direct":
        v = _block_view(phi, sys.beta)
        psi = _unblock(np.linalg.solve(B, v[..., None])[..., 0], sys.shape, sys.beta)
    elif method == "cg":
        n = phi.size

        def matvec(x):
            return frame_operator(sys, x.reshape(phi.shape)).reshape(-1)

        op = LinearOperator((n, n), matvec=matvec, dtype=complex)
        sol, info = cg(op, phi.reshape(-1), rtol=rtol, atol=0.0, maxiter=10 * max(phi.shape))
        if info != 0:
            raise FrameError(f"conjugate gradients did not converge (info={info})", cond)
        psi = sol.reshape(phi.shape)
    else:
        raise ValueError(f"unknown dual method {method!r}")
    return replace(sys, dual=psi, condition=cond)


@dataclass
class Reconstruction:
    f_rec: np.ndarray
    f_rec_alt: np.ndarray
    residual: float
    residual_alt: float


def reconstruct(sys: GaborSystem, f: np.ndarray) -> Reconstruction:
    """``D_psi C_phi f`` and ``D_phi C_psi f`` with relative residuals."""
    if sys.dual is None:
        raise ValueError("the Gabor system has no dual window; call canonical_dual first")
    f = np.asarray(f, dtype=complex)
    r1 = synthesis(sys, analysis(sys, f), window=sys.dual)
    r2 = synthesis(sys, analysis(sys, f, window=sys.dual))
    nf = np.linalg.norm(f)
    if nf == 0:
        return Reconstruction(r1, r2, float(np.linalg.norm(r1)), float(np.linalg.norm(r2)))
    return Reconstruction(r1, r2, float(np.linalg.norm(r1 - f) / nf), float(np.linalg.norm(r2 - f) / nf))


def time_frequency_shift(f: np.ndarray, shift: Sequence[int], freq: Sequence[int]) -> np.ndarray:
    """``e^{2 pi i <freq, x>/N} f(x - shift)``."""
    f = np.asarray(f, dtype=complex)
    out = translates(f, np.asarray([shift]))[0]
    for ax, (n, k) in enumerate(zip(f.shape, freq)):
        sl = [None] * f.ndim
        sl[ax] = slice(None)
        out = out * np.exp(2j * np.pi * k * np.arange(n) / n)[tuple(sl)]
    return out


# ---------------------------------------------------------------------------
# modulation quasi-norms


def _expand_exponent(e, d: int) -> MixedExponent:
    """A two-entry exponent ``(p, q)`` becomes ``(p,)*d + (q,)*d``."""
    if isinstance(e, MixedExponent):
        if e.dim == 2 * d:
            return e
        if e.dim == 2:
            sigma = tuple(i for s in e.sigma for i in range(s * d, (s + 1) * d))
            return MixedExponent((e.p[0],) * d + (e.p[1],) * d, sigma)
        raise ValueError(f"exponent of dimension {e.dim} for a {2 * d}-axis phase space")
    if isinstance(e, (list, tuple)):
        return _expand_exponent(MixedExponent(tuple(e)), d)
    p = parse_exponent(e)
    return MixedExponent((p,) * (2 * d))


def phase_space_weight(w, coords: Sequence[np.ndarray]) -> np.ndarray | None:
    """Evaluate a phase-space weight on the product grid of ``coords``."""
    if w is None:
        return None
    w = as_weight(w)
    if w.is_trivial:
        return None
    mesh = np.meshgrid(*coords, indexing="ij")
    pts = np.stack(mesh, axis=-1)
    return np.asarray(w(pts)).reshape(pts.shape[:-1])


def modulation_norm(f: np.ndarray, e, w=None, phi: np.ndarray | None = None, step: float | None = None) -> float:
    """``||V_phi f||_{L^p_{sigma,(w)}}`` on the full grid (Riemann sums with step ``h``)."""
    f = np.asarray(f, dtype=complex)
    phi = gaussian_window(f.shape, f.ndim) if phi is None else phi
    V = stft(f, phi)
    e = _expand_exponent(e, f.ndim)
    h = [grid_step(n) for n in f.shape] * 2 if step is None else [step] * (2 * f.ndim)
    W = phase_space_weight(w, continuum_coords(f.shape + f.shape))
    return mixed_grid_norm(GridFunction(V, tuple(h)), e, W)


def modulation_norm_lattice(sys: GaborSystem, f: np.ndarray, e, w=None) -> float:
    """``||C_phi f||_{l^p_{sigma,(w)}}`` with counting measure on the lattice."""
    c = analysis(sys, f)
    e = _expand_exponent(e, sys.window.ndim)
    W = phase_space_weight(w, sys.lattice_coords())
    return mixed_array_norm(c, e, W)


def stft_pq_norm(f: np.ndarray, phi: np.ndarray, p, q, w=None, stride: int = 1, step: float | None = None) -> float:
    """``L^{p,q}_{(w)}`` norm of ``V_phi f`` streamed over translation positions.

    Translations are sampled every ``stride`` grid points (Riemann step
    ``stride h``) and reduced with ``p`` first; frequencies are then reduced
    with ``q``.  Memory stays at one chunk of the STFT.
    """
    return stft_norms(f, phi, [(p, q)], w, stride, step)[0]


def stft_norms(f: np.ndarray, phi: np.ndarray, pairs: Sequence[tuple], w=None, stride: int = 1,
               step: float | None = None) -> list[float]:
    """Several ``L^{p,q}_{(w)}`` norms of ``V_phi f`` from a single pass over the STFT."""
    f = np.asarray(f, dtype=complex)
    phi = np.asarray(phi, dtype=complex)
    pairs = [(parse_exponent(p), parse_exponent(q)) for p, q in pairs]
    d = f.ndim
    hs = [grid_step(n) if step is None else step for n in f.shape]
    pos = _lattice_positions(f.shape, (stride,) * d)
    vol_x = float(np.prod(hs)) * stride**d
    vol_xi = float(np.prod(hs))
    w = None if w is None else as_weight(w)
    if w is not None and w.is_trivial:
        w = None
    coords = [signed_index(n) * h for n, h in zip(f.shape, hs)]
    xi_coords = np.stack(np.meshgrid(*coords, indexing="ij"), axis=-1)
    ps = sorted({p for p, _ in pairs})
    acc = {p: np.zeros(f.shape) for p in ps}
    top = {p: 0.0 for p in ps}
    blocks = []

    def flush():
        V = np.concatenate(blocks)
        for p in ps:
            if math.isinf(p):
                acc[p] = np.maximum(acc[p], V.max(axis=0))
            else:
                top[p], acc[p] = _accumulate(V, p, top[p], acc[p])

    for s in range(0, len(pos), CHUNK):
        P = pos[s:s + CHUNK]
        V = np.abs(stft_rows(f, phi, P))
        if w is not None:
            xs = np.stack([coords[ax][P[:, ax]] for ax in range(d)], axis=-1)
            pts = np.concatenate(
                [np.broadcast_to(xs.reshape((len(P),) + (1,) * d + (d,)), V.shape + (d,)),
                 np.broadcast_to(xi_coords[None], V.shape + (d,))], axis=-1)
            V = V * np.asarray(w(pts)).reshape(V.shape)
        blocks.append(V)
        if sum(b.shape[0] for b in blocks) >= 4 * CHUNK:
            flush()
            blocks = []
    if blocks:
        flush()
    out = []
    for p, q in pairs:
        if math.isinf(p):
            g = acc[p]
        else:
            g = top[p] * (acc[p] * vol_x) ** (1.0 / p) if top[p] > 0 else acc[p]
        out.append(float(lp_reduce(g.reshape(-1), q, step=vol_xi)))
    return out


def _accumulate(V, p, top, acc):
    m = float(V.max())
    if m > top:
        if top > 0:
            acc = acc * (top / m) ** p
        top = m
    if top > 0:
        acc = acc + np.sum((V / top) ** p, axis=0)
    return top, acc


@dataclass
class EquivalenceReport:
    ratios: np.ndarray
    spread: float

    @property
    def lower(self) -> float:
        return float(self.ratios.min())

    @property
    def upper(self) -> float:
        return float(self.ratios.max())


def modulation_equivalence(sys: GaborSystem, family: Iterable[np.ndarray], e, w=None) -> EquivalenceReport:
    """Grid-to-lattice ratio of the modulation norm over a family of signals."""
    ratios = []
    for f in family:
        g = modulation_norm(f, e, w, sys.window)
        l = modulation_norm_lattice(sys, f, e, w)
        if l > 0:
            ratios.append(g / l)
    r = np.asarray(ratios)
    return EquivalenceReport(r, float(r.max() / r.min()) if r.size else 1.0)


@dataclass
class WindowBoundReport:
    ratio: float
    lhs: float
    rhs: float


def check_stft_window_bound(f: np.ndarray, phi: np.ndarray, p, w=None, w1=None, w2=None, ref: np.ndarray | None = None) -> WindowBoundReport:
    """Ratio ``||V_phi f||_{L^p_{(w)}} / (||f||_{M^p_{(w1)}} ||phi||_{M^p_{(w2)}})``.

    ``ref`` is the fixed window defining the two modulation norms (periodized
    Gaussian by default).  Only ``p <= 2`` is accepted.
    """
    p = parse_exponent(p)
    if p > 2:
        raise ValueError(f"window bound is stated for p <= 2, got {p}")
    f = np.asarray(f, dtype=complex)
    ref = gaussian_window(f.shape, f.ndim) if ref is None else ref
    lhs = stft_pq_norm(f, phi, p, p, w)
    rhs = stft_pq_norm(f, ref, p, p, w1) * stft_pq_norm(phi, ref, p, p, w2)
    ratio = 0.0 if lhs == 0 else lhs / rhs
    return WindowBoundReport(ratio, lhs, rhs)

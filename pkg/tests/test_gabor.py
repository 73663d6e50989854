import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from quasimod.gabor import (
    FrameError,
    GaborSystem,
    analysis,
    canonical_dual,
    check_stft_window_bound,
    delta_window,
    frame_bounds,
    frame_operator,
    gaussian_window,
    grid_step,
    make_window,
    modulation_equivalence,
    modulation_norm,
    modulation_norm_lattice,
    reconstruct,
    stft,
    stft_pq_norm,
    synthesis,
    time_frequency_shift,
)
from quasimod.norms import GridFunction, mixed_grid_norm


def rand_signal(rng, N, d=1):
    shape = (N,) * d
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def direct_stft(f, phi):
    N = f.size
    y = np.arange(N)
    V = np.empty((N, N), dtype=complex)
    for m in range(N):
        for n in range(N):
            V[m, n] = np.sum(f * np.conj(phi[(y - m) % N]) * np.exp(-2j * np.pi * y * n / N)) / math.sqrt(N)
    return V


def test_stft_delta_example():
    N = 8
    V = stft(delta_window(N), delta_window(N))
    expected = np.zeros((N, N))
    expected[0] = 1 / math.sqrt(N)
    np.testing.assert_allclose(V, expected, atol=1e-15)


def test_stft_matches_direct_sum():
    rng = np.random.default_rng(0)
    f, phi = rand_signal(rng, 12), rand_signal(rng, 12)
    np.testing.assert_allclose(stft(f, phi), direct_stft(f, phi), atol=1e-12)


def test_stft_two_dimensional_shape():
    rng = np.random.default_rng(1)
    V = stft(rand_signal(rng, 6, 2), gaussian_window(6, 2))
    assert V.shape == (6, 6, 6, 6)


def test_analysis_examples():
    sys_ = GaborSystem(gaussian_window(16), 2, 4)
    assert not np.any(analysis(sys_, np.zeros(16)))
    phi = sys_.window / np.linalg.norm(sys_.window)
    c = analysis(GaborSystem(phi, 2, 4), phi)
    assert c[0, 0] == pytest.approx(direct_stft(phi, phi)[0, 0])
    assert c[0, 0] == pytest.approx(1 / math.sqrt(16))


def test_synthesis_examples():
    N = 16
    sys_ = GaborSystem(gaussian_window(N), 2, 2)
    c = np.zeros(sys_.coeff_shape, dtype=complex)
    c[0, 0] = 1
    np.testing.assert_allclose(synthesis(sys_, c), sys_.window / math.sqrt(N), atol=1e-15)
    assert not np.any(synthesis(sys_, np.zeros(sys_.coeff_shape)))


@given(st.integers(0, 10_000), st.sampled_from([(1, 1), (2, 4), (4, 2), (8, 1)]))
def test_synthesis_is_adjoint_of_analysis(seed, steps):
    rng = np.random.default_rng(seed)
    sys_ = GaborSystem(rand_signal(rng, 16), *steps)
    f = rand_signal(rng, 16)
    c = rng.standard_normal(sys_.coeff_shape) + 1j * rng.standard_normal(sys_.coeff_shape)
    lhs = np.vdot(analysis(sys_, f), c)
    rhs = np.vdot(f, synthesis(sys_, c))
    assert abs(lhs - rhs) <= 1e-12 * max(1.0, abs(lhs))


def test_full_lattice_frame_operator_is_scalar():
    rng = np.random.default_rng(2)
    sys_ = GaborSystem(rand_signal(rng, 10), 1, 1)
    f = rand_signal(rng, 10)
    np.testing.assert_allclose(frame_operator(sys_, f), np.linalg.norm(sys_.window) ** 2 * f, atol=1e-12)


def test_frame_operator_matches_dc():
    rng = np.random.default_rng(3)
    sys_ = GaborSystem(gaussian_window((8, 8), 2), (2, 4), (4, 2))
    f = rand_signal(rng, 8, 2)
    np.testing.assert_allclose(frame_operator(sys_, f), synthesis(sys_, analysis(sys_, f)), atol=1e-12)


def test_dual_and_reconstruction():
    rng = np.random.default_rng(4)
    sys_ = canonical_dual(GaborSystem(gaussian_window(128), 8, 8))
    assert sys_.condition < 100
    assert reconstruct(sys_, sys_.window).residual <= 1e-10
    rec = reconstruct(sys_, rand_signal(rng, 128))
    assert rec.residual <= 1e-8 and rec.residual_alt <= 1e-8
    assert reconstruct(sys_, np.zeros(128)).residual == 0.0
    lo, hi = frame_bounds(sys_)
    assert hi / lo == pytest.approx(sys_.condition)


@settings(max_examples=10)
@given(st.integers(0, 10_000))
def test_cg_dual_agrees_with_direct(seed):
    sys_ = GaborSystem(gaussian_window(64, width=1.0 + (seed % 5) / 10), 4, 4)
    a = canonical_dual(sys_).dual
    b = canonical_dual(sys_, method="cg").dual
    assert np.linalg.norm(a - b) <= 1e-9 * np.linalg.norm(a)


def test_frame_failure():
    with pytest.raises(FrameError):
        canonical_dual(GaborSystem(gaussian_window(16), 16, 16))
    with pytest.raises(ValueError):
        GaborSystem(gaussian_window(16), 3, 4)
    with pytest.raises(ValueError):
        reconstruct(GaborSystem(gaussian_window(16), 4, 4), np.zeros(16))


def test_time_frequency_shift_covariance():
    rng = np.random.default_rng(5)
    N = 16
    f, phi = rand_signal(rng, N), gaussian_window(N)
    g = time_frequency_shift(f, (3,), (5,))
    V, W = stft(f, phi), stft(g, phi)
    # |V_phi(M_k T_j f)(m, n)| = |V_phi f(m - j, n - k)|
    np.testing.assert_allclose(np.abs(W), np.abs(np.roll(V, (3, 5), axis=(0, 1))), atol=1e-12)


def test_moyal_identity_on_grid():
    rng = np.random.default_rng(6)
    N = 32
    f, phi = rand_signal(rng, N), gaussian_window(N)
    h = grid_step(N)
    l2 = lambda g: mixed_grid_norm(GridFunction(g, (h,)), 2.0)
    assert modulation_norm(f, (2, 2), phi=phi) == pytest.approx(l2(f) * l2(phi), rel=1e-10)
    assert modulation_norm(np.zeros(N), (1, 1)) == 0.0


def test_streamed_norm_matches_full_grid():
    rng = np.random.default_rng(7)
    f = rand_signal(rng, 24)
    for p, q in [(1, 1), (2, 1), (0.5, 2), (np.inf, 1)]:
        assert stft_pq_norm(f, gaussian_window(24), p, q) == pytest.approx(modulation_norm(f, (p, q)), rel=1e-12)
    w = {"kind": "poly", "s": 1.0}
    assert stft_pq_norm(f, gaussian_window(24), 1, 2, w) == pytest.approx(modulation_norm(f, (1, 2), w), rel=1e-12)


def test_lattice_equivalence():
    rng = np.random.default_rng(8)
    sys_ = GaborSystem(gaussian_window(64), 4, 4)
    fam = [rand_signal(rng, 64) for _ in range(10)]
    rep = modulation_equivalence(sys_, fam, (2, 2))
    assert rep.spread < 1.5
    assert rep.lower > 0
    assert modulation_norm_lattice(sys_, np.zeros(64), (1, 1)) == 0.0


def test_window_bound_examples():
    rng = np.random.default_rng(9)
    f = rand_signal(rng, 32)
    phi = gaussian_window(32)
    rep = check_stft_window_bound(f, phi, 2)
    assert rep.ratio == pytest.approx(rep.lhs / rep.rhs)
    ratios = [check_stft_window_bound(gaussian_window(32, center=int(c)), phi, 1).ratio for c in rng.integers(0, 32, 5)]
    assert max(ratios) / min(ratios) < 2
    assert check_stft_window_bound(np.zeros(32), phi, 1).ratio == 0.0
    with pytest.raises(ValueError):
        check_stft_window_bound(f, phi, 3)


def test_make_window_specs():
    np.testing.assert_allclose(make_window(None, 16), gaussian_window(16))
    assert make_window("delta", 8)[0] == 1
    assert np.count_nonzero(make_window({"kind": "hann", "length": 6}, 32)) == 6
    with pytest.raises(ValueError):
        make_window({"kind": "boxcar"}, 8)


def test_gaussian_stft_modulus():
    from quasimod.gabor import continuum_coords

    N = 256
    g = gaussian_window(N)
    V = np.abs(stft(g, g))
    x, xi = continuum_coords((N, N))
    ref = np.exp(-(x[:, None] ** 2 + xi[None, :] ** 2) / 4)
    assert np.abs(V / V.max() - ref).max() <= 1e-3

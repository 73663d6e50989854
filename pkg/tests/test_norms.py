import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from quasimod.exponents import INF, MixedExponent
from quasimod.norms import (
    GridFunction,
    SequenceArray,
    check_young,
    check_young_quasi,
    convolve,
    flat_norm,
    lp_reduce,
    mixed_array_norm,
    mixed_grid_norm,
    mixed_seq_norm,
)
from quasimod.weights import Weight, make_lattice


def seq(box, values, theta=None):
    box = box if isinstance(box[0], tuple) else (box,)
    theta = theta or (1.0,) * len(box)
    return SequenceArray(make_lattice(theta, box), np.asarray(values))


def test_two_step_reduction_example():
    f = seq(((0, 1), (0, 1)), [1, 2, 3, 4])
    assert mixed_seq_norm(f, MixedExponent((1.0, INF))) == pytest.approx(6.0)


def test_all_sup_and_single_point():
    rng = np.random.default_rng(1)
    f = seq(((0, 3), (0, 4)), rng.standard_normal(20))
    assert mixed_seq_norm(f, (INF, INF)) == pytest.approx(np.abs(f.values).max())
    one = seq((0, 0), [3 - 4j])
    assert mixed_seq_norm(one, 0.5, Weight.const(2.0)) == pytest.approx(10.0)


@given(st.sampled_from([0.3, 0.5, 1.0, 2.0, 3.5, INF]), st.permutations([0, 1, 2]))
def test_flat_exponent_is_permutation_invariant(p, sigma):
    arr = np.random.default_rng(7).standard_normal((3, 4, 5))
    a = mixed_array_norm(arr, MixedExponent((p,) * 3))
    b = mixed_array_norm(arr, MixedExponent((p,) * 3, tuple(sigma)))
    assert b == pytest.approx(a, rel=1e-12)


def test_log_space_path_matches_direct():
    x = np.random.default_rng(2).random(50)
    p = 0.05
    direct = np.sum(x**p) ** (1 / p)
    assert float(lp_reduce(x, p)) == pytest.approx(direct, rel=1e-10)
    assert float(lp_reduce(np.zeros(5), p)) == 0.0


def test_grid_norm_examples():
    h = 0.25
    assert mixed_grid_norm(GridFunction(np.ones(8), (h,)), 1.0) == pytest.approx(8 * h)
    half = np.r_[np.ones(5), np.zeros(5)]
    assert mixed_grid_norm(GridFunction(half, (0.1,)), INF) == 1.0
    x = np.linspace(-10, 10, 1024)
    g = GridFunction(np.exp(-x**2 / 2), (x[1] - x[0],))
    assert abs(mixed_grid_norm(g, 2.0) - math.pi**0.25) <= 1e-6


def test_grid_weight_needs_points():
    with pytest.raises(ValueError):
        mixed_grid_norm(GridFunction(np.ones(4), (1.0,)), 1.0, Weight.poly(1.0))


def test_convolution_examples():
    c = seq((-2, 3), np.arange(6) + 1j)
    delta = seq((0, 0), [1.0])
    np.testing.assert_allclose(convolve(delta, c).values, c.values)
    ind = seq((0, 1), [1.0, 1.0])
    out = convolve(ind, ind)
    assert out.lattice.box == ((0, 2),)
    np.testing.assert_allclose(out.values.real, [1, 2, 1])
    assert not np.any(convolve(seq((0, 2), np.zeros(3)), c).values)


def test_convolution_matches_double_loop():
    rng = np.random.default_rng(3)
    h = seq((-1, 2), rng.standard_normal(4))
    c = seq((0, 4), rng.standard_normal(5))
    out = convolve(h, c)
    ref = {}
    for i, hv in zip(range(-1, 3), h.values):
        for j, cv in zip(range(0, 5), c.values):
            ref[i + j] = ref.get(i + j, 0) + hv * cv
    np.testing.assert_allclose(out.values, [ref[k] for k in range(-1, 7)])


def test_young_examples():
    rng = np.random.default_rng(4)
    h = seq((0, 63), rng.random(64))
    c = seq((0, 63), rng.random(64))
    delta = seq((0, 0), [1.0])
    rep = check_young_quasi(delta, c, 1.0, 1.0)
    assert rep.passed and rep.ratio == pytest.approx(1.0)
    assert check_young(h, c, 2, 1, 2).passed
    hz = seq((0, 63), rng.standard_normal(64) + 1j * rng.standard_normal(64))
    assert check_young_quasi(hz, c, 1.0, 0.5).passed


@given(st.integers(0, 10_000), st.sampled_from([0.25, 0.5, 0.8, 1.0]))
def test_young_quasi_random(seed, q):
    rng = np.random.default_rng(seed)
    h = seq(((0, 4), (-2, 2)), rng.standard_normal(25) * (rng.random(25) < 0.6))
    c = seq(((-3, 3), (0, 3)), rng.standard_normal(28) + 1j * rng.standard_normal(28))
    assert check_young_quasi(h, c, (1.0, 2.0), q, rtol=1e-10).passed


def test_young_rejects_bad_exponents():
    c = seq((0, 3), np.ones(4))
    with pytest.raises(ValueError):
        check_young_quasi(c, c, 0.5, 1.0)
    with pytest.raises(ValueError):
        check_young(c, c, 2, 2, 2)


def test_flat_norm_and_validation():
    assert flat_norm(np.array([3.0, 4.0]), 2) == pytest.approx(5.0)
    with pytest.raises(ValueError):
        seq((0, 2), [1.0, 2.0])
    with pytest.raises(ValueError):
        seq((0, 1), [1.0, np.nan])

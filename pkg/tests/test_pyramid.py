import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from breathmag.errors import DimMismatch, TooManyLevels, TooSmall
from breathmag.pyramid import (DEFAULT_KERNEL, LaplacianStack, PyramidKernel,
                               build_laplacian, build_riesz, burt_adelson_kernel, collapse,
                               expand, level_shapes, reduce, riesz_transform)


def test_kernel_validation():
    assert DEFAULT_KERNEL.weights.sum() == pytest.approx(1.0)
    np.testing.assert_allclose(burt_adelson_kernel().w1, [0.0625, 0.25, 0.375, 0.25, 0.0625])
    with pytest.raises(ValueError):
        PyramidKernel(np.array([0.5, 0.5]))
    with pytest.raises(ValueError):
        PyramidKernel(np.array([0.2, 0.2, 0.2]))


def test_reduce_constant_and_sizes():
    out = reduce(np.full((64, 64), 0.7))
    assert out.shape == (32, 32)
    np.testing.assert_allclose(out, 0.7, rtol=0, atol=1e-15)
    assert reduce(reduce(np.zeros((64, 64)))).shape == (16, 16)
    assert reduce(np.zeros((9, 7))).shape == (5, 4)
    with pytest.raises(TooSmall):
        reduce(np.zeros((1, 8)))


def test_reduce_impulse_by_hand():
    # Separable 5-tap filter with replicated borders: at (0,0) the taps
    # falling off the edge land back on the corner pixel, so the weight of
    # the impulse along each axis is w[-2] + w[-1] + w[0].
    w = DEFAULT_KERNEL.w1
    x = np.zeros((4, 4))
    x[0, 0] = 1
    out = reduce(x)
    edge = w[0] + w[1] + w[2]
    assert out.shape == (2, 2)
    assert out[0, 0] == pytest.approx(edge * edge)
    assert out[0, 0] == pytest.approx(0.47265625)
    # (0,1) output samples input column 2, which sees the impulse through w[0]
    assert out[0, 1] == pytest.approx(edge * w[0])
    assert out[1, 1] == pytest.approx(w[0] * w[0])


def test_expand_constant_and_errors():
    np.testing.assert_allclose(expand(np.full((8, 9), 0.3), (16, 17)), 0.3, atol=1e-15)
    with pytest.raises(DimMismatch):
        expand(np.zeros((8, 8)), (20, 16))


def test_expand_reduce_ramp():
    ramp = np.tile(np.linspace(0, 1, 64), (64, 1))
    assert np.max(np.abs(expand(reduce(ramp), ramp.shape) - ramp)) < 0.02


def test_laplacian_constant_and_shapes():
    stack = build_laplacian(np.full((40, 30), 0.25), 3)
    for lv in stack.levels[:-1]:
        assert np.max(np.abs(lv)) < 1e-14
    np.testing.assert_allclose(stack.residual, 0.25)
    assert level_shapes((288, 360), 3) == [(288, 360), (144, 180), (72, 90)]
    assert build_laplacian(np.zeros((288, 360)), 3).shapes() == [(288, 360), (144, 180), (72, 90)]
    with pytest.raises(TooManyLevels):
        build_laplacian(np.zeros((8, 8)), 4)
    with pytest.raises(TooManyLevels):
        build_laplacian(np.zeros((8, 8)), 1)


def test_reconstruction_random_frames():
    rng = np.random.default_rng(0)
    frames = rng.random((200, 64, 64))
    for m in (2, 3, 4):
        err = np.max(np.abs(collapse(build_laplacian(frames, m)) - frames))
        assert err < 1e-6


@settings(max_examples=30, deadline=None)
@given(st.integers(8, 40), st.integers(8, 40), st.integers(2, 3), st.integers(0, 10_000))
def test_reconstruction_odd_sizes(h, w, m, seed):
    f = np.random.default_rng(seed).random((h, w))
    if min(level_shapes((h, w), m)[-1]) < 2:
        return
    assert np.max(np.abs(collapse(build_laplacian(f, m)) - f)) < 1e-6


def test_stacked_frames_match_single_frames():
    frames = np.random.default_rng(1).random((3, 20, 24))
    batch = build_laplacian(frames, 3)
    single = build_laplacian(frames[1], 3)
    for a, b in zip(batch.levels, single.levels):
        np.testing.assert_array_equal(a[1], b)


def test_riesz_constant_is_zero():
    r1, r2 = riesz_transform(np.full((16, 16), 3.0))
    assert np.max(np.abs(r1)) < 1e-12 and np.max(np.abs(r2)) < 1e-12


@pytest.mark.parametrize("k", [2, 5, 8])
def test_riesz_of_cosines(k):
    n = 64
    w0 = 2 * np.pi * k / n
    u1, u2 = np.mgrid[0:n, 0:n]
    r1, r2 = riesz_transform(np.cos(w0 * u1))
    np.testing.assert_allclose(r1, np.sin(w0 * u1), atol=1e-6)
    np.testing.assert_allclose(r2, 0, atol=1e-6)
    r1, r2 = riesz_transform(np.cos(w0 * u2))
    np.testing.assert_allclose(r1, 0, atol=1e-6)
    np.testing.assert_allclose(r2, np.sin(w0 * u2), atol=1e-6)


def test_riesz_quadrature_oblique():
    n = 96
    u1, u2 = np.mgrid[0:n, 0:n]
    level = np.cos(2 * np.pi * (6 * u1 + 9 * u2) / n)
    r1, r2 = riesz_transform(level)
    energy = level ** 2 + r1 ** 2 + r2 ** 2
    inner = energy[8:-8, 8:-8]
    assert inner.std() / inner.mean() < 0.05


def test_build_riesz_shapes_and_constant():
    stack = build_laplacian(np.full((32, 32), 0.5), 3)
    rs = build_riesz(stack)
    assert rs.n_levels == 3 and len(rs.p) == 2
    for m in range(2):
        p, r1, r2 = rs.monogenic(m)
        assert p.shape == r1.shape == r2.shape == stack.levels[m].shape
        assert max(np.abs(p).max(), np.abs(r1).max(), np.abs(r2).max()) < 1e-12
    np.testing.assert_allclose(rs.residual, 0.5)


def test_laplacian_stack_container():
    st_ = LaplacianStack([np.zeros((4, 4)), np.ones((2, 2))])
    assert st_.n_levels == 2 and st_.shapes() == [(4, 4), (2, 2)]

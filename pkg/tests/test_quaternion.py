import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from breathmag.errors import NotUnitNorm, ZeroQuaternion
from breathmag.quaternion import (IDENTITY, q_conj, q_inv, q_log_unit, q_mul, q_norm,
                                  q_normalize, quat)

finite = st.floats(-10, 10, allow_nan=False)
quats = arrays(np.float64, 4, elements=finite)


def q_exp(v):
    """Exponential of a pure quaternion (oracle, tests only)."""
    v = np.asarray(v, dtype=float)
    th = np.linalg.norm(v[1:])
    if th == 0:
        return IDENTITY.copy()
    return np.concatenate([[np.cos(th)], np.sin(th) * v[1:] / th])


def test_norm_examples():
    assert q_norm(quat(1, 0, 0, 0)) == 1
    assert q_norm(quat(3, 4, 0, 0)) == 5
    assert q_norm(quat(1, 1, 1, 0)) == pytest.approx(np.sqrt(3))


def test_mul_examples():
    a = quat(0.3, -1.2, 2.0, 0.7)
    np.testing.assert_allclose(q_mul(a, IDENTITY), a)
    i, j, k = np.eye(4)[1:]
    np.testing.assert_allclose(q_mul(i, j), k)
    np.testing.assert_allclose(q_mul(j, k), i)
    np.testing.assert_allclose(q_mul(k, i), j)
    np.testing.assert_allclose(q_mul(j, i), -k)
    np.testing.assert_allclose(q_mul(a, q_conj(a)), [q_norm(a) ** 2, 0, 0, 0], atol=1e-12)


def test_conj_and_inverse():
    np.testing.assert_array_equal(q_conj(quat(1, 2, 3, 0)), [1, -2, -3, 0])
    u, _ = q_normalize(quat(0.2, 0.5, -0.1, 0.9))
    np.testing.assert_allclose(q_inv(u), q_conj(u), atol=1e-15)
    with pytest.raises(ZeroQuaternion):
        q_inv(np.zeros(4))


def test_log_examples():
    np.testing.assert_array_equal(q_log_unit(IDENTITY), np.zeros(4))
    np.testing.assert_allclose(q_log_unit(quat(np.cos(0.3), np.sin(0.3), 0, 0)),
                               [0, 0.3, 0, 0], atol=1e-15)
    np.testing.assert_allclose(q_log_unit(quat(0, 1, 0, 0)), [0, np.pi / 2, 0, 0])
    with pytest.raises(NotUnitNorm):
        q_log_unit(quat(2, 0, 0, 0))


def test_log_of_minus_one_is_flagged():
    out, flags = q_log_unit(np.array([[-1.0, 0, 0, 0], [1.0, 0, 0, 0]]), return_flags=True)
    assert flags.tolist() == [True, False]
    np.testing.assert_allclose(out[0], [0, np.pi, 0, 0])


def test_normalize_zero_maps_to_identity():
    q, valid = q_normalize(np.array([[0.0, 0, 0, 0], [0, 0, 2, 0]]))
    assert valid.tolist() == [False, True]
    np.testing.assert_array_equal(q, [IDENTITY, [0, 0, 1, 0]])


def test_broadcasting_over_fields():
    rng = np.random.default_rng(0)
    a, b = rng.normal(size=(2, 5, 6, 4))
    out = q_mul(a, b)
    assert out.shape == (5, 6, 4)
    np.testing.assert_allclose(out[2, 3], q_mul(a[2, 3], b[2, 3]))


@given(quats, quats)
def test_norm_is_multiplicative(a, b):
    assert abs(q_norm(q_mul(a, b)) - q_norm(a) * q_norm(b)) <= 1e-10 * max(1.0, q_norm(a) * q_norm(b))


@given(quats, quats, quats)
def test_associativity(a, b, c):
    np.testing.assert_allclose(q_mul(q_mul(a, b), c), q_mul(a, q_mul(b, c)), atol=1e-9)


@given(quats)
def test_inverse_gives_identity(q):
    if q_norm(q) < 1e-3:
        return
    np.testing.assert_allclose(q_mul(q, q_inv(q)), IDENTITY, atol=1e-12)


@given(st.floats(-1, 1), st.floats(-1, 1), st.floats(0.1, 1))
def test_pure_unit_log_has_norm_half_pi(x, y, z):
    v = np.array([0.0, x, y, z])
    v /= np.linalg.norm(v)
    assert np.linalg.norm(q_log_unit(v)[1:]) == pytest.approx(np.pi / 2, abs=1e-12)


@settings(max_examples=200)
@given(arrays(np.float64, 3, elements=st.floats(-1, 1)), st.floats(0, np.pi - 0.1))
def test_exp_log_round_trip(axis, angle):
    n = np.linalg.norm(axis)
    if n < 1e-6:
        return
    v = np.concatenate([[0.0], axis / n * angle])
    q = q_exp(v)
    np.testing.assert_allclose(q_exp(q_log_unit(q)), q, atol=1e-9)

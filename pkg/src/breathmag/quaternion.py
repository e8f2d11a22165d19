"""Quaternion algebra on numpy arrays.

A quaternion is any array whose last axis has length 4, ordered
``(s, i, j, k)``. All functions broadcast over leading axes so whole pyramid
levels can be processed at once.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NotUnitNorm, ZeroQuaternion


@dataclass(frozen=True)
class Tolerances:
    unit_norm: float = 1e-9  # accepted deviation of |q| from 1 in q_log_unit
    zero_vector: float = 1e-12  # |v| below this is treated as a real quaternion


TOL = Tolerances()

IDENTITY = np.array([1.0, 0.0, 0.0, 0.0])


def quat(s=0.0, i=0.0, j=0.0, k=0.0) -> np.ndarray:
    """Stack scalar or array parts into a quaternion array."""
    return np.stack(np.broadcast_arrays(*(np.asarray(x, dtype=float) for x in (s, i, j, k))),
                    axis=-1)


def q_norm(q) -> np.ndarray:
    q = np.asarray(q, dtype=float)
    return np.sqrt(np.einsum("...i,...i->...", q, q))


def q_conj(q) -> np.ndarray:
    q = np.asarray(q, dtype=float)
    return q * np.array([1.0, -1.0, -1.0, -1.0])


def q_inv(q) -> np.ndarray:
    q = np.asarray(q, dtype=float)
    n2 = np.einsum("...i,...i->...", q, q)
    if np.any(n2 == 0):
        raise ZeroQuaternion("inverse of the zero quaternion")
    return q_conj(q) / n2[..., None]


def q_mul(a, b) -> np.ndarray:
    """Hamilton product ``a * b``."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    a0, a1, a2, a3 = np.moveaxis(a, -1, 0)
    b0, b1, b2, b3 = np.moveaxis(b, -1, 0)
    return np.stack([
        a0 * b0 - a1 * b1 - a2 * b2 - a3 * b3,
        a0 * b1 + a1 * b0 + a2 * b3 - a3 * b2,
        a0 * b2 - a1 * b3 + a2 * b0 + a3 * b1,
        a0 * b3 + a1 * b2 - a2 * b1 + a3 * b0,
    ], axis=-1)


def q_normalize(q, eps: float = 0.0) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(q / |q|, valid)``; entries with ``|q| <= eps`` map to identity."""
    q = np.asarray(q, dtype=float)
    n = q_norm(q)
    valid = n > eps
    out = q / np.where(valid, n, 1.0)[..., None]
    if not valid.all():
        out[~valid] = IDENTITY
    return out, valid


def q_log_unit(q, return_flags: bool = False):
    """Logarithm of unit quaternions.

    The scalar part of the result is zero and the vector part is
    ``v / |v| * arccos(s)``, evaluated as ``atan2(|v|, s)`` to keep small
    angles accurate. Real quaternions (``|v| < 1e-12``) give the zero
    quaternion, except ``-1`` which is singular: it maps to ``pi`` along ``i``
    and is reported in the optional flag array.
    """
    q = np.asarray(q, dtype=float)
    n = q_norm(q)
    if np.any(np.abs(n - 1.0) > TOL.unit_norm):
        raise NotUnitNorm(f"max |q| deviation {np.max(np.abs(n - 1.0)):.3g} from 1")
    s = q[..., 0]
    v = q[..., 1:]
    vn = np.sqrt(np.einsum("...i,...i->...", v, v))
    real = vn < TOL.zero_vector
    angle = np.arctan2(vn, s)
    scale = np.where(real, 0.0, angle / np.where(real, 1.0, vn))
    out = np.concatenate([np.zeros_like(s)[..., None], v * scale[..., None]], axis=-1)
    singular = real & (s < 0)
    if np.any(singular):
        out = np.where(singular[..., None], np.array([0.0, np.pi, 0.0, 0.0]), out)
    if return_flags:
        return out, singular
    return out

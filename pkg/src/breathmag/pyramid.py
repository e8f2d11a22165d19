"""Gaussian/Laplacian pyramids and the Riesz transform.

Every function accepts a single 2-D level or a stack of levels with the two
spatial axes last, so a whole video ``(N, H, W)`` can be decomposed in one
call.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.ndimage import convolve1d

from .errors import DimMismatch, TooManyLevels, TooSmall


@dataclass(frozen=True)
class PyramidKernel:
    """Separable ``(2R+1) x (2R+1)`` low-pass mask ``w = w1^T w1``."""

    w1: np.ndarray

    def __post_init__(self):
        w1 = np.asarray(self.w1, dtype=float)
        if w1.ndim != 1 or w1.size % 2 == 0:
            raise ValueError("1-D kernel must have odd length")
        if not np.allclose(w1, w1[::-1]):
            raise ValueError("kernel must be symmetric")
        if not np.isclose(w1.sum(), 1.0):
            raise ValueError("kernel must sum to 1")
        object.__setattr__(self, "w1", w1)

    @property
    def radius(self) -> int:
        return self.w1.size // 2

    @property
    def weights(self) -> np.ndarray:
        return np.outer(self.w1, self.w1)


def burt_adelson_kernel(a: float = 0.375) -> PyramidKernel:
    """Five-tap generating kernel ``[1/4 - a/2, 1/4, a, 1/4, 1/4 - a/2]``.

    Every tap satisfies the equal-contribution constraint: even and odd taps
    each sum to 1/2.
    """
    return PyramidKernel(np.array([0.25 - a / 2, 0.25, a, 0.25, 0.25 - a / 2]))


DEFAULT_KERNEL = burt_adelson_kernel()


def _half(n: int) -> int:
    return (n + 1) // 2


def reduce(level, kernel: PyramidKernel = DEFAULT_KERNEL) -> np.ndarray:
    """Blur with ``kernel`` (edge replication) and keep even-indexed samples."""
    level = np.asarray(level, dtype=float)
    if level.ndim < 2 or min(level.shape[-2:]) < 2:
        raise TooSmall(f"reduce needs at least 2x2 input, got {level.shape[-2:]}")
    out = convolve1d(level, kernel.w1, axis=-2, mode="nearest")
    out = convolve1d(out, kernel.w1, axis=-1, mode="nearest")
    return out[..., ::2, ::2]


def _expand_axis(x: np.ndarray, target: int, w1: np.ndarray, axis: int) -> np.ndarray:
    # Zero-stuff an edge-replicated copy so only integer coarse indices contribute,
    # then filter with 2*w1 (the 4 = 2*2 gain split across the two axes).
    pad = w1.size // 4 + 1
    x = np.moveaxis(x, axis, -1)
    n = x.shape[-1]
    xp = np.concatenate([np.repeat(x[..., :1], pad, axis=-1), x,
                         np.repeat(x[..., -1:], pad, axis=-1)], axis=-1)
    up = np.zeros(xp.shape[:-1] + (2 * (n + 2 * pad),))
    up[..., ::2] = xp
    up = convolve1d(up, 2.0 * w1, axis=-1, mode="constant")
    out = up[..., 2 * pad:2 * pad + target]
    return np.moveaxis(out, -1, axis)


def expand(level, target_dims, kernel: PyramidKernel = DEFAULT_KERNEL) -> np.ndarray:
    """Interpolate ``level`` up to ``target_dims`` (spatial shape)."""
    level = np.asarray(level, dtype=float)
    rows, cols = (int(t) for t in target_dims)
    if (_half(rows), _half(cols)) != level.shape[-2:]:
        raise DimMismatch(
            f"target {rows}x{cols} does not halve to input {level.shape[-2:]}")
    out = _expand_axis(level, rows, kernel.w1, axis=level.ndim - 2)
    return _expand_axis(out, cols, kernel.w1, axis=level.ndim - 1)


@dataclass
class LaplacianStack:
    """Band-pass levels ``p_0 .. p_{M-2}`` and low-pass residual ``p_{M-1}``."""

    levels: list

    @property
    def n_levels(self) -> int:
        return len(self.levels)

    @property
    def residual(self) -> np.ndarray:
        return self.levels[-1]

    def shapes(self) -> list[tuple]:
        return [lv.shape[-2:] for lv in self.levels]


def level_shapes(dims, n_levels: int) -> list[tuple[int, int]]:
    rows, cols = dims
    shapes = []
    for _ in range(n_levels):
        shapes.append((rows, cols))
        rows, cols = _half(rows), _half(cols)
    return shapes


def build_laplacian(frame, n_levels: int, kernel: PyramidKernel = DEFAULT_KERNEL) -> LaplacianStack:
    frame = np.asarray(frame, dtype=float)
    if n_levels < 2:
        raise TooManyLevels(f"need at least 2 levels, got {n_levels}")
    shapes = level_shapes(frame.shape[-2:], n_levels)
    if min(shapes[-1]) < 2:
        raise TooManyLevels(
            f"{n_levels} levels on {frame.shape[-2:]} leaves a {shapes[-1]} residual")
    gauss = [frame]
    for _ in range(n_levels - 1):
        gauss.append(reduce(gauss[-1], kernel))
    levels = [g - expand(g_next, g.shape[-2:], kernel) for g, g_next in zip(gauss, gauss[1:])]
    levels.append(gauss[-1])
    return LaplacianStack(levels)


def collapse(stack: LaplacianStack, kernel: PyramidKernel = DEFAULT_KERNEL) -> np.ndarray:
    out = stack.levels[-1]
    for p in reversed(stack.levels[:-1]):
        out = p + expand(out, p.shape[-2:], kernel)
    return out


@lru_cache(maxsize=32)
def _riesz_response(rows: int, cols: int):
    w1 = 2 * np.pi * np.fft.fftfreq(rows)[:, None]
    w2 = 2 * np.pi * np.fft.fftfreq(cols)[None, :]
    norm = np.hypot(w1, w2)
    norm[0, 0] = 1.0
    h1 = -1j * w1 / norm
    h2 = -1j * w2 / norm
    h1[0, 0] = h2[0, 0] = 0.0
    # The Nyquist bin is its own mirror image; an odd response there has no
    # real-valued kernel, so it is dropped.
    if rows % 2 == 0:
        h1[rows // 2, :] = 0.0
    if cols % 2 == 0:
        h2[:, cols // 2] = 0.0
    h1.flags.writeable = False
    h2.flags.writeable = False
    return h1, h2


def riesz_transform(level) -> tuple[np.ndarray, np.ndarray]:
    """Riesz pair ``(r1, r2)`` of ``level`` via the 2-D FFT.

    ``r1`` responds to variation along the first spatial axis (rows), ``r2``
    along the second. The image is treated as periodic.
    """
    level = np.asarray(level, dtype=float)
    if level.ndim < 2 or min(level.shape[-2:]) < 2:
        raise TooSmall(f"Riesz transform needs at least 2x2 input, got {level.shape[-2:]}")
    h1, h2 = _riesz_response(*level.shape[-2:])
    spec = np.fft.fft2(level, axes=(-2, -1))
    r1 = np.fft.ifft2(spec * h1, axes=(-2, -1))
    r2 = np.fft.ifft2(spec * h2, axes=(-2, -1))
    bound = 1e-8 * max(np.linalg.norm(level), 1e-300)
    residue = max(np.abs(r1.imag).max(), np.abs(r2.imag).max())
    assert residue <= bound, f"Riesz imaginary residue {residue:.3g} exceeds {bound:.3g}"
    return r1.real, r2.real


@dataclass
class RieszStack:
    """Monogenic triples for levels ``0 .. M-2`` plus the low-pass residual."""

    p: list
    r1: list
    r2: list
    residual: np.ndarray = field(repr=False)

    @property
    def n_levels(self) -> int:
        return len(self.p) + 1

    def monogenic(self, m: int):
        return self.p[m], self.r1[m], self.r2[m]


def build_riesz(stack: LaplacianStack) -> RieszStack:
    p = list(stack.levels[:-1])
    pairs = [riesz_transform(lv) for lv in p]
    return RieszStack(p=p, r1=[a for a, _ in pairs], r2=[b for _, b in pairs],
                      residual=stack.residual)

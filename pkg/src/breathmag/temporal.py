"""Second-order Butterworth band-pass design and per-pixel IIR filtering."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import GeometryMismatch, InvalidBand

ADULT_BAND = (0.19, 0.9)
NEWBORN_BAND = (0.3, 1.1)


@dataclass(frozen=True)
class BandpassDesign:
    """``H(z) = K (1 + z^-1)(1 - z^-1) / ((1 - p z^-1)(1 - p* z^-1))``."""

    K: float
    pole: complex
    f_lo_hz: float
    f_hi_hz: float
    fs_hz: float

    @property
    def b(self) -> np.ndarray:
        return np.array([self.K, 0.0, -self.K])

    @property
    def a(self) -> np.ndarray:
        p = self.pole
        return np.array([1.0, -2.0 * p.real, abs(p) ** 2])

    def response(self, f_hz) -> np.ndarray:
        """Complex frequency response at ``f_hz``."""
        z1 = np.exp(-2j * np.pi * np.asarray(f_hz, dtype=float) / self.fs_hz)
        num = self.K * (1 + z1) * (1 - z1)
        den = (1 - self.pole * z1) * (1 - np.conj(self.pole) * z1)
        return num / den

    def warmup_samples(self) -> int:
        return int(np.ceil(self.fs_hz / self.f_lo_hz))


def design_bandpass(f_lo_hz: float, f_hi_hz: float, fs_hz: float) -> BandpassDesign:
    """Bilinear transform of the analog prototype ``B s / (s^2 + B s + W0^2)``.

    Both band edges are pre-warped, so the digital response is exactly
    -3 dB at ``f_lo_hz`` and ``f_hi_hz``.
    """
    if not (0 < f_lo_hz < f_hi_hz < fs_hz / 2):
        raise InvalidBand(
            f"need 0 < f_lo < f_hi < fs/2, got f_lo={f_lo_hz}, f_hi={f_hi_hz}, fs={fs_hz}")
    c = 2.0 * fs_hz
    w_lo = c * np.tan(np.pi * f_lo_hz / fs_hz)
    w_hi = c * np.tan(np.pi * f_hi_hz / fs_hz)
    bw = w_hi - w_lo
    w0_sq = w_lo * w_hi
    a0 = c * c + bw * c + w0_sq
    a1 = 2.0 * (w0_sq - c * c) / a0
    a2 = (c * c - bw * c + w0_sq) / a0
    # poles solve z^2 + a1 z + a2 = 0; a1^2 < 4 a2 for every band we accept
    disc = complex(a1 * a1 - 4.0 * a2)
    pole = (-a1 + np.sqrt(disc)) / 2.0
    if pole.imag < 0:
        pole = pole.conjugate()
    return BandpassDesign(K=bw * c / a0, pole=complex(pole), f_lo_hz=f_lo_hz,
                          f_hi_hz=f_hi_hz, fs_hz=fs_hz)


class BandpassFilter:
    """Streaming transposed direct-form II realization.

    One instance holds the two delay registers for every scalar signal in a
    block of shape ``shape``; call :meth:`step` once per sample.
    """

    def __init__(self, design: BandpassDesign, shape=()):
        self.design = design
        b, a = design.b, design.a
        self._b0, self._b1, self._b2 = b
        self._a1, self._a2 = a[1], a[2]
        self.shape = tuple(shape)
        self.reset()

    def reset(self):
        self.z1 = np.zeros(self.shape)
        self.z2 = np.zeros(self.shape)

    def step(self, x):
        x = np.asarray(x, dtype=float)
        if x.shape != self.shape:
            raise GeometryMismatch(f"filter state {self.shape} got sample of shape {x.shape}")
        y = self._b0 * x + self.z1
        self.z1 = self._b1 * x - self._a1 * y + self.z2
        self.z2 = self._b2 * x - self._a2 * y
        return y


def filter_signal(x, design: BandpassDesign, axis: int = 0) -> np.ndarray:
    """Causal zero-state filtering of ``x`` along ``axis`` (time)."""
    x = np.moveaxis(np.asarray(x, dtype=float), axis, 0)
    filt = BandpassFilter(design, x.shape[1:])
    y = np.empty_like(x)
    for n in range(x.shape[0]):
        y[n] = filt.step(x[n])
    return np.moveaxis(y, 0, axis)


def stack_levels(stacks) -> list[np.ndarray]:
    """Turn a time-ordered list of :class:`LaplacianStack` into per-level
    arrays with time on axis 0."""
    stacks = list(stacks)
    if not stacks:
        return []
    ref = stacks[0].shapes()
    for n, st in enumerate(stacks):
        if st.shapes() != ref:
            raise GeometryMismatch(f"frame {n} pyramid geometry {st.shapes()} != {ref}")
    return [np.stack([st.levels[m] for st in stacks]) for m in range(len(ref))]


def filter_stack(levels, design: BandpassDesign) -> list[np.ndarray]:
    """Filter every pixel of every level independently along time.

    ``levels`` is either a list of per-frame :class:`LaplacianStack` or a
    list of per-level arrays shaped ``(N, h_m, w_m)``. Returns the filtered
    levels ``gamma_m`` in the per-level layout.
    """
    levels = list(levels)
    if levels and hasattr(levels[0], "levels"):
        levels = stack_levels(levels)
    n = {lv.shape[0] for lv in levels}
    if len(n) > 1:
        raise GeometryMismatch(f"levels disagree on frame count: {sorted(n)}")
    return [filter_signal(lv, design) for lv in levels]

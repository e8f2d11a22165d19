"""Phase-based motion signals from the Riesz pyramid.

Each monogenic coefficient ``(p, r1, r2)`` is read as the quaternion
``p + i r1 + j r2``. Frame-to-frame phase differences come from the
logarithm of ``q_n q_{n-1}^-1`` on normalized coefficients; they are summed
over time, band-pass filtered, amplified and spatially averaged.

Sign convention: a pattern translating towards increasing ``u1`` produces a
decreasing ``i`` component.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .errors import GeometryMismatch
from .quaternion import q_inv, q_log_unit, q_mul, q_norm, q_normalize, quat
from .temporal import BandpassDesign, BandpassFilter, filter_signal

MASK_REL = 1e-4  # amplitudes below MASK_REL * level max carry no phase


def monogenic_quaternion(p, r1, r2) -> np.ndarray:
    return quat(p, r1, r2, 0.0)


def quaternion_phase(p, r1, r2):
    """Amplitude, phase in [0, pi] and orientation in (-pi, pi]."""
    p, r1, r2 = (np.asarray(a, dtype=float) for a in (p, r1, r2))
    amp = np.sqrt(p * p + r1 * r1 + r2 * r2)
    phase = np.arctan2(np.hypot(r1, r2), p)
    orient = np.arctan2(r2, r1)
    return amp, phase, orient


def phase_components(phase, orient):
    """``(phase cos(orient), phase sin(orient))``; identical for
    ``(phase, orient)`` and ``(-phase, orient + pi)``."""
    return phase * np.cos(orient), phase * np.sin(orient)


def amplitude_mask(q, rel: float = MASK_REL) -> np.ndarray:
    """Pixels whose amplitude exceeds ``rel`` times the peak of their own
    level (the last two axes before the quaternion axis)."""
    amp = q_norm(q)
    if amp.ndim < 2 or amp.size == 0:
        return amp > rel * (amp.max() if amp.size else 0.0)
    return amp > rel * amp.max(axis=(-2, -1), keepdims=True)


def phase_step(q_prev, q_curr, rel: float = MASK_REL):
    """Per-pixel phase increment between two quaternion fields.

    :param q_prev: previous field ``(..., 4)``, or ``None`` for the first frame
        (the increment is then the phase of ``q_curr`` itself).
    :param q_curr: current field ``(..., 4)``.
    :returns: ``(dci, dcj, valid)``; masked pixels carry zeros.
    """
    q_curr = np.asarray(q_curr, dtype=float)
    valid = amplitude_mask(q_curr, rel)
    qc, _ = q_normalize(q_curr)
    if q_prev is None:
        rel_q = qc
    else:
        q_prev = np.asarray(q_prev, dtype=float)
        if q_prev.shape != q_curr.shape:
            raise GeometryMismatch(f"fields differ: {q_prev.shape} vs {q_curr.shape}")
        valid &= amplitude_mask(q_prev, rel)
        qp, _ = q_normalize(q_prev)
        rel_q, _ = q_normalize(q_mul(qc, q_inv(qp)))
    log, singular = q_log_unit(rel_q, return_flags=True)
    valid &= ~singular
    dci = np.where(valid, log[..., 1], 0.0)
    dcj = np.where(valid, log[..., 2], 0.0)
    return dci, dcj, valid


def unwrap_and_accumulate(dci, dcj, axis: int = 0):
    """Running sum of the phase increments along time."""
    return np.cumsum(dci, axis=axis), np.cumsum(dcj, axis=axis)


def filter_phase(ci, cj, design: BandpassDesign, axis: int = 0):
    return filter_signal(ci, design, axis), filter_signal(cj, design, axis)


def filtered_magnitude(fi, fj) -> np.ndarray:
    """``delta = sqrt(f_i^2 + f_j^2)``."""
    return np.hypot(fi, fj)


@dataclass
class PhaseSignals:
    """Spatially averaged amplified components, shape ``(levels, N)`` each."""

    yi: np.ndarray
    yj: np.ndarray

    @property
    def n_levels(self) -> int:
        return self.yi.shape[0]

    def as_motion(self) -> np.ndarray:
        """``(M, 2, N)`` observation array."""
        return np.stack([self.yi, self.yj], axis=1)


def _masked_mean(values, valid):
    if valid is None:
        return values.mean(axis=(-2, -1))
    count = valid.sum(axis=(-2, -1))
    total = np.where(valid, values, 0.0).sum(axis=(-2, -1))
    return np.where(count > 0, total / np.maximum(count, 1), 0.0)


def extract_phase_signals(fi_levels, fj_levels, alphas, valid_levels=None) -> PhaseSignals:
    """Mean of ``alpha_m f_m`` over the valid pixels of each level.

    Arrays are ``(N, h_m, w_m)``; ``valid_levels`` (same shapes, boolean)
    restricts each average to pixels with a defined phase.
    """
    fi_levels, fj_levels = list(fi_levels), list(fj_levels)
    if valid_levels is None:
        valid_levels = [None] * len(fi_levels)
    yi, yj = [], []
    for fi, fj, a, v in zip(fi_levels, fj_levels, alphas, valid_levels):
        yi.append(a * _masked_mean(fi, v))
        yj.append(a * _masked_mean(fj, v))
    return PhaseSignals(np.array(yi), np.array(yj))


def phase_levels_batch(riesz_video, design: BandpassDesign, alphas, rel: float = MASK_REL):
    """Batch reference implementation over a whole video.

    :param riesz_video: :class:`RieszStack` whose arrays carry time on axis 0.
    """
    fi_l, fj_l, valid_l = [], [], []
    for m in range(len(riesz_video.p)):
        q = monogenic_quaternion(riesz_video.p[m], riesz_video.r1[m], riesz_video.r2[m])
        steps = [phase_step(None if n == 0 else q[n - 1], q[n], rel) for n in range(q.shape[0])]
        dci = np.stack([s[0] for s in steps])
        dcj = np.stack([s[1] for s in steps])
        ci, cj = unwrap_and_accumulate(dci, dcj)
        fi, fj = filter_phase(ci, cj, design)
        fi_l.append(fi)
        fj_l.append(fj)
        valid_l.append(np.stack([s[2] for s in steps]))
    return extract_phase_signals(fi_l, fj_l, alphas, valid_l)


class PhaseSignalExtractor:
    """Frame-at-a-time version of the phase path with O(pixels) memory."""

    def __init__(self, shapes, design: BandpassDesign, alphas, rel: float = MASK_REL):
        self.shapes = [tuple(s) for s in shapes]
        self.alphas = list(alphas)
        if len(self.alphas) != len(self.shapes):
            raise GeometryMismatch(f"{len(self.shapes)} levels but {len(self.alphas)} alphas")
        self.rel = rel
        self.prev = [None] * len(self.shapes)
        self.ci = [np.zeros(s) for s in self.shapes]
        self.cj = [np.zeros(s) for s in self.shapes]
        self.filt_i = [BandpassFilter(design, s) for s in self.shapes]
        self.filt_j = [BandpassFilter(design, s) for s in self.shapes]

    def push(self, riesz) -> tuple[np.ndarray, np.ndarray]:
        """Consume one frame's :class:`RieszStack`; return ``(yi, yj)`` for it."""
        yi, yj = self.push_block(riesz, single=True)
        return yi[:, 0], yj[:, 0]

    def push_block(self, riesz, single: bool = False) -> tuple[np.ndarray, np.ndarray]:
        """Consume a block of frames (time on axis 0 of every level).

        Returns ``(yi, yj)`` shaped ``(levels, T)``.
        """
        rows_i, rows_j = [], []
        for m, shape in enumerate(self.shapes):
            q = monogenic_quaternion(*riesz.monogenic(m))
            if single:
                q = q[None]
            if q.shape[1:-1] != shape:
                raise GeometryMismatch(f"level {m} is {q.shape[1:-1]}, expected {shape}")
            parts = []
            if self.prev[m] is None:
                parts.append(phase_step(None, q[:1], self.rel))
                prev, curr = q[:-1], q[1:]
            else:
                prev, curr = np.concatenate([self.prev[m][None], q[:-1]]), q
            if len(curr):
                parts.append(phase_step(prev, curr, self.rel))
            self.prev[m] = q[-1]
            dci = np.concatenate([p[0] for p in parts])
            dcj = np.concatenate([p[1] for p in parts])
            valid = np.concatenate([p[2] for p in parts])
            ci = self.ci[m] + np.cumsum(dci, axis=0)
            cj = self.cj[m] + np.cumsum(dcj, axis=0)
            self.ci[m], self.cj[m] = ci[-1], cj[-1]
            yi = np.empty(len(q))
            yj = np.empty(len(q))
            for t in range(len(q)):
                yi[t] = _masked_mean(self.filt_i[m].step(ci[t]), valid[t])
                yj[t] = _masked_mean(self.filt_j[m].step(cj[t]), valid[t])
            rows_i.append(self.alphas[m] * yi)
            rows_j.append(self.alphas[m] * yj)
        return np.array(rows_i), np.array(rows_j)


def write_phase_csv(signals: PhaseSignals, path, fs_hz: float):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["n", "t_s", "m", "comp", "value"])
        for comp, arr in (("i", signals.yi), ("j", signals.yj)):
            for m, row in enumerate(arr):
                for n, v in enumerate(row):
                    w.writerow([n, f"{n / fs_hz:.6f}", m, comp, f"{v:.9g}"])

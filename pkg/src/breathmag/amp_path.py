"""Amplitude-based motion signals: amplify, binarize and spatially average
each temporally filtered pyramid level."""
from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .errors import GeometryMismatch
from .temporal import BandpassDesign, BandpassFilter


def default_alphas(n_levels: int, alpha_end: float = 12.0) -> list[float]:
    """Geometric ramp ``1 -> alpha_end`` over levels ``0 .. M-2``; the residual
    level gets 0."""
    if n_levels < 2:
        raise ValueError("need at least two levels")
    if n_levels == 2:
        return [1.0, 0.0]
    ramp = np.geomspace(1.0, alpha_end, n_levels - 1)
    return [float(a) for a in ramp] + [0.0]


@dataclass
class AmpConfig:
    """Amplification factors per level and the shared binarization threshold.

    ``gamma_th=None`` means "calibrate from the data" (see
    :func:`calibrate_gamma_th`).
    """

    alphas: list
    gamma_th: float | None = None

    def __post_init__(self):
        self.alphas = [float(a) for a in self.alphas]
        if any(a < 0 for a in self.alphas):
            raise ValueError("amplification factors must be non-negative")
        if self.alphas[0] != 1.0:
            raise ValueError("alpha_0 must be 1")
        if self.alphas[-1] != 0.0:
            raise ValueError("the residual level must have alpha 0")
        if self.gamma_th is not None and not self.gamma_th > 0:
            raise ValueError("gamma_th must be positive")

    @classmethod
    def default(cls, n_levels: int, alpha_end: float = 12.0, gamma_th=None) -> "AmpConfig":
        return cls(default_alphas(n_levels, alpha_end), gamma_th)


@dataclass
class LevelSignals:
    """Averaged binarized signals ``lbar[m, n]``."""

    lbar: np.ndarray
    level_shapes: list = field(default_factory=list)
    fs_hz: float | None = None

    @property
    def n_levels(self) -> int:
        return self.lbar.shape[0]

    def as_motion(self) -> np.ndarray:
        """``(M, 1, N)`` observation array (one column per level)."""
        return self.lbar[:, None, :]


def binarize_level(gamma_level, alpha: float, gamma_th: float) -> np.ndarray:
    if not gamma_th > 0:
        raise ValueError("gamma_th must be positive")
    return (np.abs(np.asarray(gamma_level, dtype=float) * alpha) >= gamma_th).astype(np.uint8)


def calibrate_gamma_th(gammas, alphas, factor: float = 3.0) -> float:
    """``factor`` times the median absolute amplified response, pooled over
    every level with non-zero amplification."""
    pooled = [np.abs(np.asarray(g) * a).ravel() for g, a in zip(gammas, alphas) if a > 0]
    med = float(np.median(np.concatenate(pooled)))
    if med <= 0:
        return np.finfo(float).tiny
    return factor * med


def extract_amp_signals(gammas, cfg: AmpConfig) -> LevelSignals:
    """Average the binarized levels.

    :param gammas: filtered levels, one array ``(N, h_m, w_m)`` per level.
    :param cfg: amplification schedule; a missing threshold is calibrated on
        the supplied data.
    """
    gammas = list(gammas)
    if len(gammas) != len(cfg.alphas):
        raise GeometryMismatch(f"{len(gammas)} levels but {len(cfg.alphas)} alphas")
    n = {g.shape[0] for g in gammas}
    if len(n) > 1:
        raise GeometryMismatch(f"levels disagree on frame count: {sorted(n)}")
    th = cfg.gamma_th if cfg.gamma_th is not None else calibrate_gamma_th(gammas, cfg.alphas)
    lbar = np.stack([binarize_level(g, a, th).mean(axis=(-2, -1))
                     for g, a in zip(gammas, cfg.alphas)])
    return LevelSignals(lbar, [g.shape[-2:] for g in gammas])


class AmpSignalExtractor:
    """Frame-at-a-time amplitude path; needs a fixed threshold."""

    def __init__(self, shapes, design: BandpassDesign, cfg: AmpConfig):
        if cfg.gamma_th is None:
            raise ValueError("streaming extraction needs a calibrated gamma_th")
        self.shapes = [tuple(s) for s in shapes]
        if len(self.shapes) != len(cfg.alphas):
            raise GeometryMismatch(f"{len(self.shapes)} levels but {len(cfg.alphas)} alphas")
        self.cfg = cfg
        self.filters = [BandpassFilter(design, s) for s in self.shapes]

    def filtered(self, stack) -> list[np.ndarray]:
        if stack.shapes() != self.shapes:
            raise GeometryMismatch(f"pyramid geometry {stack.shapes()} != {self.shapes}")
        return [f.step(lv) for f, lv in zip(self.filters, stack.levels)]

    def push(self, stack) -> np.ndarray:
        gammas = self.filtered(stack)
        return np.array([binarize_level(g, a, self.cfg.gamma_th).mean()
                         for g, a in zip(gammas, self.cfg.alphas)])


def write_level_csv(signals: LevelSignals, path, fs_hz: float):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["n", "t_s", "m", "value"])
        for m, row in enumerate(signals.lbar):
            for n, v in enumerate(row):
                w.writerow([n, f"{n / fs_hz:.6f}", m, f"{v:.9g}"])

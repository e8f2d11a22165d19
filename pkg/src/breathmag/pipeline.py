"""End-to-end composition: frames -> pyramids -> motion signals -> windows."""
from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .amp_path import AmpConfig, AmpSignalExtractor, LevelSignals, calibrate_gamma_th
from .errors import AllRoisGated
from .estimator import (EstimatorConfig, MotionMatrix, RREstimate, WindowingConfig,
                        estimate_window, estimate_windows, window_slicer)
from .frameio import FrameSequence
from .phase_path import PhaseSignalExtractor, PhaseSignals
from .pyramid import DEFAULT_KERNEL, build_laplacian, build_riesz, level_shapes
from .roi import GateDecision, RoiSet, fused_estimate, gate_roi
from .temporal import BandpassDesign, BandpassFilter


def _calibration_span(design: BandpassDesign, n_frames: int, calib_frames: int | None):
    warm = min(design.warmup_samples(), n_frames - 1)
    length = calib_frames or int(round(20 * design.fs_hz))
    return warm, min(n_frames, warm + length)


def calibrate_amp_threshold(seq: FrameSequence, design: BandpassDesign, n_levels: int,
                            alphas, calib_frames: int | None = None, kernel=DEFAULT_KERNEL) -> float:
    """Binarization threshold from the filtered levels of a calibration span
    that starts once the filter transient has died out."""
    warm, stop = _calibration_span(design, seq.n_frames, calib_frames)
    shapes = level_shapes(seq.data.shape[1:], n_levels)
    filters = [BandpassFilter(design, s) for s in shapes]
    kept = [[] for _ in shapes]
    for n in range(stop):
        stack = build_laplacian(seq.data[n], n_levels, kernel)
        for m, (f, lv) in enumerate(zip(filters, stack.levels)):
            g = f.step(lv)
            if n >= warm:
                kept[m].append(g.astype(np.float32))
    return calibrate_gamma_th([np.stack(k) for k in kept], alphas)


def amplitude_signals(seq: FrameSequence, design: BandpassDesign, n_levels: int,
                      cfg: AmpConfig | None = None, calib_frames: int | None = None,
                      kernel=DEFAULT_KERNEL) -> tuple[LevelSignals, AmpConfig]:
    """Averaged binarized signals for every frame of ``seq``.

    Returns the signals and the configuration actually used (with the
    calibrated threshold filled in).
    """
    cfg = cfg or AmpConfig.default(n_levels)
    if cfg.gamma_th is None:
        th = calibrate_amp_threshold(seq, design, n_levels, cfg.alphas, calib_frames, kernel)
        cfg = replace(cfg, gamma_th=th)
    shapes = level_shapes(seq.data.shape[1:], n_levels)
    ext = AmpSignalExtractor(shapes, design, cfg)
    lbar = np.stack([ext.push(build_laplacian(f, n_levels, kernel)) for f in seq.data], axis=1)
    return LevelSignals(lbar, shapes, seq.fs_hz), cfg


def phase_signals(seq: FrameSequence, design: BandpassDesign, n_levels: int,
                  alpha: float = 1.0, kernel=DEFAULT_KERNEL, block: int = 64) -> PhaseSignals:
    """Phase-path signals for levels ``0 .. M-2`` (the residual carries no
    phase)."""
    shapes = level_shapes(seq.data.shape[1:], n_levels)[:-1]
    ext = PhaseSignalExtractor(shapes, design, [alpha] * len(shapes))
    yi = np.empty((len(shapes), seq.n_frames))
    yj = np.empty_like(yi)
    for a in range(0, seq.n_frames, block):
        b = min(a + block, seq.n_frames)
        riesz = build_riesz(build_laplacian(seq.data[a:b], n_levels, kernel))
        yi[:, a:b], yj[:, a:b] = ext.push_block(riesz)
    return PhaseSignals(yi, yj)


def motion_matrix(seq: FrameSequence, method: str, design: BandpassDesign, n_levels: int,
                  alpha: float, amp_cfg: AmpConfig | None = None,
                  calib_frames: int | None = None) -> MotionMatrix:
    if method == "phase":
        return MotionMatrix(phase_signals(seq, design, n_levels, alpha).as_motion(), seq.fs_hz)
    if method == "amplitude":
        amp_cfg = amp_cfg or AmpConfig.default(n_levels, alpha)
        sig, _ = amplitude_signals(seq, design, n_levels, amp_cfg, calib_frames)
        return MotionMatrix(sig.as_motion(), seq.fs_hz)
    raise ValueError(f"unknown method {method!r}")


def estimate_sequence(seq: FrameSequence, method: str, design: BandpassDesign, n_levels: int,
                      alpha: float, win_cfg: WindowingConfig, est_cfg: EstimatorConfig,
                      amp_cfg: AmpConfig | None = None) -> list[RREstimate]:
    """Whole-frame estimation on interlaced windows."""
    x = motion_matrix(seq, method, design, n_levels, alpha, amp_cfg)
    return estimate_windows(x, win_cfg, est_cfg)


def calibrate_eta_for_run(dims: tuple, fs_hz: float, method: str, design: BandpassDesign,
                          n_levels: int, alpha: float, win_cfg: WindowingConfig,
                          est_cfg: EstimatorConfig, noise_sigma: float = 0.01,
                          amp_cfg: AmpConfig | None = None, n_windows: int = 4,
                          quantile: float = 0.95, seed: int = 0) -> float:
    """Periodicity threshold from a motion-free video of the run's geometry.

    The video is mid-gray plus white noise of ``noise_sigma``. It goes through
    the same path, levels and band as the run; windows start after the filter
    transient and do not overlap. Pass the run's ``amp_cfg`` with its
    calibrated ``gamma_th`` so the binarization matches.

    :param dims: frame shape ``(U1, U2)``; the ROI size for ROI runs
    :param n_windows: number of noise windows the quantile is taken over
    :returns: the ``quantile`` of the statistic over the noise windows
    """
    n = int(round(win_cfg.window_s * fs_hz))
    warm = design.warmup_samples()
    rng = np.random.default_rng(seed)
    data = 0.5 + rng.normal(0.0, noise_sigma, (warm + n_windows * n, *dims))
    x = motion_matrix(FrameSequence(data, fs_hz), method, design, n_levels, alpha, amp_cfg)
    cfg = replace(est_cfg, eta=0.0)
    stats = [estimate_window(x.window(warm + k * n, warm + (k + 1) * n), cfg).periodicity_stat
             for k in range(n_windows)]
    return float(np.quantile(stats, quantile))


@dataclass
class RoiRun:
    estimates: list
    gates: list = field(default_factory=list)  # gates[w][r] -> GateDecision
    motions: list = field(default_factory=list)  # full-length MotionMatrix per ROI


def estimate_with_rois(seq: FrameSequence, rois: RoiSet, method: str, design: BandpassDesign,
                       n_levels: int, alpha: float, win_cfg: WindowingConfig,
                       est_cfg: EstimatorConfig, gamma_bin: float = 0.05,
                       motion_th: float = 0.10) -> RoiRun:
    """Per-ROI motion signals, per-window gating and fused estimation.

    Windows in which every ROI is gated come back with ``valid=False``.
    """
    crops = [rois.crop(seq, r) for r in range(len(rois))]
    motions = [motion_matrix(c, method, design, n_levels, alpha) for c in crops]
    estimates, gates = [], []
    for w in window_slicer(seq.n_frames, win_cfg, seq.fs_hz):
        g: list[GateDecision] = [gate_roi(c.data[w.start:w.stop], gamma_bin, motion_th)
                                 for c in crops]
        meta = dict(window_index=w.index, t_start_s=w.start / seq.fs_hz,
                    t_end_s=w.stop / seq.fs_hz, warmup=w.warmup)
        try:
            est = fused_estimate([x.window(w.start, w.stop) for x in motions],
                                 [d.kappa for d in g], est_cfg, **meta)
        except AllRoisGated:
            est = RREstimate(float("nan"), np.zeros((0, 0)), 0.0, False, valid=False, **meta)
        estimates.append(est)
        gates.append(g)
    return RoiRun(estimates, gates, motions)

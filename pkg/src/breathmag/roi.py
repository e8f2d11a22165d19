"""Automatic ROI selection, large-motion gating and fused estimation."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import RegularGridInterpolator

from .errors import AllRoisGated, FrameTooSmall, InsufficientFrames
from .estimator import (EstimatorConfig, MotionMatrix, RREstimate, estimate_amplitudes,
                        estimate_f0, grid_argmax, periodicity_test, periodogram_objective,
                        refine_peak)
from .frameio import FrameSequence


@dataclass(frozen=True)
class RoiConfig:
    n_rois: int = 3
    size: int = 41
    downsample: int = 4
    calib_frames: int = 300
    min_separation_px: int | None = None  # None -> ROI size
    calib_offset: int = 0

    def __post_init__(self):
        if self.n_rois < 1:
            raise ValueError("need at least one ROI")
        if self.size < 1 or self.size % 2 == 0:
            raise ValueError("ROI size must be a positive odd integer")
        if self.downsample < 1:
            raise ValueError("downsampling factor must be >= 1")
        if self.calib_frames < 2:
            raise ValueError("need at least two calibration frames")

    @property
    def separation(self) -> int:
        return self.size if self.min_separation_px is None else self.min_separation_px


@dataclass
class RoiSet:
    """ROI centers as ``(row, col)`` plus the interpolated amplitude map."""

    centers: list
    size: int
    amplitude_map: np.ndarray = field(repr=False)
    f0_hat_hz: float = float("nan")

    def bounds(self, r: int) -> tuple[int, int, int, int]:
        """``(row0, col0, row1, col1)`` with exclusive upper bounds."""
        row, col = self.centers[r]
        h = self.size // 2
        return row - h, col - h, row + h + 1, col + h + 1

    def crop(self, seq: FrameSequence, r: int) -> FrameSequence:
        row0, col0, _, _ = self.bounds(r)
        return seq.crop(row0, col0, self.size, self.size)

    def __len__(self):
        return len(self.centers)


def block_downsample(frames, factor: int) -> np.ndarray:
    """``factor x factor`` block mean (edge-replicated to whole blocks) on the
    last two axes; output is ``ceil(H/D) x ceil(W/D)``."""
    frames = np.asarray(frames, dtype=float)
    if factor == 1:
        return frames.copy()
    h, w = frames.shape[-2:]
    hp, wp = -(-h // factor) * factor, -(-w // factor) * factor
    pad = [(0, 0)] * (frames.ndim - 2) + [(0, hp - h), (0, wp - w)]
    x = np.pad(frames, pad, mode="edge")
    x = x.reshape(x.shape[:-2] + (hp // factor, factor, wp // factor, factor))
    return x.mean(axis=(-3, -1))


def upsample_bilinear(small: np.ndarray, factor: int, dims) -> np.ndarray:
    """Bilinear interpolation of a block-downsampled map back to ``dims``.

    Block ``i`` is anchored at its center ``i * D + (D - 1) / 2``; points
    beyond the outermost centers take the nearest edge value.
    """
    rows = np.arange(small.shape[0]) * factor + (factor - 1) / 2
    cols = np.arange(small.shape[1]) * factor + (factor - 1) / 2
    if small.shape[0] == 1 or small.shape[1] == 1:
        small = np.pad(small, ((0, small.shape[0] == 1), (0, small.shape[1] == 1)), mode="edge")
        rows = rows if rows.size > 1 else np.array([rows[0], rows[0] + 1])
        cols = cols if cols.size > 1 else np.array([cols[0], cols[0] + 1])
    interp = RegularGridInterpolator((rows, cols), small, method="linear")
    rr = np.clip(np.arange(dims[0]), rows[0], rows[-1])
    cc = np.clip(np.arange(dims[1]), cols[0], cols[-1])
    pts = np.stack(np.meshgrid(rr, cc, indexing="ij"), axis=-1)
    return interp(pts)


def pick_centers(amp_map: np.ndarray, n: int, size: int, separation: float) -> list[tuple[int, int]]:
    """Successive maxima with non-maximum suppression.

    Each peak is clamped so the ``size x size`` ROI fits, then accepted if it
    lies at least ``separation`` from every accepted center. A disc of radius
    ``separation`` around the raw peak is suppressed either way.
    """
    rows, cols = amp_map.shape
    h = size // 2
    if size > rows or size > cols:
        raise FrameTooSmall(f"{size}x{size} ROI does not fit a {rows}x{cols} frame")
    work = np.array(amp_map, dtype=float)
    rr, cc = np.mgrid[0:rows, 0:cols]
    centers: list[tuple[int, int]] = []
    while len(centers) < n and np.isfinite(work).any():
        k = int(np.argmax(np.where(np.isfinite(work), work, -np.inf)))
        pr, pc = divmod(k, cols)
        cr = min(max(pr, h), rows - 1 - h)
        cc_ = min(max(pc, h), cols - 1 - h)
        if all(np.hypot(cr - a, cc_ - b) >= separation for a, b in centers):
            centers.append((cr, cc_))
        work[(rr - pr) ** 2 + (cc - pc) ** 2 < max(separation, 1) ** 2] = -np.inf
    return centers


def amplitude_map(frames, fs_hz: float, est_cfg: EstimatorConfig):
    """Joint ``f0`` over all pixels (as channels) and each pixel's amplitude."""
    frames = np.asarray(frames, dtype=float)
    x = MotionMatrix(frames.reshape(frames.shape[0], -1).T, fs_hz)
    f0 = estimate_f0(x, est_cfg)
    a = estimate_amplitudes(x, f0)[:, 0]
    return f0, a.reshape(frames.shape[1:])


def select_rois(seq: FrameSequence, cfg: RoiConfig, est_cfg: EstimatorConfig) -> RoiSet:
    if cfg.size > seq.height or cfg.size > seq.width:
        raise FrameTooSmall(f"{cfg.size}x{cfg.size} ROI does not fit {seq.height}x{seq.width}")
    stop = cfg.calib_offset + cfg.calib_frames
    if stop > seq.n_frames:
        raise InsufficientFrames(
            f"need frames {cfg.calib_offset}..{stop - 1}, sequence has {seq.n_frames}")
    calib = block_downsample(seq.data[cfg.calib_offset:stop], cfg.downsample)
    f0, a_small = amplitude_map(calib, seq.fs_hz, est_cfg)
    a_full = upsample_bilinear(a_small, cfg.downsample, (seq.height, seq.width))
    centers = pick_centers(a_full, cfg.n_rois, cfg.size, cfg.separation)
    return RoiSet(centers, cfg.size, a_full, f0)


@dataclass
class GateDecision:
    binary: np.ndarray  # i_r[n, u]
    mean_motion: np.ndarray  # ibar_r[n]
    kappa: int
    gamma_bin: float
    gamma_th: float


def gate_roi(frames, gamma_bin: float = 0.05, gamma_th: float = 0.10) -> GateDecision:
    """Large-motion test on one ROI over one window.

    ``kappa`` is 0 when the fraction of pixels whose frame difference reaches
    ``gamma_bin`` exceeds ``gamma_th`` at any frame.
    """
    frames = np.asarray(frames, dtype=float)
    if frames.shape[0] < 2:
        raise InsufficientFrames("gating needs at least two frames")
    diff = np.zeros_like(frames)
    diff[1:] = np.abs(np.diff(frames, axis=0))
    binary = (diff >= gamma_bin).astype(np.uint8)
    binary[0] = 0
    ibar = binary.mean(axis=(-2, -1))
    kappa = 0 if np.any(ibar > gamma_th) else 1
    return GateDecision(binary, ibar, kappa, gamma_bin, gamma_th)


def fused_objective(motions, kappas, grid) -> np.ndarray:
    total = np.zeros(len(grid))
    for x, k in zip(motions, kappas):
        if k:
            total += periodogram_objective(x, grid)
    return total


def fused_estimate(motions, kappas, cfg: EstimatorConfig, **meta) -> RREstimate:
    """Maximize the sum of the admitted ROIs' periodogram objectives."""
    motions = list(motions)
    kappas = [int(k) for k in kappas]
    if len(motions) != len(kappas):
        raise ValueError("one gate decision per ROI is required")
    if not any(kappas):
        raise AllRoisGated("every ROI carries large motion in this window")
    fs = motions[0].fs_hz
    cfg.check_rate(fs)
    grid = cfg.grid()
    obj = fused_objective(motions, kappas, grid)
    k = grid_argmax(obj)
    admitted = [x for x, kk in zip(motions, kappas) if kk]
    if not np.any(obj > 0):
        a_hat = np.zeros((sum(x.shape[0] for x in admitted), admitted[0].shape[1]))
        return RREstimate(float(grid[0]), a_hat, 0.0, False, degenerate=True, **meta)
    f0 = refine_peak(grid, obj, k)
    a_hat = np.concatenate([estimate_amplitudes(x, f0) for x in admitted])
    stat, periodic = periodicity_test(a_hat, admitted[0].n_samples, cfg.eta)
    return RREstimate(f0, a_hat, stat, periodic, **meta)


def write_manifest(rois: RoiSet, path):
    """One line per ROI: ``r,cx,cy,W`` with ``cx`` the column and ``cy`` the row."""
    with open(path, "w") as fh:
        for r, (row, col) in enumerate(rois.centers):
            fh.write(f"{r},{col},{row},{rois.size}\n")


def read_manifest(path) -> RoiSet:
    centers, sizes = [], set()
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            _, cx, cy, w = (int(v) for v in line.split(","))
            centers.append((cy, cx))
            sizes.add(w)
    if len(sizes) != 1:
        raise ValueError(f"manifest {path} mixes ROI sizes {sorted(sizes)}")
    return RoiSet(centers, sizes.pop(), np.zeros((0, 0)))

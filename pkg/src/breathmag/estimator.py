"""Maximum-likelihood fundamental-frequency estimation on multichannel
windows.

Observations are arrays ``x[m, c, n]``: ``M`` pyramid levels (or pixels,
or ROIs times levels), ``C`` components per level and ``N`` samples.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .errors import FrequencyAtEdge, WindowTooLong


@dataclass(frozen=True)
class MotionMatrix:
    x: np.ndarray
    fs_hz: float

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        if x.ndim == 1:
            x = x[None, None, :]
        elif x.ndim == 2:
            x = x[:, None, :]
        if x.ndim != 3:
            raise ValueError(f"expected (M, C, N) array, got shape {x.shape}")
        if x.shape[-1] < 2:
            raise ValueError("need at least two samples")
        if not np.all(np.isfinite(x)):
            raise ValueError("observations must be finite")
        object.__setattr__(self, "x", x)

    @property
    def shape(self):
        return self.x.shape

    @property
    def n_samples(self) -> int:
        return self.x.shape[-1]

    def window(self, start: int, stop: int) -> "MotionMatrix":
        return MotionMatrix(self.x[..., start:stop], self.fs_hz)


@dataclass(frozen=True)
class EstimatorConfig:
    f_min_hz: float = 0.19
    f_max_hz: float = 0.9
    grid_step_hz: float = 0.005
    eta: float = 0.0

    def __post_init__(self):
        if not 0 <= self.f_min_hz < self.f_max_hz:
            raise ValueError("need 0 <= f_min < f_max")
        if not 0 < self.grid_step_hz <= (self.f_max_hz - self.f_min_hz) / 10:
            raise ValueError("grid step must be positive and at most a tenth of the band")
        if self.eta < 0:
            raise ValueError("eta must be non-negative")

    def grid(self) -> np.ndarray:
        n = int(math.floor((self.f_max_hz - self.f_min_hz) / self.grid_step_hz + 1e-9))
        return self.f_min_hz + self.grid_step_hz * np.arange(n + 1)

    def check_rate(self, fs_hz: float):
        if not self.f_max_hz < fs_hz / 2:
            raise ValueError(f"f_max {self.f_max_hz} must be below Nyquist {fs_hz / 2}")


@dataclass
class RREstimate:
    f0_hat_hz: float
    a_hat: np.ndarray
    periodicity_stat: float
    periodic: bool
    window_index: int = 0
    t_start_s: float = 0.0
    t_end_s: float = 0.0
    warmup: bool = False
    degenerate: bool = False
    valid: bool = True

    @property
    def rr_bpm(self) -> float:
        return 60.0 * self.f0_hat_hz


def _as_array(x) -> np.ndarray:
    if isinstance(x, MotionMatrix):
        return x.x
    return MotionMatrix(x, 1.0).x


def remove_mean(x) -> np.ndarray:
    x = _as_array(x)
    return x - x.mean(axis=-1, keepdims=True)


def _dtft(x: np.ndarray, freqs, fs_hz: float) -> np.ndarray:
    """DTFT of every channel at every frequency, shape ``(..., F)``."""
    n = np.arange(x.shape[-1])
    basis = np.exp(-2j * np.pi * np.outer(n, np.atleast_1d(freqs)) / fs_hz)
    return x @ basis


def periodogram_objective(x, f, fs_hz: float | None = None, demean: bool = True):
    """Sum over channels of ``|sum_n x[m,c,n] exp(-j 2 pi f n / fs)|^2``.

    ``f`` may be a scalar or an array of frequencies.
    """
    if fs_hz is None:
        fs_hz = x.fs_hz
    xa = remove_mean(x) if demean else _as_array(x)
    flat = xa.reshape(-1, xa.shape[-1])
    spec = _dtft(flat, f, fs_hz)
    obj = np.sum(spec.real ** 2 + spec.imag ** 2, axis=0)
    return float(obj[0]) if np.ndim(f) == 0 else obj


def grid_argmax(objective: np.ndarray) -> int:
    """Index of the largest value; ties resolve to the lowest frequency."""
    return int(np.argmax(objective))


def _parabolic_offset(y_left, y_mid, y_right) -> float:
    """Vertex of the parabola through three equally spaced points, in steps
    from the middle one; 0 when the points are not concave."""
    denom = y_left - 2.0 * y_mid + y_right
    if denom >= 0:
        return 0.0
    return float(0.5 * (y_left - y_right) / denom)


def refine_peak(grid: np.ndarray, objective: np.ndarray, k: int) -> float:
    """Three-point parabolic interpolation of ``log(objective)`` around ``k``.

    The result stays within half a grid step of ``grid[k]`` and inside the
    band. At a band edge the three innermost points are used.
    """
    if len(grid) < 3:
        return float(grid[k])
    j = min(max(k, 1), len(grid) - 2)
    tiny = np.finfo(float).tiny
    y = np.log(np.maximum(objective[j - 1:j + 2], tiny))
    step = grid[1] - grid[0]
    f = grid[j] + _parabolic_offset(*y) * step
    lo = max(grid[k] - step / 2, grid[0])
    hi = min(grid[k] + step / 2, grid[-1])
    return float(np.clip(f, lo, hi))


def estimate_f0(x, cfg: EstimatorConfig, fs_hz: float | None = None, return_grid: bool = False):
    """Grid maximization of the periodogram objective plus parabolic refinement.

    Returns ``f0`` (or ``(f0, grid, objective, k)`` with ``return_grid``).
    An all-zero window yields ``f_min`` with an all-zero objective.
    """
    if fs_hz is None:
        fs_hz = x.fs_hz
    cfg.check_rate(fs_hz)
    grid = cfg.grid()
    obj = periodogram_objective(x, grid, fs_hz)
    k = grid_argmax(obj)
    f0 = float(grid[0]) if not np.any(obj > 0) else refine_peak(grid, obj, k)
    if return_grid:
        return f0, grid, obj, k
    return f0


def estimate_amplitudes(x, f0_hz: float, fs_hz: float | None = None, demean: bool = True):
    """Per-channel amplitudes ``(2/N) |DTFT(f0)|``, shape ``(M, C)``."""
    if fs_hz is None:
        fs_hz = x.fs_hz
    xa = remove_mean(x) if demean else _as_array(x)
    n = xa.shape[-1]
    edge = fs_hz / n
    if not (edge <= f0_hz <= fs_hz / 2 - edge):
        raise FrequencyAtEdge(
            f"f0={f0_hz} Hz lies within 1/(N Ts)={edge:.4g} Hz of 0 or Nyquist")
    spec = _dtft(xa, f0_hz, fs_hz)[..., 0]
    return 2.0 / n * np.abs(spec)


def periodicity_test(a_hat, n_samples: int, eta: float):
    """``stat = N / (M C) * sum a^2``; periodic iff ``stat > eta``."""
    a_hat = np.asarray(a_hat, dtype=float)
    stat = n_samples / a_hat.size * float(np.sum(a_hat ** 2))
    return stat, bool(stat > eta)


def estimate_window(x: MotionMatrix, cfg: EstimatorConfig, **meta) -> RREstimate:
    """Full per-window estimate: frequency, amplitudes and periodicity."""
    f0, _, obj, _ = estimate_f0(x, cfg, return_grid=True)
    if not np.any(obj > 0):
        a_hat = np.zeros(x.shape[:2])
        return RREstimate(f0, a_hat, 0.0, False, degenerate=True, **meta)
    try:
        a_hat = estimate_amplitudes(x, f0)
    except FrequencyAtEdge:
        # window too short to resolve f0 from DC
        return RREstimate(f0, np.zeros(x.shape[:2]), 0.0, False, degenerate=True, **meta)
    stat, periodic = periodicity_test(a_hat, x.n_samples, cfg.eta)
    return RREstimate(f0, a_hat, stat, periodic, **meta)


@dataclass(frozen=True)
class WindowingConfig:
    window_s: float = 20.0
    rho: float = 0.5

    def __post_init__(self):
        if not 0 <= self.rho < 1:
            raise ValueError("rho must lie in [0, 1)")
        if not self.window_s > 0:
            raise ValueError("window length must be positive")

    def frames(self, fs_hz: float) -> tuple[int, int]:
        n = int(round(self.window_s * fs_hz))
        hop = int(round(n * (1 - self.rho)))
        if hop < 1:
            raise ValueError("interlacing leaves a hop below one frame")
        return n, hop


@dataclass(frozen=True)
class Window:
    index: int
    start: int
    stop: int
    warmup: bool


def window_slicer(total_frames: int, cfg: WindowingConfig, fs_hz: float) -> list[Window]:
    """Interlaced windows lying fully inside the signal.

    With ``K = ceil(N / hop)`` hops per window, the first ``K - 1`` windows
    are flagged as warm-up: they stand in for the partially filled windows a
    streaming estimator would emit before a full window is available.
    """
    n, hop = cfg.frames(fs_hz)
    if n > total_frames:
        raise WindowTooLong(f"window of {n} frames exceeds the {total_frames}-frame signal")
    n_warm = math.ceil(n / hop) - 1
    starts = range(0, total_frames - n + 1, hop)
    return [Window(i, s, s + n, i < n_warm) for i, s in enumerate(starts)]


def calibrate_eta(n_samples: int, n_channels: int, noise_sigma: float, cfg: EstimatorConfig,
                  fs_hz: float, trials: int = 200, quantile: float = 0.95, seed: int = 0) -> float:
    """Threshold as the ``quantile`` of the periodicity statistic on pure
    Gaussian noise windows of the given shape."""
    rng = np.random.default_rng(seed)
    stats = []
    for _ in range(trials):
        x = MotionMatrix(rng.normal(0, noise_sigma, (n_channels, 1, n_samples)), fs_hz)
        est = estimate_window(x, EstimatorConfig(cfg.f_min_hz, cfg.f_max_hz, cfg.grid_step_hz))
        stats.append(est.periodicity_stat)
    return float(np.quantile(stats, quantile))


def estimate_windows(x: MotionMatrix, win_cfg: WindowingConfig, cfg: EstimatorConfig) -> list[RREstimate]:
    out = []
    for w in window_slicer(x.n_samples, win_cfg, x.fs_hz):
        est = estimate_window(
            x.window(w.start, w.stop), cfg, window_index=w.index,
            t_start_s=w.start / x.fs_hz, t_end_s=w.stop / x.fs_hz, warmup=w.warmup)
        out.append(est)
    return out


RESULT_COLUMNS = ["window", "t_start_s", "t_end_s", "f0_hz", "rr_bpm", "stat", "periodic", "warmup"]


def write_results_csv(estimates, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(RESULT_COLUMNS)
        for e in estimates:
            f0 = f"{e.f0_hat_hz:.6f}" if e.valid else "nan"
            rr = f"{e.rr_bpm:.4f}" if e.valid else "nan"
            w.writerow([e.window_index, f"{e.t_start_s:.3f}", f"{e.t_end_s:.3f}", f0, rr,
                        f"{e.periodicity_stat:.6g}", int(e.periodic), int(e.warmup)])


def read_results_csv(path) -> list[dict]:
    rows = []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            rows.append({
                "window": int(row["window"]),
                "t_start_s": float(row["t_start_s"]),
                "t_end_s": float(row["t_end_s"]),
                "f0_hz": float(row["f0_hz"]),
                "rr_bpm": float(row["rr_bpm"]),
                "stat": float(row["stat"]),
                "periodic": row["periodic"] == "1",
                "warmup": row["warmup"] == "1",
            })
    return rows

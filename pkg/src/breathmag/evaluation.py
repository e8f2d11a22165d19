"""Scoring per-window estimates against reference frequencies."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import LengthMismatch, ZeroReference

DB_FLOOR = -60.0


def to_db(rmse: float, factor: float = 20.0) -> float:
    """``factor * log10(rmse)``; ``-inf`` for a perfect score."""
    return -math.inf if rmse == 0 else factor * math.log10(rmse)


def format_db(value_db: float, floor: float = DB_FLOOR) -> str:
    return f"< {floor:g} dB" if value_db < floor else f"{value_db:.2f} dB"


def _pair(est, ref, keep=None):
    est = np.asarray(est, dtype=float)
    ref = np.asarray(ref, dtype=float)
    if est.shape != ref.shape:
        raise LengthMismatch(f"{est.size} estimates vs {ref.size} reference values")
    if keep is not None:
        keep = np.asarray(keep, dtype=bool)
        if keep.shape != est.shape:
            raise LengthMismatch("mask length differs from the estimates")
        est, ref = est[keep], ref[keep]
    return est, ref


def normalized_rmse(est, ref, keep=None) -> float:
    """``sqrt(sum |est - ref|^2 / sum |ref|^2)`` over the kept windows."""
    est, ref = _pair(est, ref, keep)
    if est.size == 0:
        raise LengthMismatch("no windows left to score")
    den = float(np.sum(ref ** 2))
    if den == 0:
        raise ZeroReference("reference frequencies are all zero")
    return math.sqrt(float(np.sum((est - ref) ** 2)) / den)


def tolerance_band(ref, pct: float = 0.15):
    if not pct > 0:
        raise ValueError("pct must be positive")
    ref = np.asarray(ref, dtype=float)
    return (1 - pct) * ref, (1 + pct) * ref


def in_band(est, ref, pct: float = 0.15) -> np.ndarray:
    lo, hi = tolerance_band(ref, pct)
    est = np.asarray(est, dtype=float)
    return (est >= lo) & (est <= hi)


def genie_correct(est, ref) -> np.ndarray:
    """Halve every estimate whose half lies strictly closer to the reference."""
    est, ref = _pair(est, ref)
    half = est / 2
    return np.where(np.abs(half - ref) < np.abs(est - ref), half, est)


@dataclass
class EvalReport:
    rmse: float
    rmse_db: float
    errors: np.ndarray
    in_band_fraction: float
    n_windows: int
    warmup_excluded: bool
    genie: bool = False
    db_factor: float = 20.0
    notes: list = field(default_factory=list)

    def summary(self) -> str:
        lines = [
            f"windows scored: {self.n_windows}"
            + (" (warm-up windows excluded)" if self.warmup_excluded else ""),
            f"genie-aided correction: {'on' if self.genie else 'off'}",
            f"normalized RMSE: {self.rmse:.6f} ({format_db(self.rmse_db)}, "
            f"{self.db_factor:g}*log10)",
            f"within +/-15% of reference: {100 * self.in_band_fraction:.1f}%",
        ]
        return "\n".join(lines + list(self.notes)) + "\n"


def evaluate(est, ref, warmup=None, genie: bool = False, pct: float = 0.15,
             db_factor: float = 20.0, valid=None) -> EvalReport:
    """Score ``est`` against ``ref``.

    Windows flagged in ``warmup`` or not flagged in ``valid`` are dropped
    before scoring.
    """
    est, ref = _pair(est, ref)
    keep = np.ones(est.shape, dtype=bool)
    if warmup is not None:
        keep &= ~_pair(warmup, est)[0].astype(bool)
    if valid is not None:
        keep &= _pair(valid, est)[0].astype(bool)
    keep &= np.isfinite(est)
    est, ref = est[keep], ref[keep]
    if genie:
        est = genie_correct(est, ref)
    rmse = normalized_rmse(est, ref)
    return EvalReport(rmse=rmse, rmse_db=to_db(rmse, db_factor), errors=est - ref,
                      in_band_fraction=float(np.mean(in_band(est, ref, pct))),
                      n_windows=int(est.size), warmup_excluded=warmup is not None,
                      genie=genie, db_factor=db_factor)


def read_reference_csv(path, offset: int = 0) -> dict[int, float]:
    """``window,f0_hz`` rows keyed by window index shifted by ``offset``."""
    out = {}
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            out[int(row["window"]) + offset] = float(row["f0_hz"])
    return out


def write_report_csv(report: EvalReport, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["rmse", "rmse_db", "in_band_fraction", "n_windows", "genie"])
        w.writerow([f"{report.rmse:.9g}", f"{report.rmse_db:.6g}",
                    f"{report.in_band_fraction:.6g}", report.n_windows, int(report.genie)])


def write_plot_data(path, t, f_est, f_ref, pct: float = 0.15):
    lo, hi = tolerance_band(f_ref, pct)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "f_est", "f_ref", "lo", "hi"])
        for row in zip(t, f_est, f_ref, lo, hi):
            w.writerow([f"{v:.6f}" for v in row])

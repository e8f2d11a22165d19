"""Synthetic breathing videos with known ground truth.

A textured patch inside a motion region translates by
``d[n] = A sin(2 pi f0 n / fs)`` pixels (bilinear resampling), optional large
"distractor" shifts are superimposed, and i.i.d. Gaussian noise is added.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np
from scipy.ndimage import map_coordinates

from .errors import OverlappingRegions, SpecInvalid
from .frameio import FrameSequence

PATTERNS = ("gradient", "gabor", "blob")
MAX_DISPLACEMENT_PX = 5.0


@dataclass(frozen=True)
class Distractor:
    onset_s: float
    duration_s: float
    magnitude_px: float


@dataclass(frozen=True)
class SynthSpec:
    """One moving region on a canvas.

    ``motion_region`` is ``(row0, col0, height, width)``; ``None`` means the
    whole frame. ``direction_deg`` is the motion direction measured from the
    first (row) axis towards the second; the Gabor carrier is aligned with it.
    """

    dims: tuple = (64, 64)
    fs_hz: float = 30.0
    duration_s: float = 60.0
    f0_hz: float = 0.25
    displacement_px: float = 1.0
    pattern: str = "gabor"
    motion_region: tuple | None = None
    noise_sigma: float = 0.0
    distractor: Distractor | None = None
    wavelength_px: float = 12.0
    direction_deg: float = 0.0
    contrast: float = 0.4
    background: float = 0.5

    def validate(self):
        rows, cols = self.dims
        if rows < 4 or cols < 4:
            raise SpecInvalid(f"canvas {self.dims} is too small")
        if not self.fs_hz > 0 or not self.duration_s > 0:
            raise SpecInvalid("fs and duration must be positive")
        if not 0 <= self.f0_hz < self.fs_hz / 2:
            raise SpecInvalid(f"f0={self.f0_hz} must lie below Nyquist {self.fs_hz / 2}")
        if not 0 <= abs(self.displacement_px) <= MAX_DISPLACEMENT_PX:
            raise SpecInvalid(f"displacement must be at most {MAX_DISPLACEMENT_PX} px")
        if self.pattern not in PATTERNS:
            raise SpecInvalid(f"pattern must be one of {PATTERNS}")
        if self.noise_sigma < 0:
            raise SpecInvalid("noise_sigma must be non-negative")
        r0, c0, h, w = self.region
        if h < 2 or w < 2 or r0 < 0 or c0 < 0 or r0 + h > rows or c0 + w > cols:
            raise SpecInvalid(f"motion region {self.region} is outside the {rows}x{cols} canvas")
        if self.distractor is not None and self.distractor.duration_s <= 0:
            raise SpecInvalid("distractor duration must be positive")

    @property
    def region(self) -> tuple:
        if self.motion_region is None:
            return (0, 0, *self.dims)
        return tuple(int(v) for v in self.motion_region)

    @property
    def n_frames(self) -> int:
        return int(round(self.duration_s * self.fs_hz))

    @property
    def center(self) -> tuple[float, float]:
        r0, c0, h, w = self.region
        return r0 + (h - 1) / 2, c0 + (w - 1) / 2

    def displacement(self) -> np.ndarray:
        n = np.arange(self.n_frames)
        return self.displacement_px * np.sin(2 * np.pi * self.f0_hz * n / self.fs_hz)

    def distractor_offset(self) -> np.ndarray:
        off = np.zeros(self.n_frames)
        if self.distractor is not None:
            t = np.arange(self.n_frames) / self.fs_hz
            d = self.distractor
            off[(t >= d.onset_s) & (t < d.onset_s + d.duration_s)] = d.magnitude_px
        return off


@dataclass
class GroundTruth:
    f0_hz: float
    fs_hz: float
    displacement: np.ndarray = field(repr=False)
    distractor_intervals: list = field(default_factory=list)
    region_f0: list = field(default_factory=list)
    region_centers: list = field(default_factory=list)

    def distractor_frames(self) -> np.ndarray:
        n = len(self.displacement)
        flags = np.zeros(n, dtype=bool)
        t = np.arange(n) / self.fs_hz
        for start, stop in self.distractor_intervals:
            flags[(t >= start) & (t < stop)] = True
        return flags

    def window_truth(self, windows) -> list[tuple[int, float, bool]]:
        """``(window, f0_hz, distractor_flag)`` per slicer window; a window is
        flagged when it contains a distractor onset or offset frame."""
        flags = self.distractor_frames()
        edges = np.zeros_like(flags)
        edges[1:] = flags[1:] != flags[:-1]
        return [(w.index, self.f0_hz, bool(edges[w.start:w.stop].any())) for w in windows]


def write_truth_csv(rows, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["window", "f0_hz", "distractor_flag"])
        for idx, f0, flag in rows:
            w.writerow([idx, f"{f0:.6f}", int(flag)])


def _texture(spec: SynthSpec, rr, cc) -> np.ndarray:
    """Pattern intensity at (possibly fractional) coordinates ``rr, cc``
    relative to the region center."""
    theta = np.deg2rad(spec.direction_deg)
    along = rr * np.cos(theta) + cc * np.sin(theta)
    _, _, h, w = spec.region
    sigma = min(h, w) / 5.0
    env = np.exp(-(rr ** 2 + cc ** 2) / (2 * sigma ** 2))
    if spec.pattern == "gabor":
        return spec.contrast * env * np.cos(2 * np.pi * along / spec.wavelength_px)
    if spec.pattern == "blob":
        return spec.contrast * env
    # "gradient": a smooth ramp along the motion direction, fading at the edges
    return spec.contrast * env * np.tanh(along / sigma)


def _render_base(spec: SynthSpec, margin: int) -> tuple[np.ndarray, int]:
    r0, c0, h, w = spec.region
    cr, cc = spec.center
    rr, cc_ = np.mgrid[r0 - margin:r0 + h + margin, c0 - margin:c0 + w + margin].astype(float)
    return _texture(spec, rr - cr, cc_ - cc), margin


def _region_frames(spec: SynthSpec, shifts: np.ndarray) -> np.ndarray:
    """Patch content inside the region for every frame, resampled bilinearly
    from a margin-padded base texture."""
    r0, c0, h, w = spec.region
    margin = int(np.ceil(np.max(np.abs(shifts)) if shifts.size else 0)) + 2
    base, margin = _render_base(spec, margin)
    theta = np.deg2rad(spec.direction_deg)
    dr, dc = np.cos(theta), np.sin(theta)
    rr, cc = np.mgrid[0:h, 0:w].astype(float)
    out = np.empty((len(shifts), h, w))
    for n, s in enumerate(shifts):
        coords = np.stack([rr + margin - s * dr, cc + margin - s * dc])
        out[n] = map_coordinates(base, coords, order=1, mode="nearest")
    return out


def _add_region(canvas: np.ndarray, spec: SynthSpec, shifts: np.ndarray):
    r0, c0, h, w = spec.region
    canvas[:, r0:r0 + h, c0:c0 + w] += _region_frames(spec, shifts)


def generate(spec: SynthSpec, seed: int = 0) -> tuple[FrameSequence, GroundTruth]:
    """Render ``spec``. A distractor translates the whole frame content."""
    spec.validate()
    n = spec.n_frames
    disp = spec.displacement()
    canvas = np.full((n, *spec.dims), spec.background)
    _add_region(canvas, spec, disp)
    intervals = []
    off = spec.distractor_offset()
    if spec.distractor is not None:
        d = spec.distractor
        intervals.append((d.onset_s, d.onset_s + d.duration_s))
        theta = np.deg2rad(spec.direction_deg)
        for k in np.flatnonzero(off):
            shift = off[k] * np.array([np.cos(theta), np.sin(theta)])
            rr, cc = np.mgrid[0:spec.dims[0], 0:spec.dims[1]].astype(float)
            canvas[k] = map_coordinates(canvas[k], [rr - shift[0], cc - shift[1]],
                                        order=1, mode="nearest")
    _add_noise(canvas, spec.noise_sigma, seed)
    truth = GroundTruth(spec.f0_hz, spec.fs_hz, disp, intervals, [spec.f0_hz], [spec.center])
    return FrameSequence(canvas, spec.fs_hz), truth


def _add_noise(canvas: np.ndarray, sigma: float, seed: int):
    if sigma > 0:
        rng = np.random.default_rng(seed)
        canvas += rng.normal(0.0, sigma, canvas.shape)


def _overlaps(a, b) -> bool:
    ar, ac, ah, aw = a
    br, bc, bh, bw = b
    return ar < br + bh and br < ar + ah and ac < bc + bw and bc < ac + aw


def generate_multiroi(specs, seed: int = 0, noise_sigma: float | None = None,
                      background: float = 0.5) -> tuple[FrameSequence, GroundTruth]:
    """Compose several moving regions on one canvas.

    Canvas size, rate and duration come from the first spec. Each region's
    distractor shifts only that region's content. Noise defaults to the first
    spec's ``noise_sigma``.
    """
    specs = list(specs)
    if not specs:
        raise SpecInvalid("need at least one region")
    first = specs[0]
    for s in specs:
        s.validate()
        if (s.dims, s.fs_hz, s.duration_s) != (first.dims, first.fs_hz, first.duration_s):
            raise SpecInvalid("regions must share canvas size, rate and duration")
        if s.motion_region is None:
            raise SpecInvalid("every region needs an explicit motion_region")
    for i, a in enumerate(specs):
        for b in specs[i + 1:]:
            if _overlaps(a.region, b.region):
                raise OverlappingRegions(f"regions {a.region} and {b.region} overlap")
    canvas = np.full((first.n_frames, *first.dims), background)
    intervals = []
    for s in specs:
        _add_region(canvas, s, s.displacement() + s.distractor_offset())
        if s.distractor is not None:
            intervals.append((s.distractor.onset_s, s.distractor.onset_s + s.distractor.duration_s))
    sigma = first.noise_sigma if noise_sigma is None else noise_sigma
    _add_noise(canvas, sigma, seed)
    truth = GroundTruth(first.f0_hz, first.fs_hz, first.displacement(), intervals,
                        [s.f0_hz for s in specs], [s.center for s in specs])
    return FrameSequence(canvas, first.fs_hz), truth


def noise_sigma_for_snr(spec: SynthSpec, snr_db: float) -> float:
    """Noise level giving ``snr_db`` relative to the pattern's spatial
    variance inside the motion region."""
    base, _ = _render_base(spec, 0)
    return float(np.sqrt(base.var() / 10 ** (snr_db / 10)))

"""Run configuration, subject profiles and the flat ``key=value`` format."""
from __future__ import annotations

from dataclasses import asdict, dataclass, fields, replace

from .amp_path import AmpConfig
from .estimator import EstimatorConfig, WindowingConfig
from .roi import RoiConfig
from .temporal import BandpassDesign, design_bandpass

METHODS = ("amplitude", "phase")

# Video-set parameters: pyramid levels, ROI size and count, band, alpha,
# window length and interlacing.
PROFILES = {
    "newborn": dict(levels=3, roi_size=21, rois=4, f_lo=0.3, f_hi=1.1, alpha=25.0,
                    window_s=20.0, rho=0.5),
    "adult": dict(levels=4, roi_size=41, rois=3, f_lo=0.19, f_hi=0.9, alpha=20.0,
                  window_s=20.0, rho=0.5),
    # the HD set used 16 px ROIs; odd sizes keep the center pixel defined
    "adult-hd": dict(levels=3, roi_size=17, rois=3, f_lo=0.19, f_hi=0.9, alpha=20.0,
                     window_s=20.0, rho=0.5),
}


@dataclass
class RunConfig:
    method: str = "phase"
    profile: str = "adult"
    levels: int = 4
    roi_size: int = 41
    rois: int = 3
    use_rois: bool = False
    downsample: int = 4
    calib_frames: int = 0  # 0 -> one estimation window
    calib_offset: int = 0
    f_lo: float = 0.19
    f_hi: float = 0.9
    alpha: float = 20.0
    gamma_th: float = 0.0  # amplitude-path binarization threshold; 0 -> calibrate
    gamma_bin: float = 0.05
    motion_th: float = 0.10
    eta: float = -1.0  # periodicity threshold; negative -> calibrate on noise
    noise_floor: float = 0.01  # noise sigma of the eta calibration video
    window_s: float = 20.0
    rho: float = 0.5
    grid_step: float = 0.005
    seed: int = 0
    fps: float = 0.0  # 0 -> from input metadata

    @classmethod
    def for_profile(cls, profile: str, **overrides) -> "RunConfig":
        if profile not in PROFILES:
            raise ValueError(f"unknown profile {profile!r}; choose from {sorted(PROFILES)}")
        return cls(profile=profile, **{**PROFILES[profile], **overrides}).validated()

    def validated(self) -> "RunConfig":
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}")
        if self.levels < 2:
            raise ValueError("need at least two pyramid levels")
        if not 0 < self.f_lo < self.f_hi:
            raise ValueError("need 0 < f_lo < f_hi")
        if self.noise_floor <= 0:
            raise ValueError("noise_floor must be positive")
        if self.alpha < 0:
            raise ValueError("alpha must be non-negative")
        RoiConfig(self.rois, self.roi_size, self.downsample, max(self.calib_frames, 2))
        WindowingConfig(self.window_s, self.rho)
        self.estimator()
        return self

    def design(self, fs_hz: float) -> BandpassDesign:
        return design_bandpass(self.f_lo, self.f_hi, fs_hz)

    def estimator(self) -> EstimatorConfig:
        return EstimatorConfig(self.f_lo, self.f_hi, self.grid_step, max(self.eta, 0.0))

    def windowing(self) -> WindowingConfig:
        return WindowingConfig(self.window_s, self.rho)

    def amp_config(self) -> AmpConfig:
        return AmpConfig.default(self.levels, self.alpha, self.gamma_th or None)

    def roi_config(self, fs_hz: float) -> RoiConfig:
        calib = self.calib_frames or int(round(self.window_s * fs_hz))
        return RoiConfig(self.rois, self.roi_size, self.downsample, calib,
                         calib_offset=self.calib_offset)

    def to_text(self) -> str:
        return "".join(f"{k}={_fmt(v)}\n" for k, v in asdict(self).items())


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    return str(v)


def _parse(kind, text: str):
    if kind is bool:
        low = text.strip().lower()
        if low not in ("true", "false", "1", "0", "yes", "no"):
            raise ValueError(f"not a boolean: {text!r}")
        return low in ("true", "1", "yes")
    return kind(text.strip())


FIELD_TYPES = {f.name: {"str": str, "int": int, "float": float, "bool": bool}[f.type]
               for f in fields(RunConfig)}


def parse_config_text(text: str) -> dict:
    """Parse flat ``key=value`` lines (``#`` comments allowed)."""
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key = key.strip().replace("-", "_")
        if not sep or key not in FIELD_TYPES:
            raise ValueError(f"line {lineno}: unknown or malformed entry {raw!r}")
        out[key] = _parse(FIELD_TYPES[key], value)
    return out


def resolve(profile: str | None = None, file_values: dict | None = None,
            **overrides) -> RunConfig:
    """Profile defaults, then config-file values, then explicit overrides.

    An explicit ``profile`` wins over one named in ``file_values``; the
    fallback is ``adult``.
    """
    file_values = dict(file_values or {})
    profile = profile or file_values.pop("profile", None) or "adult"
    file_values.pop("profile", None)
    cfg = RunConfig.for_profile(profile)
    merged = {**file_values, **{k: v for k, v in overrides.items() if v is not None}}
    return replace(cfg, **merged).validated()

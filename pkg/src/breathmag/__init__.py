"""Respiratory rate estimation from video by amplitude- and phase-based
motion magnification."""
from .errors import BreathmagError
from .frameio import FrameSequence, load_sequence
from .pyramid import build_laplacian, build_riesz, collapse
from .temporal import ADULT_BAND, NEWBORN_BAND, design_bandpass
from .estimator import (EstimatorConfig, MotionMatrix, WindowingConfig, estimate_f0,
                        estimate_windows, periodogram_objective, window_slicer)
from .roi import RoiConfig, select_rois
from .synth import SynthSpec, generate, generate_multiroi
from .evaluation import evaluate, genie_correct, normalized_rmse
from .config import PROFILES, RunConfig
from .pipeline import (amplitude_signals, calibrate_eta_for_run, estimate_sequence,
                       estimate_with_rois, phase_signals)

__version__ = "0.1.0"

"""Shared synthetic videos; rendering and pipelines are costly, so each
scenario is built once per session."""
import numpy as np
import pytest

from breathmag.synth import SynthSpec, generate


def gabor_spec(**kw):
    base = dict(dims=(64, 64), fs_hz=30.0, duration_s=60.0, f0_hz=0.25,
                displacement_px=1.0, pattern="gabor", noise_sigma=0.01)
    base.update(kw)
    return SynthSpec(**base)


@pytest.fixture(scope="session")
def breathing_video():
    """The 64x64, 30 fps, 60 s, 0.25 Hz, 1 px Gabor scenario."""
    return generate(gabor_spec(), seed=0)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)

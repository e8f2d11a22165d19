import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from breathmag.amp_path import (AmpConfig, AmpSignalExtractor, binarize_level,
                                calibrate_gamma_th, default_alphas, extract_amp_signals)
from breathmag.errors import GeometryMismatch
from breathmag.estimator import MotionMatrix, periodogram_objective
from breathmag.frameio import FrameSequence
from breathmag.pipeline import amplitude_signals
from breathmag.pyramid import build_laplacian
from breathmag.synth import SynthSpec, generate
from breathmag.temporal import NEWBORN_BAND, design_bandpass, filter_stack


def test_binarize_examples():
    assert not binarize_level(np.zeros((4, 4)), 1.0, 0.2).any()
    np.testing.assert_array_equal(binarize_level(np.array([0.1, -0.3]), 1.0, 0.2), [0, 1])
    assert not binarize_level(np.full((3, 3), 100.0), 0.0, 0.2).any()
    with pytest.raises(ValueError):
        binarize_level(np.zeros(3), 1.0, 0.0)


def test_default_alphas_and_config():
    a = default_alphas(4, 12)
    assert a[0] == 1 and a[-1] == 0 and a[2] == pytest.approx(12)
    assert a[1] == pytest.approx(np.sqrt(12))
    with pytest.raises(ValueError):
        AmpConfig([2.0, 0.0])
    with pytest.raises(ValueError):
        AmpConfig([1.0, 1.0])
    with pytest.raises(ValueError):
        AmpConfig([1.0, 0.0], gamma_th=0)


def test_half_the_pixels_gives_one_half():
    lv = np.zeros((3, 4, 4))
    lv[:, :2, :] = 1.0
    sig = extract_amp_signals([lv, np.zeros((3, 2, 2))], AmpConfig([1.0, 0.0], 0.5))
    np.testing.assert_array_equal(sig.lbar[0], 0.5)
    np.testing.assert_array_equal(sig.lbar[1], 0.0)


def test_static_video_is_silent():
    d = design_bandpass(*NEWBORN_BAND, 25)
    seq = FrameSequence(np.full((300, 32, 32), 0.4), 25)
    sig, _ = amplitude_signals(seq, d, 3, AmpConfig.default(3, gamma_th=1e-3))
    assert np.all(sig.lbar[:, d.warmup_samples():] == 0)


def test_geometry_errors():
    with pytest.raises(GeometryMismatch):
        extract_amp_signals([np.zeros((3, 4, 4))], AmpConfig([1.0, 0.0], 1.0))
    with pytest.raises(GeometryMismatch):
        extract_amp_signals([np.zeros((3, 4, 4)), np.zeros((4, 2, 2))], AmpConfig([1.0, 0.0], 1.0))
    d = design_bandpass(*NEWBORN_BAND, 25)
    ext = AmpSignalExtractor([(8, 8), (4, 4)], d, AmpConfig([1.0, 0.0], 1.0))
    with pytest.raises(GeometryMismatch):
        ext.push(build_laplacian(np.zeros((10, 10)), 2))
    with pytest.raises(ValueError):
        AmpSignalExtractor([(8, 8), (4, 4)], d, AmpConfig([1.0, 0.0]))


def test_calibrated_threshold_ignores_residual():
    g = [np.full((2, 2, 2), 0.1), np.full((2, 1, 1), 50.0)]
    assert calibrate_gamma_th(g, [1.0, 0.0]) == pytest.approx(0.3)


def test_streaming_matches_batch():
    seq, _ = generate(SynthSpec(dims=(32, 32), fs_hz=25, duration_s=8, noise_sigma=0.01), 3)
    d = design_bandpass(*NEWBORN_BAND, 25)
    cfg = AmpConfig.default(3, gamma_th=0.01)
    gammas = filter_stack([build_laplacian(f, 3) for f in seq.data], d)
    batch = extract_amp_signals(gammas, cfg)
    stream, _ = amplitude_signals(seq, d, 3, cfg)
    np.testing.assert_array_equal(batch.lbar, stream.lbar)


@pytest.fixture(scope="module")
def blob_gammas():
    seq, _ = generate(SynthSpec(dims=(48, 48), fs_hz=25, duration_s=20, f0_hz=0.75,
                                pattern="blob", noise_sigma=0.005), 0)
    d = design_bandpass(*NEWBORN_BAND, 25)
    return filter_stack([build_laplacian(f, 3) for f in seq.data], d)


def test_levels_bounded_and_non_negative(blob_gammas):
    sig = extract_amp_signals(blob_gammas, AmpConfig.default(3))
    assert sig.lbar.min() >= 0 and sig.lbar.max() <= 1


def _lbar(gammas, alphas, th):
    return np.stack([binarize_level(g, a, th).mean(axis=(-2, -1)) for g, a in zip(gammas, alphas)])


@settings(max_examples=25, deadline=None)
@given(k=st.sampled_from([2.0 ** p for p in range(-6, 7)]) | st.floats(0.01, 100),
       th=st.floats(1e-3, 0.05))
def test_scale_lability(blob_gammas, k, th):
    alphas = default_alphas(3, 12)
    base = _lbar(blob_gammas, alphas, th)
    np.testing.assert_array_equal(base, extract_amp_signals(blob_gammas, AmpConfig(alphas, th)).lbar)
    scaled = _lbar(blob_gammas, [a * k for a in alphas], th * k)
    if np.log2(k).is_integer():
        np.testing.assert_array_equal(scaled, base)
    else:
        # a general factor can only flip pixels sitting within rounding of the threshold
        assert np.max(np.abs(scaled - base)) <= 2.0 / blob_gammas[-1][0].size


def test_symmetric_oscillation_shows_second_harmonic(blob_gammas):
    sig = extract_amp_signals(blob_gammas, AmpConfig.default(3))
    grid = np.arange(0.1, 3.0, 0.01)
    for m in (0, 1):
        x = MotionMatrix(sig.lbar[m, 100:], 25)
        obj = periodogram_objective(x, grid)
        assert grid[np.argmax(obj)] == pytest.approx(1.5, abs=0.02)
        assert obj.max() > 10 * periodogram_objective(x, 0.75)

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from breathmag.errors import FrequencyAtEdge, WindowTooLong
from breathmag.estimator import (EstimatorConfig, MotionMatrix, RREstimate, WindowingConfig,
                                 calibrate_eta, estimate_amplitudes, estimate_f0,
                                 estimate_window, estimate_windows, periodicity_test,
                                 periodogram_objective, read_results_csv, window_slicer,
                                 write_results_csv)


def brute_objective(x, freqs, fs):
    """Loop-based periodogram with explicit cosine/sine sums."""
    x = np.asarray(x, dtype=float)
    n = np.arange(x.shape[-1])
    out = []
    for f in freqs:
        c, s = np.cos(2 * np.pi * f * n / fs), np.sin(2 * np.pi * f * n / fs)
        total = 0.0
        for ch in x.reshape(-1, x.shape[-1]):
            ch = ch - ch.mean()
            total += np.dot(ch, c) ** 2 + np.dot(ch, s) ** 2
        out.append(total)
    return np.array(out)


def tone(f, fs, n, amp=1.0, phase=0.0):
    return amp * np.cos(2 * np.pi * f * np.arange(n) / fs + phase)


def test_zero_input_objective():
    x = MotionMatrix(np.zeros((2, 2, 40)), 25)
    assert np.all(periodogram_objective(x, np.linspace(0.1, 1, 7)) == 0)
    est = estimate_window(x, EstimatorConfig())
    assert est.degenerate and not est.periodic and est.periodicity_stat == 0


def test_cosine_objective_closed_form():
    x = MotionMatrix(tone(0.5, 25, 500), 25)
    peak = periodogram_objective(x, 0.5)
    assert peak == pytest.approx(62500, rel=1e-9)
    assert peak >= 100 * periodogram_objective(x, 0.6)
    assert peak >= 100 * periodogram_objective(x, 0.4)


def test_objective_is_additive_over_channels():
    one = MotionMatrix(tone(0.3, 30, 300), 30)
    two = MotionMatrix(np.stack([tone(0.3, 30, 300)] * 2)[:, None], 30)
    f = np.linspace(0.2, 0.8, 13)
    np.testing.assert_allclose(periodogram_objective(two, f), 2 * periodogram_objective(one, f),
                               atol=1e-9)


@pytest.mark.parametrize("f0", [0.25, 0.75])
def test_estimate_pure_tone(f0):
    x = MotionMatrix(np.stack([np.zeros(600), tone(f0, 30, 600, phase=0.4)])[:, None], 30)
    assert abs(estimate_f0(x, EstimatorConfig(0.19, 0.9)) - f0) <= 0.005


def test_refined_estimate_within_fine_grid_bin():
    rng = np.random.default_rng(5)
    cfg = EstimatorConfig()
    fine = np.arange(cfg.f_min_hz, cfg.f_max_hz + 1e-9, cfg.grid_step_hz / 10)
    for _ in range(50):
        f = rng.uniform(cfg.f_min_hz, cfg.f_max_hz)
        m, c, n = 3, 2, 600
        amp = 1.0
        sigma = np.sqrt(amp ** 2 / 2 / 10)  # 10 dB per channel
        phases = rng.uniform(0, 2 * np.pi, (m, c, 1))
        x = amp * np.cos(2 * np.pi * f * np.arange(n) / 30 + phases) + rng.normal(0, sigma, (m, c, n))
        est = estimate_f0(MotionMatrix(x, 30), cfg)
        oracle = fine[np.argmax(brute_objective(x, fine, 30))]
        assert abs(est - oracle) <= cfg.grid_step_hz / 10


def test_grid_argmax_equals_brute_force():
    rng = np.random.default_rng(6)
    cfg = EstimatorConfig(0.1, 2.0, 0.02)
    for _ in range(100):
        m, c, n = rng.integers(1, 5), rng.integers(1, 3), rng.integers(8, 65)
        x = rng.normal(size=(m, c, n))
        _, grid, obj, k = estimate_f0(MotionMatrix(x, 10.0), cfg, return_grid=True)
        assert k == int(np.argmax(brute_objective(x, grid, 10.0)))


def test_amplitudes():
    fs, n = 30, 600
    x = np.stack([tone(0.3, fs, n, 0.8, 1.0), np.zeros(n), tone(0.3, fs, n, 0.4, -2.0)])[:, None]
    a = estimate_amplitudes(MotionMatrix(x, fs), 0.3)
    assert a.shape == (3, 1)
    assert a[0, 0] == pytest.approx(0.8, rel=0.02)
    assert a[1, 0] == 0
    assert a[2, 0] == pytest.approx(a[0, 0] / 2, rel=0.02)
    with pytest.raises(FrequencyAtEdge):
        estimate_amplitudes(MotionMatrix(x, fs), 0.01)
    with pytest.raises(FrequencyAtEdge):
        estimate_amplitudes(MotionMatrix(x, fs), 14.99)


def test_periodicity_test():
    assert periodicity_test(np.zeros((2, 2)), 500, 0.1) == (0.0, False)
    stat, flag = periodicity_test(np.array([[0.2]]), 500, 0.0)
    assert stat == pytest.approx(20.0) and flag
    assert periodicity_test(np.array([[0.2]]), 500, 20.0 + 1e-12)[1] is False
    exact = periodicity_test(np.array([[0.5]]), 4, 1.0)
    assert exact == (1.0, False)


def test_slicer_examples():
    fs = 30.0
    w = window_slicer(56 * 30, WindowingConfig(20, 0.9), fs)
    assert len(w) == 19 and sum(x.warmup for x in w) == 9
    assert all(b.start - a.start == 60 for a, b in zip(w, w[1:]))
    assert w[-1].stop <= 56 * 30
    assert [x.warmup for x in w[:10]] == [True] * 9 + [False]
    w0 = window_slicer(60 * 30, WindowingConfig(20, 0.0), fs)
    assert [(x.start, x.stop) for x in w0] == [(0, 600), (600, 1200), (1200, 1800)]
    assert not any(x.warmup for x in w0)
    w75 = window_slicer(60 * 30, WindowingConfig(20, 0.75), fs)
    assert w75[1].start == 150 and sum(x.warmup for x in w75) == 3
    with pytest.raises(WindowTooLong):
        window_slicer(100, WindowingConfig(20, 0.5), fs)


def test_config_validation():
    with pytest.raises(ValueError):
        EstimatorConfig(0.9, 0.19)
    with pytest.raises(ValueError):
        EstimatorConfig(eta=-1)
    with pytest.raises(ValueError):
        WindowingConfig(20, 1.0)
    with pytest.raises(ValueError):
        estimate_f0(MotionMatrix(np.zeros(10), 1.0), EstimatorConfig())
    with pytest.raises(ValueError):
        MotionMatrix(np.array([0.0, np.nan]), 1)


def test_grid_contains_both_edges():
    g = EstimatorConfig(0.19, 0.9, 0.005).grid()
    assert g[0] == 0.19 and g[-1] == pytest.approx(0.9) and len(g) == 143


small_mm = st.tuples(st.integers(1, 4), st.integers(1, 2), st.integers(16, 64), st.integers(0, 10_000))


@settings(max_examples=60, deadline=None)
@given(small_mm, st.floats(1e-3, 1e3))
def test_scale_invariance(shape, k):
    m, c, n, seed = shape
    x = np.random.default_rng(seed).normal(size=(m, c, n))
    cfg = EstimatorConfig(0.5, 4.0, 0.05)
    _, _, _, k1 = estimate_f0(MotionMatrix(x, 10), cfg, return_grid=True)
    _, _, _, k2 = estimate_f0(MotionMatrix(k * x, 10), cfg, return_grid=True)
    assert k1 == k2


@settings(max_examples=60, deadline=None)
@given(small_mm)
def test_permutation_and_mean_shift_invariance(shape):
    m, c, n, seed = shape
    rng = np.random.default_rng(seed)
    x = rng.normal(size=(m, c, n))
    cfg = EstimatorConfig(0.5, 4.0, 0.05)
    f = estimate_f0(MotionMatrix(x, 10), cfg)
    flat = x.reshape(m * c, n)[rng.permutation(m * c)]
    assert estimate_f0(MotionMatrix(flat.reshape(m, c, n), 10), cfg) == pytest.approx(f, abs=1e-12)
    shifted = x + rng.normal(scale=50, size=(m, c, 1))
    assert estimate_f0(MotionMatrix(shifted, 10), cfg) == pytest.approx(f, abs=1e-9)


def test_error_shrinks_with_snr():
    rng = np.random.default_rng(7)
    cfg = EstimatorConfig()
    medians = []
    for snr_db in (0, 10, 20):
        errs = []
        for _ in range(40):
            f = rng.uniform(0.2, 0.45)
            sigma = np.sqrt(0.5 / 10 ** (snr_db / 10))
            x = tone(f, 30, 600, phase=rng.uniform(0, 6.3)) + rng.normal(0, sigma, 600)
            errs.append(abs(estimate_f0(MotionMatrix(x, 30), cfg) - f))
        medians.append(np.median(errs))
    assert medians[0] > medians[1] > medians[2]


def test_calibrated_eta_separates_noise_from_tone():
    cfg = EstimatorConfig()
    eta = calibrate_eta(600, 2, 0.1, cfg, 30, trials=50)
    assert eta > 0
    rng = np.random.default_rng(8)
    noise = MotionMatrix(rng.normal(0, 0.1, (2, 1, 600)), 30)
    sig = MotionMatrix(tone(0.3, 30, 600, 0.2) + rng.normal(0, 0.1, (2, 1, 600)), 30)
    cfg_eta = EstimatorConfig(eta=eta)
    assert estimate_window(sig, cfg_eta).periodic
    assert estimate_window(noise, cfg_eta).periodicity_stat < 3 * eta


def test_windows_and_csv_round_trip(tmp_path):
    x = MotionMatrix(tone(0.4, 30, 1800) + 0.01 * np.random.default_rng(0).normal(size=1800), 30)
    est = estimate_windows(x, WindowingConfig(20, 0.5), EstimatorConfig())
    assert len(est) == 5 and [e.warmup for e in est] == [True] + [False] * 4
    assert all(abs(e.f0_hat_hz - 0.4) < 0.005 for e in est)
    est.append(RREstimate(float("nan"), np.zeros((0, 0)), 0.0, False, 5, 50, 70, valid=False))
    write_results_csv(est, tmp_path / "r.csv")
    rows = read_results_csv(tmp_path / "r.csv")
    assert rows[1]["rr_bpm"] == pytest.approx(60 * est[1].f0_hat_hz, abs=1e-3)
    assert rows[0]["warmup"] and not rows[1]["warmup"] and np.isnan(rows[-1]["f0_hz"])

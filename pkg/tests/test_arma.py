import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qnoise.engine.arma import (
    ArmaModel, AutocovarianceSequence, autocovariance, convert_timescale, default_grid,
    design_bandlimited_ma, design_multiband_ma, design_multipole_ar, design_one_over_f,
    estimate_spectrum, fit_ma_to_autocovariance, integrated_variance, periodogram_relative_error,
    power_spectrum, read_spectrum_csv, white_noise, write_spectrum_csv,
)
from qnoise.exceptions import InvalidArgumentError


def test_white_noise_spectrum_is_flat():
    spectrum = power_spectrum(white_noise(), default_grid(64))
    np.testing.assert_allclose(spectrum.values, 1.0)


def test_ar1_spectrum_uses_recursion_sign():
    model = ArmaModel([0.5], [1.0])
    spectrum = power_spectrum(model, np.array([0.0, np.pi]))
    np.testing.assert_allclose(spectrum.values, [4.0, 1.0 / 2.25])


def test_ar1_autocovariance():
    r = autocovariance(ArmaModel([0.5], [1.0]), 6).values
    np.testing.assert_allclose(r, 0.5 ** np.arange(6) / 0.75, atol=1e-10)


@pytest.mark.parametrize('ar', [[1.0], [0.5, 0.6], [2.0]])
def test_unstable_ar_polynomial_rejected(ar):
    with pytest.raises(InvalidArgumentError):
        ArmaModel(ar, [1.0])


def test_empty_ma_rejected():
    with pytest.raises(InvalidArgumentError):
        ArmaModel([], [])


def test_generate_continues_one_realization():
    model = ArmaModel([0.7], [1.0, 0.3])
    rng = np.random.default_rng(3)
    chunked = ArmaModel([0.7], [1.0, 0.3])
    first = chunked.generate(10, rng)
    second = chunked.generate(5, rng)

    whole = ArmaModel([0.7], [1.0, 0.3]).generate(15, np.random.default_rng(3))
    np.testing.assert_allclose(np.concatenate([first, second]), whole)
    np.testing.assert_allclose(model.generate(10, np.random.default_rng(3)), whole[:10])


def test_clone_has_fresh_history(rng):
    model = ArmaModel([0.7], [1.0])
    model.generate(20, rng)
    assert model.history is not None
    assert model.clone().history is None


def test_generate_batch_shape_and_burn_in(rng):
    model = ArmaModel([0.5], [1.0], burn_in=7)
    batch = model.generate_batch(4, 11, rng)
    assert batch.shape == (4, 11)
    assert model.history is None


def test_complex_driving_has_unit_variance(rng):
    model = ArmaModel((), (1.0,), complex_driving=True)
    samples = model.generate(20000, rng)
    assert np.iscomplexobj(samples)
    assert np.mean(np.abs(samples) ** 2) == pytest.approx(1.0, abs=0.05)


def test_bandlimited_passband_and_stopband():
    model = design_bandlimited_ma(128, 0.0, 0.25 * np.pi)
    values = power_spectrum(model, np.array([0.1 * np.pi, 0.5 * np.pi])).values
    assert values[0] == pytest.approx(1.0, abs=0.01)
    assert values[1] < 1e-4


def test_bandpass_design_centers_on_band():
    model = design_bandlimited_ma(128, 0.4 * np.pi, 0.6 * np.pi)
    values = power_spectrum(model, np.array([0.1 * np.pi, 0.5 * np.pi, 0.9 * np.pi])).values
    assert values[1] == pytest.approx(1.0, abs=0.02)
    assert values[0] < 1e-4 and values[2] < 1e-4


def test_multiband_covers_each_band():
    model = design_multiband_ma(128, [(0.0, 0.2 * np.pi), (0.6 * np.pi, 0.8 * np.pi)])
    values = power_spectrum(model, np.array([0.05 * np.pi, 0.4 * np.pi, 0.7 * np.pi])).values
    assert values[0] == pytest.approx(1.0, abs=0.02)
    assert values[2] == pytest.approx(1.0, abs=0.02)
    assert values[1] < 1e-4


@pytest.mark.parametrize('low, high', [(0.5, 0.2), (-0.1, 1.0), (0.0, 4.0)])
def test_bad_band_edges_rejected(low, high):
    with pytest.raises(InvalidArgumentError):
        design_bandlimited_ma(64, low, high)


def test_multipole_peaks_at_pole_frequencies():
    model = design_multipole_ar([0.2 * np.pi, 0.6 * np.pi], 0.95)
    values = power_spectrum(model, np.array([0.2 * np.pi, 0.4 * np.pi, 0.6 * np.pi])).values
    assert values[0] > 20 * values[1]
    assert values[2] > 20 * values[1]
    assert model.p == 4


def test_multipole_radius_must_be_inside_unit_circle():
    with pytest.raises(InvalidArgumentError):
        design_multipole_ar([0.3], 1.0)


@pytest.mark.parametrize('alpha', [1.0, 2.0])
def test_one_over_f_slope_and_normalization(alpha):
    band = (0.001 * np.pi, 0.5 * np.pi)
    model = design_one_over_f(alpha, 12, band)
    assert power_spectrum(model, np.array([band[1]])).values[0] == pytest.approx(1.0)
    grid = np.geomspace(2.0 * band[0], 0.5 * band[1], 200)
    slope = np.polyfit(np.log(grid), np.log(power_spectrum(model, grid).values), 1)[0]
    assert abs(slope + alpha) <= 0.15


def test_one_over_f_needs_positive_low_edge():
    with pytest.raises(InvalidArgumentError):
        design_one_over_f(1.0, 12, (0.0, 1.0))


def test_integrated_variance_closed_forms():
    assert integrated_variance([1.0], 5) == 5.0
    assert integrated_variance(np.ones(5), 5) == 25.0
    assert integrated_variance([2.0, 1.0], 0) == 0.0


def test_convert_timescale_white_and_correlated():
    T, n_slow = 10, 6
    white = convert_timescale(np.eye(1, T * n_slow).ravel(), T, n_slow)
    expected = np.zeros(n_slow)
    expected[0] = T
    np.testing.assert_allclose(white.values, expected, atol=1e-10)
    correlated = convert_timescale(np.ones(T * n_slow), T, n_slow)
    np.testing.assert_allclose(correlated.values, T * T, atol=1e-8)


def test_convert_timescale_scales_lag_unit():
    fast = AutocovarianceSequence(np.ones(20), lag_unit=0.1)
    assert convert_timescale(fast, 4, 5).lag_unit == pytest.approx(0.4)


def test_convert_timescale_needs_enough_lags():
    with pytest.raises(InvalidArgumentError):
        convert_timescale(np.ones(5), 3, 4)


def test_fit_ma_recovers_minimum_phase_taps():
    taps = np.array([1.0, 0.5, 0.25])
    r = [np.dot(taps[:3 - k], taps[k:]) for k in range(3)]
    np.testing.assert_allclose(fit_ma_to_autocovariance(r).ma_coeffs, taps, atol=1e-8)


def test_fit_ma_rejects_non_psd_target():
    with pytest.raises(InvalidArgumentError):
        fit_ma_to_autocovariance([1.0, 0.9, 0.0])


def test_autocovariance_sequence_bounds():
    with pytest.raises(InvalidArgumentError):
        AutocovarianceSequence([1.0, 1.5])
    with pytest.raises(InvalidArgumentError):
        AutocovarianceSequence([-1.0])


@settings(max_examples=25, deadline=None)
@given(st.lists(st.floats(-0.15, 0.15), min_size=1, max_size=6))
def test_fit_ma_reproduces_any_realizable_autocovariance(tail):
    taps = np.array([1.0] + tail)
    order = len(taps) - 1
    r = np.array([np.dot(taps[:order + 1 - k], taps[k:]) for k in range(order + 1)])
    fitted = fit_ma_to_autocovariance(r).ma_coeffs
    products = np.array([np.dot(fitted[:order + 1 - k], fitted[k:]) for k in range(order + 1)])
    np.testing.assert_allclose(products, r, atol=1e-6 * r[0])


def test_welch_estimate_of_white_noise(rng):
    spectrum = estimate_spectrum(rng.standard_normal(2 ** 16), nperseg=256)
    assert np.mean(spectrum.values) == pytest.approx(1.0, abs=0.03)


def test_periodogram_matches_model(rng):
    model = design_multipole_ar([0.3 * np.pi], 0.9)
    assert periodogram_relative_error(model, 2 ** 18, rng, nperseg=256) < 0.1


def test_spectrum_csv_keeps_full_precision(tmp_path):
    spectrum = power_spectrum(ArmaModel([0.3], [1.0, 0.1]), default_grid(9))
    path = tmp_path / 'spectrum.csv'
    write_spectrum_csv(str(path), spectrum)
    assert path.read_text().splitlines()[0] == 'omega,value'
    np.testing.assert_array_equal(read_spectrum_csv(str(path)).values, spectrum.values)


def test_filter_examples():
    np.testing.assert_allclose(ArmaModel((), [1.0]).filter([0.3, -1.1]), [0.3, -1.1])
    assert not ArmaModel((), [0.0]).filter([0.3, -1.1]).any()
    np.testing.assert_allclose(ArmaModel([0.5], [1.0]).filter([1.0, 0.0, 0.0]), [1.0, 0.5, 0.25])


def test_two_tap_moving_average_spectrum():
    values = power_spectrum(ArmaModel((), [1.0, 1.0]), np.array([0.0, np.pi])).values
    np.testing.assert_allclose(values, [4.0, 0.0], atol=1e-12)


def test_multipole_without_poles_is_white():
    model = design_multipole_ar([], 0.99)
    assert model.p == 0 and model.q == 0


def test_one_over_f_small_alpha_is_nearly_flat():
    band = (0.001 * np.pi, 0.5 * np.pi)
    grid = np.geomspace(2.0 * band[0], 0.5 * band[1], 200)
    values = power_spectrum(design_one_over_f(0.01, 12, band), grid).values
    assert abs(np.polyfit(np.log(grid), np.log(values), 1)[0]) < 0.05


ONE_OVER_F_BAND = (0.001 * np.pi, 0.5 * np.pi)


@pytest.mark.parametrize('alpha', [0.01, 1.0, 2.0])
def test_one_over_f_builds_as_stable_sections(alpha):
    model = design_one_over_f(alpha, 12, ONE_OVER_F_BAND)
    assert model.sections is not None
    assert model.sections.shape == (6, 6)
    assert 0.99 < model.spectral_radius() < 1.0
    assert model.burn_in >= model.settling_steps()


def test_one_over_f_filter_continues_across_calls(rng):
    x = rng.standard_normal(500)
    whole = design_one_over_f(1.0, 12, ONE_OVER_F_BAND).filter(x)
    model = design_one_over_f(1.0, 12, ONE_OVER_F_BAND)
    chunked = np.concatenate([model.filter(x[:200]), model.filter(x[200:])])
    np.testing.assert_allclose(chunked, whole, rtol=1e-12, atol=1e-12)
    assert model.history.shape == (6, 2)


def test_one_over_f_impulse_energy_matches_spectrum():
    model = design_one_over_f(1.0, 12, ONE_OVER_F_BAND)
    impulse = np.zeros(40000)
    impulse[0] = 1.0
    energy = np.sum(model.filter(impulse) ** 2)
    assert energy == pytest.approx(autocovariance(model, 1).values[0], rel=1e-6)


def test_one_over_f_generation_is_finite(rng):
    model = design_one_over_f(2.0, 12, ONE_OVER_F_BAND)
    assert np.all(np.isfinite(model.generate(2000, rng)))
    batch = model.clone(complex_driving=True).generate_batch(3, 100, rng)
    assert batch.shape == (3, 100) and np.iscomplexobj(batch)
    assert np.all(np.isfinite(batch))


def test_sections_need_unit_leading_denominator():
    with pytest.raises(InvalidArgumentError):
        ArmaModel(sections=[[1.0, 0.0, 0.0, 2.0, 0.0, 0.0]])


def test_reset_restarts_realization():
    model = ArmaModel([0.7], [1.0], burn_in=0)
    first = model.generate(5, np.random.default_rng(1))
    model.reset()
    np.testing.assert_array_equal(model.generate(5, np.random.default_rng(1)), first)


def test_toeplitz_psd_check():
    assert AutocovarianceSequence([1.0, 0.5, 0.25]).is_toeplitz_psd()
    assert not AutocovarianceSequence([1.0, 0.9, 0.0]).is_toeplitz_psd()

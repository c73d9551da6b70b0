import logging

import numpy as np
import pytest

from qnoise.engine.arma import ArmaModel, PowerSpectrum, white_noise
from qnoise.engine.schwarma import SchwarmaModel
from qnoise.experiments.qns import (
    design_spectrum, passband_relative_error, qns_build_design, qns_forward, qns_reconstruct,
    qns_reconstruct_chi, qns_simulate_survivals, row_space_projector,
    survival_probability_analytic,
)
from qnoise.exceptions import InvalidArgumentError


def test_design_shapes_and_dc_row():
    design = qns_build_design(16)
    assert design.modulation_table.shape == (8, 16)
    assert design.filter_matrix.shape == (8, 9)
    assert np.all(design.modulation_table[0] == 1)
    assert design.filter_matrix[0, 0] == pytest.approx(256.0)
    np.testing.assert_allclose(design.filter_matrix[0, 1:], 0.0, atol=1e-9)
    np.testing.assert_allclose(design.frequencies, 2 * np.pi * np.arange(9) / 16)


def test_pulse_table_marks_sign_flips():
    design = qns_build_design(16)
    assert not design.pulse_table[0].any()
    assert np.flatnonzero(design.pulse_table[1]).tolist() == [9]
    assert not design.pulse_table[:, 0].any()


@pytest.mark.parametrize('W', [2, 7, 0])
def test_design_needs_even_length(W):
    with pytest.raises(InvalidArgumentError):
        qns_build_design(W)


def test_white_noise_overlap_is_total_variance():
    W, variance = 16, 0.003
    design = qns_build_design(W)
    chi = qns_forward(design, np.full(W // 2 + 1, variance))
    np.testing.assert_allclose(chi, 2 * W * variance, rtol=1e-12)


def test_analytic_survival_matches_forward_model():
    design = qns_build_design(8)
    spectrum = design_spectrum(design, ArmaModel([0.6], [1.0]), noise_scale=0.05)
    chi = qns_forward(design, spectrum.values)
    for k in range(design.n_sequences):
        p = survival_probability_analytic(design.filter_matrix[k], spectrum)
        assert p == pytest.approx(0.5 * (1.0 + np.exp(-chi[k])))


def test_analytic_survival_needs_design_grid():
    design = qns_build_design(8)
    off_grid = PowerSpectrum(np.linspace(0.1, 3.0, 5), np.ones(5))
    with pytest.raises(InvalidArgumentError):
        survival_probability_analytic(design.filter_matrix[0], off_grid)


def test_noiseless_reconstruction_recovers_identifiable_part():
    design = qns_build_design(32)
    truth = design_spectrum(design, ArmaModel([0.5], [1.0, 0.4]), noise_scale=0.01)
    p = 0.5 * (1.0 + np.exp(-qns_forward(design, truth.values)))
    estimate = qns_reconstruct(p, design)
    full = np.concatenate([[estimate.dc], estimate.spectrum.values])
    projector = row_space_projector(design)
    error = np.linalg.norm(projector @ (full - truth.values)) / np.linalg.norm(projector @ truth.values)
    assert error < 1e-6
    assert len(estimate.kept_rows) == design.n_sequences
    assert estimate.spectrum.frequencies[0] == pytest.approx(2 * np.pi / 32)


def test_simulated_white_noise_survival():
    W, sigma = 8, 0.05
    design = qns_build_design(W)
    survivals = qns_simulate_survivals(design, SchwarmaModel.z_dephasing(white_noise()), 400,
                                       seed=11, noise_scale=sigma)
    expected = 0.5 * (1.0 + np.exp(-2 * W * sigma ** 2))
    assert survivals.n_traj == 400
    assert np.all(np.abs(survivals.p_hat - expected) <= 5 * survivals.stderr + 1e-12)


def test_simulated_survivals_are_reproducible():
    design = qns_build_design(8)
    model = SchwarmaModel.z_dephasing(ArmaModel([0.5], [1.0]))
    first = qns_simulate_survivals(design, model, 20, seed=5, noise_scale=0.1)
    second = qns_simulate_survivals(design, model, 20, seed=5, noise_scale=0.1)
    np.testing.assert_array_equal(first.p_hat, second.p_hat)


def test_saturated_rows_are_dropped(caplog):
    design = qns_build_design(8)
    p = np.array([0.4, 0.9, 0.95, 0.97])
    with caplog.at_level(logging.WARNING, logger='qnoise.experiments.qns'):
        estimate = qns_reconstruct(p, design)
    assert estimate.kept_rows.tolist() == [1, 2, 3]
    assert 'saturated' in caplog.text


def test_fully_saturated_design_raises():
    design = qns_build_design(8)
    with pytest.raises(InvalidArgumentError):
        qns_reconstruct(np.full(4, 0.5), design)
    with pytest.raises(InvalidArgumentError):
        qns_reconstruct(np.full(3, 0.9), design)


def test_reconstruct_chi_needs_matching_rows():
    design = qns_build_design(8)
    with pytest.raises(InvalidArgumentError):
        qns_reconstruct_chi(np.ones(3), design)


def test_qns_needs_z_dephasing_model():
    design = qns_build_design(8)
    multiaxis = SchwarmaModel.multiaxis(white_noise(), white_noise(), white_noise())
    with pytest.raises(InvalidArgumentError):
        qns_simulate_survivals(design, multiaxis, 10)
    with pytest.raises(InvalidArgumentError):
        qns_simulate_survivals(design, SchwarmaModel.z_dephasing(white_noise()), 0)


def test_passband_relative_error():
    grid = np.linspace(0.1, 3.0, 10)
    truth = PowerSpectrum(grid, np.ones(10))
    estimate = PowerSpectrum(grid, np.full(10, 1.1))
    assert passband_relative_error(estimate, truth, (0.0, np.pi)) == pytest.approx(0.1)

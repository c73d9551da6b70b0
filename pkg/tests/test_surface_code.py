import numpy as np
import pytest

from qnoise.engine.arma import autocovariance
from qnoise.engine.circuit import parse_circuit
from qnoise.engine.reference_trotter import GaussianProcessSpec
from qnoise.experiments.surface_code import (
    PointComparison, build_check, compare_point, error_fit_coefficient, gate_level_ma,
    schwarma_circuit_noise, surface_code_sweep,
)
from qnoise.exceptions import InvalidArgumentError
from qnoise.services.monte_carlo_service import MonteCarloService


@pytest.fixture
def service():
    service = MonteCarloService()
    service.configure(1)
    yield service
    service.shutdown()


def test_build_check():
    assert build_check('X').n_timed_moments == 24
    assert build_check('Z').n_timed_moments == 8
    with pytest.raises(InvalidArgumentError):
        build_check('Y')


def test_gate_level_ma_matches_summed_increments():
    spec = GaussianProcessSpec.from_peak(1e-3, 0.5, 0.25)
    model = gate_level_ma(spec, 4, 8)
    fast = spec.kernel(np.arange(4)) * spec.dt ** 2
    # variance of a sum of four correlated increments
    expected = 4 * fast[0] + 2 * sum((4 - k) * fast[k] for k in range(1, 4))
    assert autocovariance(model, 1).values[0] == pytest.approx(expected, rel=1e-4)


def test_schwarma_noise_is_three_axis_per_qubit():
    spec = GaussianProcessSpec(1e-4, 1.0, 0.25)
    noise = schwarma_circuit_noise(gate_level_ma(spec, 4, 8), 5)
    assert len(noise) == 5
    assert all(m.n_axes == 3 and m.is_unitary for m in noise)
    assert noise[0].arma_models[0] is not noise[1].arma_models[0]


def test_noiseless_sweep_has_zero_infidelity(service):
    sweep = surface_code_sweep([0.0], [1.0, 8.0], n_samples=4, seed=2, check='Z',
                               steps_per_gate=4, service=service)
    assert len(sweep.rows) == 2 * 3
    np.testing.assert_allclose(sweep.values('infidelity'), 0.0, atol=1e-10)


def test_compare_point_reports_bounded_infidelities(service):
    point = compare_point(build_check('Z'), 1e-3, 4.0, 6, 5, steps_per_gate=4, service=service)
    assert 0.0 <= point.schwarma_infidelity <= 1.0
    assert 0.0 <= point.trotter_infidelity <= 1.0
    assert point.schwarma_infidelity > 0.0 and point.trotter_infidelity > 0.0
    assert point.pooled_stderr >= 0.0


def test_compare_point_is_reproducible(service):
    first = compare_point(build_check('Z'), 1e-3, 4.0, 3, 5, steps_per_gate=2, service=service)
    second = compare_point(build_check('Z'), 1e-3, 4.0, 3, 5, steps_per_gate=2, service=service)
    assert first == second


def test_error_fit_coefficient():
    points = [
        PointComparison(1e-6, 1.0, 0.0101, 0.0, 0.01, 0.0),
        PointComparison(1e-4, 1.0, 0.101, 0.0, 0.1, 0.0),
    ]
    assert error_fit_coefficient(points) == pytest.approx(0.01, rel=1e-6)
    assert error_fit_coefficient([PointComparison(0.0, 1.0, 0.0, 0.0, 0.0, 0.0)]) is None


def test_sweep_needs_samples():
    with pytest.raises(InvalidArgumentError):
        surface_code_sweep([1e-4], [1.0], n_samples=0)


def test_compare_point_keeps_schwarma_samples(service):
    point = compare_point(build_check('Z'), 1e-3, 4.0, 3, 5, steps_per_gate=2, service=service)
    assert point.schwarma_fidelities.shape == (3,)
    assert 1.0 - point.schwarma_fidelities.mean() == pytest.approx(point.schwarma_infidelity)
    assert point.schwarma_mean.dimension == 32


def test_sweep_runs_a_given_circuit(service):
    circuit = parse_circuit("qubits 1\nX(0)\nY_half(0)\n")
    sweep = surface_code_sweep([0.0], [1.0], n_samples=2, seed=1, steps_per_gate=2,
                               service=service, circuit=circuit)
    assert {row['check'] for row in sweep.rows} == {'custom'}
    [point] = sweep.summary['points']
    np.testing.assert_allclose(point.schwarma_fidelities, 1.0, atol=1e-10)

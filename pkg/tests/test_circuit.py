import numpy as np
import pytest

from qnoise.engine.arma import ArmaModel
from qnoise.engine.circuit import (
    Gate, QuantumCircuit, ancilla_one_probability, basis_state, build_x_check, build_z_check,
    cnot_matrix, compile_cnot, format_circuit, ideal_unitary, monte_carlo_average,
    load_circuit, native_hadamard, parse_circuit, product_state, simulate_noisy,
)
from qnoise.engine.quantum_core import IDENTITY, process_fidelity
from qnoise.engine.schwarma import SchwarmaModel
from qnoise.exceptions import InvalidArgumentError
from qnoise.services.monte_carlo_service import MonteCarloService

PLUS = np.array([1, 1]) / np.sqrt(2)
MINUS = np.array([1, -1]) / np.sqrt(2)


def _phase_free_overlap(a, b):
    return abs(np.vdot(a, b)) / a.shape[0]


def test_compiled_cnot_is_cnot_up_to_phase():
    u = ideal_unitary(QuantumCircuit(2, tuple(compile_cnot(0, 1))))
    assert _phase_free_overlap(cnot_matrix(), u) == pytest.approx(1.0, abs=1e-12)


def test_compiled_cnot_reversed_roles():
    u = ideal_unitary(QuantumCircuit(2, tuple(compile_cnot(1, 0))))
    swap = np.eye(4)[[0, 2, 1, 3]]
    assert _phase_free_overlap(swap @ cnot_matrix() @ swap, u) == pytest.approx(1.0, abs=1e-12)


def test_native_hadamard():
    u = ideal_unitary(QuantumCircuit(1, tuple(native_hadamard(0))))
    hadamard = np.array([[1, 1], [1, -1]]) / np.sqrt(2)
    assert _phase_free_overlap(hadamard, u) == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize('code', range(16))
def test_z_check_measures_parity(code):
    bits = [(code >> (3 - i)) & 1 for i in range(4)]
    p = ancilla_one_probability(build_z_check(), basis_state([0] + bits))
    assert p == pytest.approx(sum(bits) % 2, abs=1e-12)


@pytest.mark.parametrize('code', range(16))
def test_x_check_measures_parity(code):
    bits = [(code >> (3 - i)) & 1 for i in range(4)]
    state = product_state([np.array([1, 0])] + [MINUS if b else PLUS for b in bits])
    p = ancilla_one_probability(build_x_check(), state)
    assert p == pytest.approx(sum(bits) % 2, abs=1e-12)


def test_check_circuits_timed_moments():
    assert build_z_check().n_timed_moments == 8
    assert build_x_check().n_timed_moments == 24
    assert QuantumCircuit.moment_is_timed(())


def test_gate_validation():
    with pytest.raises(InvalidArgumentError):
        Gate('T', (0,))
    with pytest.raises(InvalidArgumentError):
        Gate('ZZ90', (1, 1))
    with pytest.raises(InvalidArgumentError):
        Gate('X', (0, 1))
    with pytest.raises(InvalidArgumentError):
        Gate('custom', (0,), np.ones((2, 2)))
    assert Gate('custom', (0,), IDENTITY).matrix.shape == (2, 2)


def test_circuit_validation():
    with pytest.raises(InvalidArgumentError):
        QuantumCircuit(2, ((Gate('X', (0,)), Gate('Y_half', (0,))),))
    with pytest.raises(InvalidArgumentError):
        QuantumCircuit(2, ((Gate('X', (2,)),),))
    with pytest.raises(InvalidArgumentError):
        compile_cnot(1, 1)


def test_parse_circuit_text():
    text = """
    # Bell-ish preparation
    qubits 3
    Y_half(0) X(2)
    ZZ90(0,1)   # entangle
    Z_half(0) Z_neg_half(1)
    """
    circuit = parse_circuit(text)
    assert circuit.n_qubits == 3
    assert len(circuit) == 3
    assert [g.kind for g in circuit.moments[0]] == ['Y_half', 'X']
    assert circuit.moments[1][0].qubits == (0, 1)
    assert circuit.n_timed_moments == 2


def test_parse_circuit_infers_register_and_formats_back():
    circuit = parse_circuit("X(0)\nZZ90(0,3)\n")
    assert circuit.n_qubits == 4
    again = parse_circuit(format_circuit(circuit))
    assert again == circuit


@pytest.mark.parametrize('text, line', [
    ("X(0)\nX(0) junk\n", 2),
    ("qubits two\n", 1),
    ("X(0)\n\nFOO(0)\n", 3),
])
def test_parse_circuit_errors_name_line(text, line):
    with pytest.raises(InvalidArgumentError) as excinfo:
        parse_circuit(text)
    assert excinfo.value.details.get('line', line) == line


def test_zero_noise_leaves_circuit_ideal(rng):
    circuit = QuantumCircuit(2, tuple(compile_cnot(0, 1)))
    silent = [SchwarmaModel.z_dephasing(ArmaModel((), [0.0])) for _ in range(2)]
    s = simulate_noisy(circuit, silent, rng)
    assert process_fidelity(ideal_unitary(circuit), s) == pytest.approx(1.0, abs=1e-12)


def test_dissipative_noise_takes_superoperator_path(rng):
    circuit = QuantumCircuit(1, ((Gate('X', (0,)),),))
    damping = [SchwarmaModel.amplitude_damping(ArmaModel((), [0.0], complex_driving=True))]
    s = simulate_noisy(circuit, damping, rng)
    assert process_fidelity(ideal_unitary(circuit), s) == pytest.approx(1.0, abs=1e-12)


def test_simulate_noisy_needs_model_per_qubit(rng):
    circuit = QuantumCircuit(2, ((Gate('X', (0,)),),))
    with pytest.raises(InvalidArgumentError):
        simulate_noisy(circuit, [SchwarmaModel.z_dephasing(ArmaModel())], rng)


def test_white_dephasing_matches_closed_form():
    depth, per_step = 8, 0.01
    idle = QuantumCircuit(1, tuple((Gate('I', (0,)),) for _ in range(depth)))
    noise = [SchwarmaModel.z_dephasing(ArmaModel((), [np.sqrt(per_step)]))]
    service = MonteCarloService()
    service.configure(1)
    result = monte_carlo_average(idle, noise, 2000, 99, service)
    expected = 0.5 * (1.0 + np.exp(-2.0 * per_step * depth))
    assert abs(result.mean_fidelity - expected) <= 4.5 * result.fidelity_stderr
    assert result.n_samples == 2000


def test_monte_carlo_average_independent_of_threads():
    circuit = QuantumCircuit(2, tuple(compile_cnot(0, 1)))
    noise = [SchwarmaModel.multiaxis(*(ArmaModel([0.5], [0.05]) for _ in range(3)))
             for _ in range(2)]
    runs = []
    for threads in (1, 3):
        service = MonteCarloService()
        service.configure(threads)
        runs.append(monte_carlo_average(circuit, noise, 12, 7, service))
        service.shutdown()
    np.testing.assert_array_equal(runs[0].fidelities, runs[1].fidelities)
    np.testing.assert_allclose(runs[0].mean.data, runs[1].mean.data, atol=1e-15)


def test_monte_carlo_needs_samples():
    circuit = QuantumCircuit(1, ((Gate('I', (0,)),),))
    with pytest.raises(InvalidArgumentError):
        monte_carlo_average(circuit, [SchwarmaModel.z_dephasing(ArmaModel())], 0, 1)


def test_load_circuit_from_file(tmp_path):
    path = tmp_path / 'bell.circ'
    path.write_text("qubits 2\nY_half(0)\nZZ90(0,1)\n")
    circuit = load_circuit(str(path))
    assert circuit.n_qubits == 2
    assert circuit.n_timed_moments == 2

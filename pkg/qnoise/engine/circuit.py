"""Gate-level circuits with one SchWARMA noise step per qubit after every timed moment."""
import logging
import re
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from qnoise.config import ExperimentConfig
from qnoise.engine.quantum_core import (
    SIGMA_X, SIGMA_Y, SIGMA_Z, SuperOperator, apply_local, process_fidelity,
    unitary_to_superoperator,
)
from qnoise.engine.schwarma import SchwarmaModel
from qnoise.exceptions import InvalidArgumentError
from qnoise.services.monte_carlo_service import monte_carlo_service

logger = logging.getLogger(__name__)


def _rotation(pauli: np.ndarray, angle: float) -> np.ndarray:
    # exp(-i angle pauli)
    return np.cos(angle) * np.eye(2) - 1j * np.sin(angle) * pauli


_ZZ = np.kron(SIGMA_Z, SIGMA_Z)

GATE_MATRICES: Dict[str, np.ndarray] = {
    'I': np.eye(2, dtype=complex),
    'X': _rotation(SIGMA_X, np.pi / 2),
    'Y_half': _rotation(SIGMA_Y, np.pi / 4),
    'Y_neg_half': _rotation(SIGMA_Y, -np.pi / 4),
    'Z_half': _rotation(SIGMA_Z, np.pi / 4),
    'Z_neg_half': _rotation(SIGMA_Z, -np.pi / 4),
    'H': (SIGMA_X + SIGMA_Z) / np.sqrt(2.0),
    'ZZ90': np.diag(np.exp(-1j * np.pi / 4 * np.diag(_ZZ))).astype(complex),
}

VIRTUAL_KINDS = frozenset({'Z_half', 'Z_neg_half'})


@dataclass(frozen=True)
class Gate:
    kind: str
    qubits: Tuple[int, ...]
    matrix: Optional[np.ndarray] = field(default=None, compare=False)

    def __post_init__(self):
        qubits = tuple(int(q) for q in self.qubits)
        if self.kind == 'custom':
            if self.matrix is None:
                raise InvalidArgumentError("Custom gates need a matrix")
            matrix = np.asarray(self.matrix, dtype=complex)
        elif self.kind in GATE_MATRICES:
            matrix = GATE_MATRICES[self.kind]
        else:
            raise InvalidArgumentError(f"Unknown gate kind '{self.kind}'",
                                       {'known': sorted(GATE_MATRICES) + ['custom']})
        expected = 2 ** len(qubits)
        if len(qubits) not in (1, 2) or matrix.shape != (expected, expected):
            raise InvalidArgumentError(f"Gate {self.kind} does not fit qubits {qubits}",
                                       {'matrix_shape': matrix.shape})
        if len(set(qubits)) != len(qubits):
            raise InvalidArgumentError(f"Gate {self.kind} repeats a qubit", {'qubits': qubits})
        if np.max(np.abs(matrix.conj().T @ matrix - np.eye(expected))) > ExperimentConfig.HERMITIAN_TOL:
            raise InvalidArgumentError(f"Gate {self.kind} matrix is not unitary")
        object.__setattr__(self, 'qubits', qubits)
        object.__setattr__(self, 'matrix', matrix)

    @property
    def is_virtual(self) -> bool:
        return self.kind in VIRTUAL_KINDS

    def __str__(self):
        return f"{self.kind}({','.join(str(q) for q in self.qubits)})"


Moment = Tuple[Gate, ...]


@dataclass(frozen=True)
class QuantumCircuit:
    n_qubits: int
    moments: Tuple[Moment, ...]

    def __post_init__(self):
        if self.n_qubits < 1:
            raise InvalidArgumentError("A circuit needs at least one qubit")
        moments = tuple(tuple(m) for m in self.moments)
        for index, moment in enumerate(moments):
            seen = set()
            for gate in moment:
                for q in gate.qubits:
                    if q < 0 or q >= self.n_qubits:
                        raise InvalidArgumentError(f"Qubit {q} out of range in moment {index}",
                                                   {'n_qubits': self.n_qubits})
                    if q in seen:
                        raise InvalidArgumentError(f"Qubit {q} appears twice in moment {index}")
                    seen.add(q)
        object.__setattr__(self, 'moments', moments)

    @staticmethod
    def moment_is_timed(moment: Moment) -> bool:
        """Virtual-only moments take no time and get no noise step."""
        return len(moment) == 0 or any(not g.is_virtual for g in moment)

    @property
    def n_timed_moments(self) -> int:
        return sum(1 for m in self.moments if self.moment_is_timed(m))

    def __len__(self):
        return len(self.moments)


def compile_cnot(control: int, target: int) -> List[Moment]:
    """CNOT as native moments; the Z rotations are virtual."""
    if control == target:
        raise InvalidArgumentError("CNOT control and target must differ", {'qubit': control})
    return [
        (Gate('Y_neg_half', (target,)),),
        (Gate('X', (target,)),),
        (Gate('ZZ90', (control, target)),),
        (Gate('Z_half', (control,)), Gate('Z_neg_half', (target,))),
        (Gate('X', (target,)),),
        (Gate('Y_half', (target,)),),
    ]


def native_hadamard(qubit: int) -> List[Moment]:
    # X . Y^(1/2) = -i H
    return [(Gate('Y_half', (qubit,)),), (Gate('X', (qubit,)),)]


CHECK_DATA_ORDER = (2, 1, 4, 3)
ANCILLA = 0


def build_x_check() -> QuantumCircuit:
    """Ancilla 0 measures X on data qubits 1..4."""
    moments: List[Moment] = native_hadamard(ANCILLA)
    for data in CHECK_DATA_ORDER:
        moments += compile_cnot(ANCILLA, data)
    moments += native_hadamard(ANCILLA)
    return QuantumCircuit(5, tuple(moments))


def build_z_check() -> QuantumCircuit:
    """Ancilla 0 measures Z on data qubits 1..4.

    Four data->ancilla CNOTs with the single-qubit rotations between them cancelled
    (the X.X pairs leave only a global phase).
    """
    moments: List[Moment] = [
        (Gate('Y_neg_half', (ANCILLA,)),),
        (Gate('X', (ANCILLA,)),),
    ]
    for data in CHECK_DATA_ORDER:
        moments.append((Gate('ZZ90', (data, ANCILLA)),))
        moments.append((Gate('Z_half', (data,)), Gate('Z_neg_half', (ANCILLA,))))
    moments += [
        (Gate('X', (ANCILLA,)),),
        (Gate('Y_half', (ANCILLA,)),),
    ]
    return QuantumCircuit(5, tuple(moments))


def ideal_unitary(circuit: QuantumCircuit) -> np.ndarray:
    dim = 2 ** circuit.n_qubits
    state = np.eye(dim, dtype=complex).reshape([2] * circuit.n_qubits + [dim])
    for moment in circuit.moments:
        for gate in moment:
            state = apply_local(state, gate.matrix, gate.qubits, circuit.n_qubits)
    return state.reshape(dim, dim)


def ancilla_one_probability(circuit: QuantumCircuit, state: np.ndarray, ancilla: int = ANCILLA,
                            channel: Optional[SuperOperator] = None) -> float:
    """Probability of reading 1 on ``ancilla`` after the circuit (ideal or given channel)."""
    psi = np.asarray(state, dtype=complex)
    n = circuit.n_qubits
    if channel is None:
        out = ideal_unitary(circuit) @ psi
        probs = np.abs(out.reshape([2] * n)) ** 2
    else:
        rho = np.outer(psi, psi.conj())
        rho_out = (channel.data @ rho.T.reshape(-1)).reshape(2 ** n, 2 ** n).T
        probs = np.real(np.diag(rho_out)).reshape([2] * n)
    return float(np.take(probs, 1, axis=ancilla).sum())


def basis_state(bits: Sequence[int]) -> np.ndarray:
    index = int(''.join(str(b) for b in bits), 2)
    psi = np.zeros(2 ** len(bits), dtype=complex)
    psi[index] = 1.0
    return psi


def product_state(vectors: Sequence[np.ndarray]) -> np.ndarray:
    psi = np.array([1.0], dtype=complex)
    for v in vectors:
        psi = np.kron(psi, np.asarray(v, dtype=complex))
    return psi


def simulate_noisy(circuit: QuantumCircuit, noise: Sequence[SchwarmaModel],
                   rng: np.random.Generator) -> SuperOperator:
    """One realization: perfect gates, then one noise step on every qubit per timed moment."""
    n = circuit.n_qubits
    if len(noise) != n:
        raise InvalidArgumentError("Need one noise model per qubit",
                                   {'qubits': n, 'models': len(noise)})
    n_steps = circuit.n_timed_moments
    outputs = [model.sample(n_steps, rng) for model in noise]
    steps = [[noise[q].kraus_from_outputs(outputs[q][k], k) for q in range(n)]
             for k in range(n_steps)]

    if all(len(kraus) == 1 for layer in steps for kraus in layer):
        return unitary_to_superoperator(_propagate_unitary(circuit, steps))
    return SuperOperator(_propagate_superoperator(circuit, steps))


def _propagate_unitary(circuit: QuantumCircuit, steps) -> np.ndarray:
    n = circuit.n_qubits
    dim = 2 ** n
    state = np.eye(dim, dtype=complex).reshape([2] * n + [dim])
    k = 0
    for moment in circuit.moments:
        for gate in moment:
            state = apply_local(state, gate.matrix, gate.qubits, n)
        if circuit.moment_is_timed(moment):
            for q, kraus in enumerate(steps[k]):
                state = apply_local(state, kraus.operators[0], (q,), n)
            k += 1
    return state.reshape(dim, dim)


def _apply_channel_tensor(tensor: np.ndarray, ops: np.ndarray, targets, n: int) -> np.ndarray:
    # Rows of a column-stacked superoperator split as (bra qubits, ket qubits).
    total = None
    for m in ops:
        term = apply_local(tensor, m, targets, n, offset=n)
        term = apply_local(term, m.conj(), targets, n, offset=0)
        total = term if total is None else total + term
    return total


def _propagate_superoperator(circuit: QuantumCircuit, steps) -> np.ndarray:
    n = circuit.n_qubits
    size = 4 ** n
    tensor = np.eye(size, dtype=complex).reshape([2] * (2 * n) + [size])
    k = 0
    for moment in circuit.moments:
        for gate in moment:
            tensor = _apply_channel_tensor(tensor, gate.matrix[np.newaxis], gate.qubits, n)
        if circuit.moment_is_timed(moment):
            for q, kraus in enumerate(steps[k]):
                tensor = _apply_channel_tensor(tensor, kraus.operators, (q,), n)
            k += 1
    return tensor.reshape(size, size)


@dataclass
class MonteCarloResult:
    mean: SuperOperator
    stderr: np.ndarray
    fidelities: np.ndarray

    @property
    def n_samples(self) -> int:
        return len(self.fidelities)

    @property
    def mean_fidelity(self) -> float:
        return float(np.mean(self.fidelities))

    @property
    def fidelity_stderr(self) -> float:
        if self.n_samples < 2:
            return 0.0
        return float(np.std(self.fidelities, ddof=1) / np.sqrt(self.n_samples))


def monte_carlo_average(circuit: QuantumCircuit, noise: Sequence[SchwarmaModel], n_samples: int,
                        master_seed: int, service=None) -> MonteCarloResult:
    """Average of ``n_samples`` independent realizations; trial i uses substream (seed, i).

    The running mean and variance are accumulated in trial order, so the result does
    not depend on the worker count.
    """
    if n_samples < 1:
        raise InvalidArgumentError("n_samples must be >= 1", {'n_samples': n_samples})
    service = service or monte_carlo_service
    u_ideal = ideal_unitary(circuit)

    def trial(index, rng):
        models = [m.clone() for m in noise]
        s = simulate_noisy(circuit, models, rng)
        return s.data, process_fidelity(u_ideal, s)

    mean = None
    m2 = None
    fidelities = np.empty(n_samples)
    for count, (data, fidelity) in enumerate(service.map_trials(trial, n_samples, master_seed), 1):
        fidelities[count - 1] = fidelity
        if mean is None:
            mean = data.copy()
            m2 = np.zeros(data.shape)
            continue
        delta = data - mean
        mean += delta / count
        m2 += np.real(delta.conj() * (data - mean))

    if n_samples > 1:
        stderr = np.sqrt(m2 / (n_samples - 1) / n_samples)
    else:
        stderr = np.zeros(mean.shape)
    return MonteCarloResult(SuperOperator(mean), stderr, fidelities)


_TOKEN = re.compile(r'^([A-Za-z_][A-Za-z0-9_]*)\(([0-9,\s]*)\)$')


def parse_circuit(text: str, n_qubits: Optional[int] = None) -> QuantumCircuit:
    """One moment per line of ``GATE(q[,q])`` tokens; '#' starts a comment.

    An optional ``qubits N`` line fixes the register size; otherwise it is one more
    than the largest index used.
    """
    moments: List[Moment] = []
    declared = n_qubits
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split('#', 1)[0].strip()
        if not line:
            continue
        if line.lower().startswith('qubits'):
            parts = line.split()
            if len(parts) != 2 or not parts[1].isdigit():
                raise InvalidArgumentError(f"Bad register declaration on line {number}",
                                           {'line': number})
            declared = int(parts[1])
            continue
        gates = []
        for token in re.findall(r'[A-Za-z_][A-Za-z0-9_]*\([^)]*\)', line):
            match = _TOKEN.match(token)
            if not match:
                raise InvalidArgumentError(f"Bad gate token '{token}' on line {number}",
                                           {'line': number})
            qubits = tuple(int(q) for q in match.group(2).split(',') if q.strip())
            gates.append(Gate(match.group(1), qubits))
        leftover = re.sub(r'[A-Za-z_][A-Za-z0-9_]*\([^)]*\)', '', line).strip()
        if leftover or not gates:
            raise InvalidArgumentError(f"Unparseable text on line {number}: {leftover or line!r}",
                                       {'line': number})
        moments.append(tuple(gates))

    if declared is None:
        used = [q for m in moments for g in m for q in g.qubits]
        declared = max(used) + 1 if used else 1
    return QuantumCircuit(declared, tuple(moments))


def load_circuit(path: str) -> QuantumCircuit:
    with open(path, 'r', encoding='utf-8') as f:
        return parse_circuit(f.read())


def format_circuit(circuit: QuantumCircuit) -> str:
    if any(g.kind == 'custom' for m in circuit.moments for g in m):
        raise InvalidArgumentError("Custom gates have no text form")
    lines = [f"qubits {circuit.n_qubits}"]
    for moment in circuit.moments:
        lines.append(' '.join(str(g) for g in moment) if moment else 'I(0)')
    return '\n'.join(lines) + '\n'


def cnot_matrix() -> np.ndarray:
    """CNOT with qubit 0 as control."""
    return np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex)

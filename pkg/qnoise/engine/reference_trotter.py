"""Brute-force reference: sampled Gaussian noise, rectangular pulses, first-order Trotter.

Time is measured in gate lengths. Noise rates eta(t) enter the Hamiltonian directly,
H(t) = sum_q [eta_q(t).sigma + Omega_q(t)(cos phi sigma_x + sin phi sigma_y)] + sum Omega_zz Z Z,
and every fine step is exp(-i H(t_k) dt). Drive schedules carry arbitrary control
Hamiltonians with noise on chosen operators, for the continuous-drive comparisons.
"""
import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from qnoise.config import ExperimentConfig
from qnoise.engine.arma import AutocovarianceSequence
from qnoise.engine.circuit import QuantumCircuit
from qnoise.engine.quantum_core import (
    PAULIS, SIGMA_Z, SuperOperator, compose, embed_operator, kraus_to_superoperator,
    unitary_to_superoperator,
)
from qnoise.engine.schwarma import SchwarmaModel
from qnoise.exceptions import InvalidArgumentError, SimulationError

logger = logging.getLogger(__name__)

MAX_EMBEDDING_DOUBLINGS = 8


@dataclass(frozen=True)
class GaussianProcessSpec:
    """Stationary noise with f(tau) = gamma / (2 sqrt(pi) tau_c) exp(-tau^2 / (4 tau_c^2))."""

    gamma: float
    tau_c: float
    dt: float

    def __post_init__(self):
        if self.gamma < 0:
            raise InvalidArgumentError("gamma must be >= 0", {'gamma': self.gamma})
        if self.tau_c <= 0 or self.dt <= 0:
            raise InvalidArgumentError("tau_c and dt must be > 0",
                                       {'tau_c': self.tau_c, 'dt': self.dt})

    @classmethod
    def from_peak(cls, f0: float, tau_c: float, dt: float) -> 'GaussianProcessSpec':
        """Spec whose kernel value at zero lag is f0."""
        return cls(f0 * 2.0 * math.sqrt(math.pi) * tau_c, tau_c, dt)

    @property
    def peak(self) -> float:
        return self.gamma / (2.0 * math.sqrt(math.pi) * self.tau_c)

    def kernel(self, lags: np.ndarray) -> np.ndarray:
        tau = np.asarray(lags, dtype=float) * self.dt
        return self.peak * np.exp(-tau ** 2 / (4.0 * self.tau_c ** 2))

    def increment_autocovariance(self, n_lags: int) -> AutocovarianceSequence:
        """Autocovariance of the per-step phase increments eta(t_k) dt."""
        return AutocovarianceSequence(self.kernel(np.arange(n_lags)) * self.dt ** 2,
                                      lag_unit=self.dt)


def sample_gaussian_process(spec: GaussianProcessSpec, n: int, rng: np.random.Generator,
                            size: Tuple[int, ...] = ()) -> np.ndarray:
    """Exact stationary samples by circulant embedding, shape size + (n,)."""
    if n < 1:
        raise InvalidArgumentError("n must be >= 1", {'n': n})
    if spec.gamma == 0:
        return np.zeros(tuple(size) + (n,))

    length = max(n, 2)
    for _ in range(MAX_EMBEDDING_DOUBLINGS + 1):
        first_row = spec.kernel(np.arange(length))
        embedded = np.concatenate([first_row, first_row[-2:0:-1]])
        eigenvalues = np.fft.fft(embedded).real
        if eigenvalues.min() >= -1e-10 * eigenvalues.max():
            break
        length *= 2
    else:
        raise SimulationError("Circulant embedding is not PSD after padding",
                              {'min_eigenvalue': float(eigenvalues.min()), 'length': length})

    m = len(embedded)
    scale = np.sqrt(np.maximum(eigenvalues, 0.0) / m)
    shape = tuple(size) + (m,)
    z = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    return np.fft.fft(scale * z, axis=-1).real[..., :n]


# Rectangular pulse parameters per unit gate length: (drive amplitude, phase)
PULSES: Dict[str, Tuple[float, float]] = {
    'X': (np.pi / 2, 0.0),
    'Y_half': (np.pi / 4, np.pi / 2),
    'Y_neg_half': (np.pi / 4, -np.pi / 2),
    'I': (0.0, 0.0),
}
ZZ_RATE = np.pi / 4


@dataclass(frozen=True)
class DriveSchedule:
    """Piecewise-constant controls H_c(t_k) with noise entering as sum_l eta_l(t_k) S_l."""

    controls: np.ndarray
    noise_ops: np.ndarray
    dt: float

    def __post_init__(self):
        controls = np.asarray(self.controls, dtype=complex)
        ops = np.asarray(self.noise_ops, dtype=complex)
        if controls.ndim != 3 or controls.shape[1] != controls.shape[2]:
            raise InvalidArgumentError("Controls must have shape (n_steps, d, d)",
                                       {'shape': controls.shape})
        if ops.ndim != 3 or ops.shape[1:] != controls.shape[1:]:
            raise InvalidArgumentError("Noise operators must have shape (n_axes, d, d)",
                                       {'shape': ops.shape, 'd': controls.shape[1]})
        if self.dt <= 0:
            raise InvalidArgumentError("dt must be > 0", {'dt': self.dt})
        object.__setattr__(self, 'controls', controls)
        object.__setattr__(self, 'noise_ops', ops)

    @classmethod
    def from_hamiltonian(cls, h_control: Callable[[float], np.ndarray], t0: float, dt: float,
                         n_steps: int, noise_ops: Sequence[np.ndarray]) -> 'DriveSchedule':
        times = t0 + dt * np.arange(n_steps)
        return cls(np.stack([h_control(t) for t in times]), np.stack(noise_ops), dt)

    @property
    def n_steps(self) -> int:
        return self.controls.shape[0]

    @property
    def n_axes(self) -> int:
        return self.noise_ops.shape[0]

    @property
    def dimension(self) -> int:
        return self.controls.shape[1]

    def check_noise(self, noise: np.ndarray) -> np.ndarray:
        noise = np.asarray(noise, dtype=float)
        if noise.shape[-2:] != (self.n_axes, self.n_steps):
            raise InvalidArgumentError("Noise trajectories do not cover the schedule",
                                       {'expected': (self.n_axes, self.n_steps),
                                        'found': noise.shape})
        return noise

    def hamiltonians_at(self, k: int, noise: Optional[np.ndarray] = None) -> np.ndarray:
        """H(t_k) for noise of shape (..., n_axes, n_steps), shape (..., d, d)."""
        if noise is None:
            return self.controls[k]
        return self.controls[k] + np.einsum('...l,lij->...ij', noise[..., k], self.noise_ops)


@dataclass
class PulseSchedule:
    n_qubits: int
    dt: float
    amplitude: np.ndarray
    phase: np.ndarray
    pairs: List[Tuple[int, int]]
    zz_amplitude: np.ndarray
    # fine-step index -> virtual gates applied just before that step
    boundary_ops: Dict[int, List[Tuple[Tuple[int, ...], np.ndarray]]] = field(default_factory=dict)

    @property
    def n_steps(self) -> int:
        return self.amplitude.shape[0]

    @property
    def duration(self) -> float:
        return self.n_steps * self.dt


Schedule = Union[PulseSchedule, DriveSchedule]


def build_pulse_schedule(circuit: QuantumCircuit,
                         steps_per_gate: int = ExperimentConfig.DEFAULT_STEPS_PER_GATE) -> PulseSchedule:
    """Rectangular pulses, one gate length per timed moment; virtual Z gates are instant."""
    if steps_per_gate < 1:
        raise InvalidArgumentError("steps_per_gate must be >= 1")
    n = circuit.n_qubits
    n_steps = circuit.n_timed_moments * steps_per_gate
    dt = 1.0 / steps_per_gate
    amplitude = np.zeros((n_steps, n))
    phase = np.zeros((n_steps, n))
    pairs: List[Tuple[int, int]] = []
    zz_segments = []
    boundary_ops: Dict[int, List] = {}

    k = 0
    for moment in circuit.moments:
        start = k * steps_per_gate
        timed = circuit.moment_is_timed(moment)
        for gate in moment:
            if gate.is_virtual:
                boundary_ops.setdefault(start, []).append((gate.qubits, gate.matrix))
            elif gate.kind == 'ZZ90':
                pair = tuple(gate.qubits)
                if pair not in pairs:
                    pairs.append(pair)
                zz_segments.append((pairs.index(pair), start))
            elif gate.kind in PULSES:
                rate, phi = PULSES[gate.kind]
                q = gate.qubits[0]
                amplitude[start:start + steps_per_gate, q] = rate
                phase[start:start + steps_per_gate, q] = phi
            else:
                raise InvalidArgumentError(
                    f"Gate {gate.kind} has no native pulse; compile it first", {'gate': str(gate)})
        if timed:
            k += 1

    zz_amplitude = np.zeros((n_steps, len(pairs)))
    for index, start in zz_segments:
        zz_amplitude[start:start + steps_per_gate, index] = ZZ_RATE

    schedule = PulseSchedule(n, dt, amplitude, phase, pairs, zz_amplitude, boundary_ops)
    _check_pulse_areas(circuit, schedule, steps_per_gate)
    return schedule


def _check_pulse_areas(circuit: QuantumCircuit, schedule: PulseSchedule, steps_per_gate: int):
    k = 0
    for moment in circuit.moments:
        if not circuit.moment_is_timed(moment):
            continue
        window = slice(k * steps_per_gate, (k + 1) * steps_per_gate)
        for gate in moment:
            if gate.kind in PULSES:
                area = schedule.amplitude[window, gate.qubits[0]].sum() * schedule.dt
                if abs(area - PULSES[gate.kind][0]) > 1e-10:
                    raise SimulationError(f"Pulse area mismatch for {gate}", {'area': area})
        k += 1


def _local_operators(n_qubits: int) -> np.ndarray:
    # (n_qubits, 3, dim, dim) embedded Paulis
    return np.array([[embed_operator(p, (q,), n_qubits) for p in PAULIS] for q in range(n_qubits)])


def step_hamiltonians(schedule: Schedule, noise: Optional[np.ndarray] = None) -> np.ndarray:
    """H(t_k) for every fine step, shape (n_steps, dim, dim).

    ``noise`` holds eta with shape (n_qubits, 3, n_steps) for a pulse schedule and
    (n_axes, n_steps) for a drive schedule.
    """
    if isinstance(schedule, DriveSchedule):
        if noise is None:
            return schedule.controls.copy()
        noise = schedule.check_noise(noise)
        return schedule.controls + np.einsum('lk,lij->kij', noise, schedule.noise_ops)
    n = schedule.n_qubits
    ops = _local_operators(n)
    coeffs = np.zeros((schedule.n_steps, n, 3))
    coeffs[:, :, 0] = schedule.amplitude * np.cos(schedule.phase)
    coeffs[:, :, 1] = schedule.amplitude * np.sin(schedule.phase)
    if noise is not None:
        noise = np.asarray(noise, dtype=float)
        if noise.shape != (n, 3, schedule.n_steps):
            raise InvalidArgumentError("Noise trajectories do not cover the schedule",
                                       {'expected': (n, 3, schedule.n_steps), 'found': noise.shape})
        coeffs += np.transpose(noise, (2, 0, 1))
    hams = np.einsum('sqa,qaij->sij', coeffs, ops)
    for index, (a, b) in enumerate(schedule.pairs):
        zz = embed_operator(np.kron(SIGMA_Z, SIGMA_Z), (a, b), n)
        hams += schedule.zz_amplitude[:, index, None, None] * zz
    return hams


def step_unitaries(hamiltonians: np.ndarray, dt: float) -> np.ndarray:
    """exp(-i H dt) for a stack of Hermitian matrices via batched eigendecomposition."""
    values, vectors = np.linalg.eigh(hamiltonians)
    phases = np.exp(-1j * values * dt)
    return np.einsum('...ij,...j,...kj->...ik', vectors, phases, vectors.conj())


def _boundary_unitaries(schedule: Schedule, k: int) -> List[np.ndarray]:
    if isinstance(schedule, DriveSchedule):
        return []
    return [embed_operator(matrix, qubits, schedule.n_qubits)
            for qubits, matrix in schedule.boundary_ops.get(k, [])]


def trotter_unitary(schedule: Schedule, noise: Optional[np.ndarray] = None) -> np.ndarray:
    steps = step_unitaries(step_hamiltonians(schedule, noise), schedule.dt)
    u = np.eye(steps.shape[-1], dtype=complex)
    for k in range(schedule.n_steps):
        for boundary in _boundary_unitaries(schedule, k):
            u = boundary @ u
        u = steps[k] @ u
    for boundary in _boundary_unitaries(schedule, schedule.n_steps):
        u = boundary @ u
    return u


def trotter_simulate(schedule: Schedule, noise: Optional[np.ndarray] = None) -> SuperOperator:
    """One realization of the Trotterized evolution as a superoperator."""
    return unitary_to_superoperator(trotter_unitary(schedule, noise))


def trotter_states(schedule: DriveSchedule, noise: Optional[np.ndarray], psi0: np.ndarray,
                   n_traj: int = 1) -> np.ndarray:
    """Trotterized pure-state evolution of a trajectory batch, shape (n_traj, d).

    ``noise`` has shape (n_traj, n_axes, n_steps); with no noise ``n_traj`` copies of
    the noiseless evolution are returned. Memory stays at one step of Hamiltonians.
    """
    if noise is not None:
        noise = schedule.check_noise(noise)
        if noise.ndim != 3:
            raise InvalidArgumentError("Batched noise must have shape (n_traj, n_axes, n_steps)",
                                       {'shape': noise.shape})
        n_traj = noise.shape[0]
    psi = np.tile(np.asarray(psi0, dtype=complex), (n_traj, 1))
    for k in range(schedule.n_steps):
        hams = np.broadcast_to(schedule.hamiltonians_at(k, noise),
                               (n_traj, schedule.dimension, schedule.dimension))
        psi = evolve_states(psi, hams, schedule.dt)
    return psi


def sample_circuit_noise(spec: GaussianProcessSpec, schedule: PulseSchedule,
                         rng: np.random.Generator) -> np.ndarray:
    """Independent 3-axis trajectories for every qubit, shape (n_qubits, 3, n_steps)."""
    return sample_gaussian_process(spec, schedule.n_steps, rng, size=(schedule.n_qubits, 3))


def ideal_segments(h_control: Callable[[float], np.ndarray], t0: float, dt: float,
                   kappa: int, n_segments: int) -> np.ndarray:
    """Noiseless Trotter products over coarse steps of kappa fine steps, shape (n_segments, d, d)."""
    if kappa < 1 or n_segments < 1:
        raise InvalidArgumentError("kappa and n_segments must be >= 1")
    times = t0 + dt * np.arange(n_segments * kappa)
    hams = np.stack([h_control(t) for t in times])
    fine = step_unitaries(hams, dt).reshape(n_segments, kappa, *hams.shape[1:])
    segments = np.empty((n_segments,) + hams.shape[1:], dtype=complex)
    for j in range(n_segments):
        u = np.eye(hams.shape[1], dtype=complex)
        for step in fine[j]:
            u = step @ u
        segments[j] = u
    return segments


def continuous_drive_schwarma(segments: Sequence[np.ndarray], noise_model: SchwarmaModel,
                              n_steps: int, rng: np.random.Generator) -> SuperOperator:
    """Compose U_E(j) . segment_j for j = 1..n_steps."""
    if len(segments) != n_steps:
        raise InvalidArgumentError("Need one ideal segment per coarse step",
                                   {'segments': len(segments), 'n_steps': n_steps})
    dim = np.asarray(segments[0]).shape[0]
    outputs = noise_model.sample(n_steps, rng)
    if noise_model.is_unitary:
        u = np.eye(dim, dtype=complex)
        for j in range(n_steps):
            u = noise_model.kraus_from_outputs(outputs[j], j).operators[0] @ (segments[j] @ u)
        return unitary_to_superoperator(u)
    s = SuperOperator.identity(dim)
    for j in range(n_steps):
        s = compose(unitary_to_superoperator(segments[j]), s)
        s = compose(kraus_to_superoperator(noise_model.kraus_from_outputs(outputs[j], j)), s)
    return s


def continuous_drive_states(segments: Sequence[np.ndarray], noise_model: SchwarmaModel,
                            n_steps: int, psi0: np.ndarray, n_traj: int,
                            rng: np.random.Generator) -> np.ndarray:
    """Batched pure-state form of ``continuous_drive_schwarma``, shape (n_traj, d).

    Needs a unitary noise model; trajectory t sees U_E(j) . segment_j for its own outputs.
    """
    if len(segments) != n_steps:
        raise InvalidArgumentError("Need one ideal segment per coarse step",
                                   {'segments': len(segments), 'n_steps': n_steps})
    if n_traj < 1:
        raise InvalidArgumentError("n_traj must be >= 1", {'n_traj': n_traj})
    if not noise_model.is_unitary:
        raise InvalidArgumentError("State propagation needs a unitary noise model",
                                   {'K': noise_model.K})
    outputs = noise_model.sample_batch(n_traj, n_steps, rng)
    psi = np.tile(np.asarray(psi0, dtype=complex), (n_traj, 1))
    for j in range(n_steps):
        psi = psi @ np.asarray(segments[j]).T
        psi = np.einsum('tij,tj->ti', noise_model.noise_unitaries(outputs[:, j], j), psi)
    return psi


def evolve_states(psi: np.ndarray, hamiltonians: np.ndarray, dt: float) -> np.ndarray:
    """One Trotter step for a batch of states, psi (n_traj, d) and H (n_traj, d, d)."""
    return np.einsum('tij,tj->ti', step_unitaries(hamiltonians, dt), psi)


def spin_operators(spin: str) -> Tuple[np.ndarray, np.ndarray]:
    """(S_x, S_z) for spin 'half' or 'one'."""
    if spin == 'half':
        return PAULIS[0] / 2.0, SIGMA_Z / 2.0
    if spin == 'one':
        sx = np.array([[0, 1, 0], [1, 0, 1], [0, 1, 0]], dtype=complex) / np.sqrt(2.0)
        sz = np.diag([1.0, 0.0, -1.0]).astype(complex)
        return sx, sz
    raise InvalidArgumentError(f"Unknown spin '{spin}'", {'options': ['half', 'one']})


def lz_hamiltonian(delta: float, alpha: float, t: float, spin: str = 'half') -> np.ndarray:
    """2 Delta S_x + 2 alpha t S_z"""
    sx, sz = spin_operators(spin)
    return 2.0 * delta * sx + 2.0 * alpha * t * sz

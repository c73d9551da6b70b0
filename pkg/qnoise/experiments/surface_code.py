"""Surface-code stabilizer check: SchWARMA gate-level noise against the fine-step Trotter reference."""
import logging
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from qnoise.config import ExperimentConfig
from qnoise.engine.arma import ArmaModel, convert_timescale, fit_ma_to_autocovariance
from qnoise.engine.circuit import (
    QuantumCircuit, build_x_check, build_z_check, ideal_unitary, monte_carlo_average,
)
from qnoise.engine.quantum_core import PAULIS, SuperOperator
from qnoise.engine.reference_trotter import (
    GaussianProcessSpec, build_pulse_schedule, sample_circuit_noise, trotter_unitary,
)
from qnoise.engine.schwarma import SchwarmaModel
from qnoise.exceptions import InvalidArgumentError
from qnoise.experiments.results import ExperimentResult
from qnoise.experiments.statistics import mean_and_stderr
from qnoise.services.monte_carlo_service import derive_seed, monte_carlo_service

logger = logging.getLogger(__name__)

CHECK_BUILDERS = {'X': build_x_check, 'Z': build_z_check}
CUSTOM_CHECK = 'custom'


@dataclass
class PointComparison:
    gamma: float
    tau_c: float
    schwarma_infidelity: float
    schwarma_stderr: float
    trotter_infidelity: float
    trotter_stderr: float
    # per-trial SchWARMA fidelities and the averaged SchWARMA channel
    schwarma_fidelities: np.ndarray = field(default_factory=lambda: np.zeros(0), repr=False,
                                            compare=False)
    schwarma_mean: Optional[SuperOperator] = field(default=None, repr=False, compare=False)

    @property
    def abs_error(self) -> float:
        return abs(self.schwarma_infidelity - self.trotter_infidelity)

    @property
    def pooled_stderr(self) -> float:
        return math.hypot(self.schwarma_stderr, self.trotter_stderr)


def build_check(check: str = 'Z') -> QuantumCircuit:
    if check not in CHECK_BUILDERS:
        raise InvalidArgumentError(f"Unknown stabilizer check '{check}'",
                                   {'options': sorted(CHECK_BUILDERS)})
    return CHECK_BUILDERS[check]()


def gate_level_ma(spec: GaussianProcessSpec, steps_per_gate: int, n_gates: int) -> ArmaModel:
    """Per-gate MA model matching the partial-sum variances of the fine-step phase increments."""
    fast = spec.increment_autocovariance(n_gates * steps_per_gate)
    slow = convert_timescale(fast, steps_per_gate, n_gates)
    return fit_ma_to_autocovariance(slow)


def schwarma_circuit_noise(model: ArmaModel, n_qubits: int) -> list:
    """Independent three-axis Hamiltonian noise on every qubit."""
    return [SchwarmaModel.hamiltonian_noise([model.clone() for _ in PAULIS], PAULIS)
            for _ in range(n_qubits)]


def compare_point(circuit: QuantumCircuit, gamma: float, tau_c: float, n_samples: int, seed: int,
                  steps_per_gate: int = ExperimentConfig.DEFAULT_STEPS_PER_GATE,
                  service=None) -> PointComparison:
    """Both simulators on one (gamma, tau_c) point; SchWARMA trials use (seed, 0), Trotter (seed, 1)."""
    service = service or monte_carlo_service
    spec = GaussianProcessSpec(gamma, tau_c, 1.0 / steps_per_gate)

    model = gate_level_ma(spec, steps_per_gate, circuit.n_timed_moments)
    noise = schwarma_circuit_noise(model, circuit.n_qubits)
    schwarma = monte_carlo_average(circuit, noise, n_samples, derive_seed(seed, 0), service)

    schedule = build_pulse_schedule(circuit, steps_per_gate)
    u_ideal = ideal_unitary(circuit)
    dim = u_ideal.shape[0]

    def trial(index, rng):
        u = trotter_unitary(schedule, sample_circuit_noise(spec, schedule, rng))
        return abs(np.vdot(u_ideal, u)) ** 2 / dim ** 2

    fidelities = np.fromiter(service.map_trials(trial, n_samples, derive_seed(seed, 1)),
                             dtype=float, count=n_samples)
    trotter_mean, trotter_err = mean_and_stderr(fidelities)

    return PointComparison(gamma, tau_c,
                           max(0.0, 1.0 - schwarma.mean_fidelity), schwarma.fidelity_stderr,
                           max(0.0, 1.0 - float(trotter_mean)), float(trotter_err),
                           schwarma.fidelities, schwarma.mean)


def error_fit_coefficient(points: Sequence[PointComparison]) -> Optional[float]:
    """10^mean(log10 |dF| - log10 infidelity), the intercept of a unit-slope log-log fit."""
    usable = [p for p in points if p.abs_error > 0 and p.trotter_infidelity > 0]
    if not usable:
        return None
    logs = [math.log10(p.abs_error) - math.log10(p.trotter_infidelity) for p in usable]
    return float(10 ** np.mean(logs))


def surface_code_sweep(gammas: Sequence[float], tau_cs: Sequence[float],
                       n_samples: int = ExperimentConfig.DEFAULT_SAMPLES,
                       seed: int = ExperimentConfig.DEFAULT_SEED, check: str = 'Z',
                       steps_per_gate: int = ExperimentConfig.DEFAULT_STEPS_PER_GATE,
                       service=None, circuit: Optional[QuantumCircuit] = None) -> ExperimentResult:
    """Infidelity of both simulators and their absolute difference on every grid point.

    Grid point i (row-major over gammas x tau_cs) owns seed derive_seed(seed, i). A given
    ``circuit`` replaces the stabilizer check and is labelled 'custom'.
    """
    if n_samples < 1:
        raise InvalidArgumentError("n_samples must be >= 1", {'n_samples': n_samples})
    if circuit is None:
        circuit = build_check(check)
    else:
        check = CUSTOM_CHECK
    result = ExperimentResult('surface', ['check', 'gamma', 'tau_c', 'simulator'])
    points = []
    index = 0
    for gamma in gammas:
        for tau_c in tau_cs:
            logger.info(f"🔬 Surface {check}-check point gamma={gamma:g} tau_c={tau_c:g}")
            point = compare_point(circuit, gamma, tau_c, n_samples, derive_seed(seed, index),
                                  steps_per_gate, service)
            points.append(point)
            axes = dict(check=check, gamma=gamma, tau_c=tau_c)
            result.add('infidelity', point.schwarma_infidelity, point.schwarma_stderr,
                       simulator='schwarma', **axes)
            result.add('infidelity', point.trotter_infidelity, point.trotter_stderr,
                       simulator='trotter', **axes)
            result.add('abs_error', point.abs_error, point.pooled_stderr,
                       simulator='difference', **axes)
            index += 1

    result.summary['points'] = points
    result.summary['fit_coefficient'] = error_fit_coefficient(points)
    return result

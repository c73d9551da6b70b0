"""Dynamical decoupling under correlated SchWARMA noise.

Every step is an instantaneous pi pulse (or nothing) followed by one noise step.
Multi-axis and static noise report process-fidelity decay; amplitude damping reports
unitality decay.
"""
import logging
from typing import Dict, Optional, Sequence

import numpy as np

from qnoise.config import ExperimentConfig
from qnoise.engine.arma import ArmaModel, autocovariance
from qnoise.engine.quantum_core import IDENTITY, PAULIS, SIGMA_X, SIGMA_Y
from qnoise.engine.schwarma import multiaxis_unitaries
from qnoise.exceptions import InvalidArgumentError
from qnoise.experiments.results import ExperimentResult
from qnoise.experiments.statistics import gaussian_kernel_ma, mean_and_stderr
from qnoise.services.monte_carlo_service import substream

logger = logging.getLogger(__name__)

PI_PULSES = {'I': IDENTITY, 'X': -1j * SIGMA_X, 'Y': -1j * SIGMA_Y}
PROTOCOL_CYCLES: Dict[str, Sequence[str]] = {
    'free': ('I',),
    'XX': ('X', 'X'),
    'XY4': ('X', 'Y', 'X', 'Y'),
}
STEPS_PER_PERIOD = 4


def pulse_sequence(protocol: str, n_steps: int) -> np.ndarray:
    """Pulse unitary preceding each noise step, shape (n_steps, 2, 2)."""
    if protocol not in PROTOCOL_CYCLES:
        raise InvalidArgumentError(f"Unknown DD protocol '{protocol}'",
                                   {'options': sorted(PROTOCOL_CYCLES)})
    cycle = PROTOCOL_CYCLES[protocol]
    return np.array([PI_PULSES[cycle[k % len(cycle)]] for k in range(n_steps)])


def _sample_outputs(noise_kind: str, model: ArmaModel, n_samples: int, n_steps: int,
                    rng: np.random.Generator) -> np.ndarray:
    if noise_kind == 'multiaxis':
        return np.stack([np.real(model.generate_batch(n_samples, n_steps, rng)) for _ in range(3)],
                        axis=-1)
    if noise_kind == 'static':
        # one draw per realization, held for the whole sequence, on the z axis only
        variance = float(autocovariance(model, 1).values[0])
        y = np.zeros((n_samples, n_steps, 3))
        y[:, :, 2] = np.sqrt(variance) * rng.standard_normal((n_samples, 1))
        return y
    if noise_kind == 'amplitude_damping':
        complex_model = model.clone(complex_driving=True)
        return complex_model.generate_batch(n_samples, n_steps, rng)
    raise InvalidArgumentError(f"Unknown DD noise kind '{noise_kind}'",
                               {'options': ExperimentConfig.DD_NOISE_KINDS})


def _damping_superoperators(y: np.ndarray) -> np.ndarray:
    """Column-stacked superoperators of the amplitude-damping step, shape y.shape + (4, 4)."""
    g = np.abs(y)
    c, s = np.cos(g), np.sin(g)
    out = np.zeros(y.shape + (4, 4))
    # K0 = diag(1, cos g), K1 = sin g |0><1|
    out[..., 0, 0] = 1.0
    out[..., 0, 3] = s ** 2
    out[..., 1, 1] = c
    out[..., 2, 2] = c
    out[..., 3, 3] = c ** 2
    return out


def _unitary_superoperator(u: np.ndarray) -> np.ndarray:
    return np.kron(u.conj(), u)


def _bloch_shift(s: np.ndarray) -> np.ndarray:
    """Bloch components of Phi(I)/2 for a batch of column-stacked superoperators."""
    image = (s @ np.eye(2, dtype=complex).reshape(-1, order='F')).reshape(s.shape[:-2] + (2, 2))
    image = np.swapaxes(image, -1, -2)
    return np.stack([np.real(np.einsum('ij,...ji->...', p, image)) / 2.0 for p in PAULIS], axis=-1)


def dd_experiment(protocol: str, n_periods: int, noise_kind: str = 'multiaxis',
                  model: Optional[ArmaModel] = None, n_samples: int = ExperimentConfig.DEFAULT_SAMPLES,
                  seed: int = ExperimentConfig.DEFAULT_SEED, tau_c: float = 3.0,
                  variance: float = 1e-3) -> ExperimentResult:
    """Fidelity (or unitality) after every step of ``n_periods`` four-step periods.

    ``model`` is the per-axis ARMA process; by default a Gaussian-kernel MA fit with the
    given per-step variance and correlation time.
    """
    if n_periods < 1 or n_samples < 1:
        raise InvalidArgumentError("n_periods and n_samples must be >= 1",
                                   {'n_periods': n_periods, 'n_samples': n_samples})
    if model is None:
        model = gaussian_kernel_ma(variance, tau_c)
    n_steps = STEPS_PER_PERIOD * n_periods
    pulses = pulse_sequence(protocol, n_steps)
    y = _sample_outputs(noise_kind, model, n_samples, n_steps, substream(seed, 0))

    result = ExperimentResult('dd', ['protocol', 'noise', 'step'])
    if noise_kind == 'amplitude_damping':
        s = np.broadcast_to(np.eye(4, dtype=complex), (n_samples, 4, 4)).copy()
        for k in range(n_steps):
            s = _damping_superoperators(y[:, k]) @ (_unitary_superoperator(pulses[k]) @ s)
            beta = _bloch_shift(s)
            mean_beta, beta_err = mean_and_stderr(beta)
            norm = float(np.linalg.norm(mean_beta))
            err = float(np.sqrt(np.sum((mean_beta * beta_err) ** 2)) / norm) if norm > 0 else 0.0
            result.add('unitality', 1.0 - norm, err, protocol=protocol, noise=noise_kind, step=k + 1)
        return result

    u = np.broadcast_to(np.eye(2, dtype=complex), (n_samples, 2, 2)).copy()
    u_ideal = np.eye(2, dtype=complex)
    for k in range(n_steps):
        u = multiaxis_unitaries(y[:, k]) @ (pulses[k] @ u)
        u_ideal = pulses[k] @ u_ideal
        overlaps = np.einsum('ji,tji->t', u_ideal.conj(), u)
        fidelity = np.abs(overlaps) ** 2 / 4.0
        mean, err = mean_and_stderr(fidelity)
        result.add('fidelity', min(float(mean), 1.0), float(err),
                   protocol=protocol, noise=noise_kind, step=k + 1)
    logger.debug("DD %s/%s final fidelity %.6f", protocol, noise_kind,
                 result.rows[-1]['value'])
    return result


def dd_sweep(protocols: Sequence[str], n_periods: int, noise_kind: str, n_samples: int, seed: int,
             tau_c: float, variance: float) -> ExperimentResult:
    """All protocols against the same noise model; every protocol sees the same realizations."""
    model = gaussian_kernel_ma(variance, tau_c)
    combined = ExperimentResult('dd', ['protocol', 'noise', 'step'])
    for protocol in protocols:
        part = dd_experiment(protocol, n_periods, noise_kind, model, n_samples, seed)
        combined.rows.extend(part.rows)
    combined.summary.update(tau_c=tau_c, variance=variance, ma_order=model.q)
    return combined

"""Landau-Zener sweep with slow transverse noise: full Trotter against partitioned SchWARMA.

The partitioned scheme precomputes noiseless segments of kappa fine steps and applies
one SchWARMA noise unitary exp(-i y S_x) per segment.
"""
import logging
import math
import time
from dataclasses import dataclass
from typing import Dict, Tuple

import numpy as np

from qnoise.config import ExperimentConfig
from qnoise.engine.arma import ArmaModel, convert_timescale, fit_ma_to_autocovariance
from qnoise.engine.reference_trotter import (
    DriveSchedule, GaussianProcessSpec, continuous_drive_schwarma, continuous_drive_states,
    ideal_segments, lz_hamiltonian, sample_gaussian_process, spin_operators, trotter_simulate,
    trotter_states,
)
from qnoise.engine.schwarma import SchwarmaModel
from qnoise.exceptions import InvalidArgumentError
from qnoise.experiments.results import ExperimentResult
from qnoise.experiments.statistics import mean_and_stderr
from qnoise.services.monte_carlo_service import substream

logger = logging.getLogger(__name__)

TRAJECTORY_CHUNK = 200
CORRELATION_WINDOW = 8.0


@dataclass(frozen=True)
class LandauZenerSetup:
    spin: str
    delta: float
    alpha: float
    half_duration: float
    dt: float
    kappa: int
    n_coarse: int
    spec: GaussianProcessSpec

    @property
    def n_fine(self) -> int:
        return self.n_coarse * self.kappa

    @property
    def start(self) -> float:
        return -self.half_duration

    def hamiltonian(self, t: float) -> np.ndarray:
        return lz_hamiltonian(self.delta, self.alpha, t, self.spin)

    def eigenbasis(self, t: float) -> np.ndarray:
        _, vectors = np.linalg.eigh(self.hamiltonian(t))
        return vectors

    def initial_state(self) -> np.ndarray:
        return self.eigenbasis(self.start)[:, 0]

    def final_basis(self) -> np.ndarray:
        return self.eigenbasis(self.start + self.n_fine * self.dt)


def build_setup(spin: str = 'half', delta: float = 0.5, alpha: float = 1.0, t0: float = 60.0,
                tau0: float = 10.0, f0_ratio: float = 0.003, dt: float = 0.01,
                kappa: int = ExperimentConfig.DEFAULT_TROTTER_RATIO) -> LandauZenerSetup:
    """Sweep over [-t0/sqrt(alpha), t0/sqrt(alpha)] with noise f(0) = f0_ratio alpha and tau_c = tau0/sqrt(alpha)."""
    if alpha <= 0 or t0 <= 0 or tau0 <= 0 or dt <= 0 or kappa < 1:
        raise InvalidArgumentError("alpha, t0, tau0, dt must be > 0 and kappa >= 1",
                                   {'alpha': alpha, 't0': t0, 'tau0': tau0, 'dt': dt, 'kappa': kappa})
    spin_operators(spin)
    half = t0 / math.sqrt(alpha)
    n_coarse = int(round(2.0 * half / dt)) // kappa
    if n_coarse < 1:
        raise InvalidArgumentError("Sweep shorter than one coarse step",
                                   {'duration': 2.0 * half, 'coarse_step': kappa * dt})
    spec = GaussianProcessSpec.from_peak(f0_ratio * alpha, tau0 / math.sqrt(alpha), dt)
    return LandauZenerSetup(spin, delta, alpha, half, dt, kappa, n_coarse, spec)


def coarse_noise_model(setup: LandauZenerSetup) -> Tuple[ArmaModel, int]:
    """MA model for the per-segment noise phase, and the number of lags it was fitted on."""
    coarse_dt = setup.kappa * setup.dt
    n_lags = min(setup.n_coarse, int(math.ceil(CORRELATION_WINDOW * setup.spec.tau_c / coarse_dt)) + 1)
    fast = setup.spec.increment_autocovariance(n_lags * setup.kappa)
    slow = convert_timescale(fast, setup.kappa, n_lags)
    return fit_ma_to_autocovariance(slow), n_lags


def _populations(psi: np.ndarray, basis: np.ndarray) -> np.ndarray:
    return np.abs(psi @ basis.conj()) ** 2


def drive_schedule(setup: LandauZenerSetup) -> DriveSchedule:
    """Fine-step sweep with the noise rate eta(t) on S_x."""
    sx, _ = spin_operators(setup.spin)
    return DriveSchedule.from_hamiltonian(setup.hamiltonian, setup.start, setup.dt, setup.n_fine, [sx])


def coarse_schwarma_model(setup: LandauZenerSetup, model: ArmaModel) -> SchwarmaModel:
    sx, _ = spin_operators(setup.spin)
    return SchwarmaModel.hamiltonian_noise([model], [sx])


def full_trotter_populations(setup: LandauZenerSetup, n_samples: int, seed: int) -> np.ndarray:
    """Final-basis populations per trajectory, fine-step Trotter with sampled eta(t) on S_x."""
    schedule = drive_schedule(setup)
    psi0 = setup.initial_state()
    basis = setup.final_basis()
    out = []
    for chunk, start in enumerate(range(0, n_samples, TRAJECTORY_CHUNK)):
        size = min(TRAJECTORY_CHUNK, n_samples - start)
        eta = sample_gaussian_process(setup.spec, setup.n_fine, substream(seed, 0, chunk),
                                      size=(size, 1))
        out.append(_populations(trotter_states(schedule, eta, psi0), basis))
    return np.concatenate(out)


def partitioned_populations(setup: LandauZenerSetup, segments: np.ndarray, model: ArmaModel,
                            n_samples: int, seed: int) -> np.ndarray:
    """Final-basis populations per trajectory, one noise unitary per precomputed segment."""
    psi = continuous_drive_states(segments, coarse_schwarma_model(setup, model), setup.n_coarse,
                                  setup.initial_state(), n_samples, substream(seed, 1))
    return _populations(psi, setup.final_basis())


def single_trajectory_residuals(setup: LandauZenerSetup, seed: int) -> Dict[str, float]:
    """Largest gap between the batched propagators and the one-realization superoperators.

    Both sides of each pair consume the same random stream, so they see the same noise.
    """
    psi0 = setup.initial_state()
    rho0 = np.outer(psi0, psi0.conj()).flatten(order='F')

    schedule = drive_schedule(setup)
    eta = sample_gaussian_process(setup.spec, setup.n_fine, substream(seed, 5), size=(1, 1))
    single = trotter_simulate(schedule, eta[0]).data @ rho0
    psi = trotter_states(schedule, eta, psi0)[0]
    trotter_gap = np.max(np.abs(single - np.outer(psi, psi.conj()).flatten(order='F')))

    segments = ideal_segments(setup.hamiltonian, setup.start, setup.dt, setup.kappa, setup.n_coarse)
    noise = coarse_schwarma_model(setup, coarse_noise_model(setup)[0])
    single = continuous_drive_schwarma(segments, noise.clone(), setup.n_coarse,
                                       substream(seed, 6)).data @ rho0
    psi = continuous_drive_states(segments, noise.clone(), setup.n_coarse, psi0, 1,
                                  substream(seed, 6))[0]
    schwarma_gap = np.max(np.abs(single - np.outer(psi, psi.conj()).flatten(order='F')))
    return {'trotter': float(trotter_gap), 'schwarma': float(schwarma_gap)}


def lz_experiment(setup: LandauZenerSetup, n_samples: int = ExperimentConfig.DEFAULT_SAMPLES,
                  seed: int = ExperimentConfig.DEFAULT_SEED) -> ExperimentResult:
    """Populations of every instantaneous level at the end of the sweep for both methods."""
    if n_samples < 1:
        raise InvalidArgumentError("n_samples must be >= 1", {'n_samples': n_samples})
    result = ExperimentResult('lz', ['spin', 'method', 'level'])

    began = time.perf_counter()
    trotter = full_trotter_populations(setup, n_samples, seed)
    trotter_seconds = time.perf_counter() - began

    began = time.perf_counter()
    segments = ideal_segments(setup.hamiltonian, setup.start, setup.dt, setup.kappa, setup.n_coarse)
    model, n_lags = coarse_noise_model(setup)
    precompute_seconds = time.perf_counter() - began

    began = time.perf_counter()
    partitioned = partitioned_populations(setup, segments, model, n_samples, seed)
    noisy_seconds = time.perf_counter() - began

    for method, populations in (('trotter', trotter), ('schwarma', partitioned)):
        mean, err = mean_and_stderr(populations)
        for level in range(populations.shape[1]):
            result.add('population', min(float(mean[level]), 1.0), float(err[level]),
                       spin=setup.spin, method=method, level=level)

    speedup = trotter_seconds / max(noisy_seconds, 1e-9)
    result.summary.update(trotter_seconds=trotter_seconds, schwarma_seconds=noisy_seconds,
                          precompute_seconds=precompute_seconds, speedup=speedup,
                          coarse_lags=n_lags, n_coarse=setup.n_coarse)
    logger.info(f"⏱️ LZ noisy evolution: trotter {trotter_seconds:.2f}s, "
                f"schwarma {noisy_seconds:.3f}s ({speedup:.0f}x)")
    return result


def transition_probability(result: ExperimentResult, method: str) -> Tuple[float, float]:
    """1 - ground-level population for 'trotter' or 'schwarma', with its standard error."""
    rows = result.select('population', method=method, level=0)
    if not rows:
        raise InvalidArgumentError(f"No populations for method '{method}'")
    return 1.0 - rows[0]['value'], rows[0]['stderr']

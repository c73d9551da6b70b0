"""Quantum noise spectroscopy with sign-modulated idle sequences.

Sequence k (k = 1..W/2) idles for W steps and applies an instantaneous X wherever
sign(cos(pi (k-1) m / W)) flips. A qubit prepared in |+> then survives with
p = 1/2 (1 + exp(-chi)), chi = (2/W) sum_j |F(2 pi j / W)|^2 S(2 pi j / W).
"""
import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import optimize

from qnoise.config import ExperimentConfig
from qnoise.engine.arma import ArmaModel, PowerSpectrum, power_spectrum
from qnoise.engine.quantum_core import SIGMA_Z
from qnoise.engine.schwarma import SchwarmaModel
from qnoise.exceptions import InvalidArgumentError
from qnoise.services.monte_carlo_service import substream

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class QnsDesign:
    W: int
    modulation_table: np.ndarray
    filter_matrix: np.ndarray

    @property
    def n_sequences(self) -> int:
        return self.modulation_table.shape[0]

    @property
    def frequencies(self) -> np.ndarray:
        """Design grid 2 pi j / W for j = 0..W/2 (DC included)."""
        return 2.0 * np.pi * np.arange(self.W // 2 + 1) / self.W

    @property
    def pulse_table(self) -> np.ndarray:
        """True where an X gate precedes step m."""
        flips = np.zeros_like(self.modulation_table, dtype=bool)
        flips[:, 1:] = self.modulation_table[:, 1:] != self.modulation_table[:, :-1]
        return flips

    @property
    def quadrature_weights(self) -> np.ndarray:
        weights = np.full(self.W // 2 + 1, 2.0)
        weights[0] = weights[-1] = 1.0
        return weights

    @property
    def regression_matrix(self) -> np.ndarray:
        """chi = regression_matrix @ S on the design grid."""
        return (2.0 / self.W) * self.filter_matrix * self.quadrature_weights


@dataclass
class QnsSurvivals:
    p_hat: np.ndarray
    stderr: np.ndarray
    n_traj: int


@dataclass
class QnsReconstruction:
    spectrum: PowerSpectrum
    dc: float
    kept_rows: np.ndarray
    rank: int
    condition_number: float
    residual: float


def qns_build_design(W: int) -> QnsDesign:
    if W % 2 or W < ExperimentConfig.MIN_QNS_W:
        raise InvalidArgumentError("W must be even and >= 4", {'W': W})
    k = np.arange(1, W // 2 + 1)[:, None]
    m = np.arange(W)[None, :]
    # integer phase r = (k-1) m mod 2W keeps the zero crossings exact; cos >= 0 maps to +1
    r = ((k - 1) * m) % (2 * W)
    table = np.where((2 * r <= W) | (2 * r >= 3 * W), 1, -1)
    transform = np.fft.fft(table, axis=1)[:, :W // 2 + 1]
    filters = np.abs(transform) ** 2
    return QnsDesign(W, table, filters)


def survival_probability_analytic(filter_row: np.ndarray, spectrum: PowerSpectrum) -> float:
    """Survival of |+> for one sequence given the noise spectrum on the design grid."""
    row = np.asarray(filter_row, dtype=float)
    values = np.asarray(spectrum.values, dtype=float)
    if row.shape != values.shape or len(row) < 3:
        raise InvalidArgumentError("Filter row and spectrum must share the design grid",
                                   {'filter': row.shape, 'spectrum': values.shape})
    W = 2 * (len(row) - 1)
    grid = 2.0 * np.pi * np.arange(len(row)) / W
    if not np.allclose(spectrum.frequencies, grid):
        raise InvalidArgumentError("Spectrum frequencies are not the design grid 2 pi j / W")
    weights = np.full(len(row), 2.0)
    weights[0] = weights[-1] = 1.0
    overlap = (2.0 / W) * np.sum(weights * row * values)
    return float(0.5 * (1.0 + np.exp(-overlap)))


def design_spectrum(design: QnsDesign, model: ArmaModel, noise_scale: float = 1.0) -> PowerSpectrum:
    """The model spectrum of y = noise_scale * ARMA output, sampled on the design grid."""
    s = power_spectrum(model, design.frequencies)
    return PowerSpectrum(s.frequencies, noise_scale ** 2 * s.values)


def _dephasing_arma(model: SchwarmaModel) -> ArmaModel:
    direction = model.directions[0]
    single_axis_z = (model.n_axes == 1 and model.K == 1 and model.dimension == 2
                     and np.allclose(direction.a_block, -1j * SIGMA_Z))
    if not single_axis_z:
        raise InvalidArgumentError("QNS needs a single-axis Z dephasing SchWARMA model",
                                   {'axes': model.n_axes, 'K': model.K})
    return model.arma_models[0]


def qns_simulate_survivals(design: QnsDesign, schwarma_model: SchwarmaModel, n_traj: int,
                           seed: int = ExperimentConfig.DEFAULT_SEED,
                           noise_scale: float = 1.0) -> QnsSurvivals:
    """Mean exact survival of |+> per sequence over n_traj noise realizations.

    Sequence k draws its realizations from substream (seed, k).
    """
    if n_traj < 1:
        raise InvalidArgumentError("n_traj must be >= 1", {'n_traj': n_traj})
    arma = _dephasing_arma(schwarma_model)
    plus = np.array([1.0, 1.0], dtype=complex) / np.sqrt(2.0)
    pulses = design.pulse_table

    p_hat = np.empty(design.n_sequences)
    stderr = np.zeros(design.n_sequences)
    for k in range(design.n_sequences):
        y = np.real(arma.generate_batch(n_traj, design.W, substream(seed, k), noise_scale))
        psi = np.tile(plus, (n_traj, 1))
        for m in range(design.W):
            if pulses[k, m]:
                psi = psi[:, ::-1]
            # exp(-i y sigma_z)
            psi = psi * np.stack([np.exp(-1j * y[:, m]), np.exp(1j * y[:, m])], axis=1)
        survival = np.abs(psi @ plus.conj()) ** 2
        p_hat[k] = survival.mean()
        if n_traj > 1:
            stderr[k] = survival.std(ddof=1) / np.sqrt(n_traj)
    return QnsSurvivals(p_hat, stderr, n_traj)


def qns_forward(design: QnsDesign, spectrum_values: np.ndarray) -> np.ndarray:
    """chi for every sequence from spectrum values on the design grid (DC included)."""
    return design.regression_matrix @ np.asarray(spectrum_values, dtype=float)


def qns_reconstruct(p_hats: np.ndarray, design: QnsDesign) -> QnsReconstruction:
    """Nonnegative least-squares spectrum on 2 pi j / W, j = 1..W/2.

    DC is carried as a nuisance unknown. Rows with p <= 1/2 have no finite chi and are
    dropped.
    """
    p = np.asarray(p_hats, dtype=float)
    if p.shape != (design.n_sequences,):
        raise InvalidArgumentError("Need one survival probability per sequence",
                                   {'expected': design.n_sequences, 'found': p.shape})
    keep = p > 0.5
    if not np.all(keep):
        logger.warning("Dropping %d QNS rows with p <= 1/2 (saturated decay): %s",
                       int(np.sum(~keep)), np.flatnonzero(~keep).tolist())
    if not np.any(keep):
        raise InvalidArgumentError("Every QNS sequence is saturated; nothing to reconstruct")

    chi = -np.log(2.0 * np.minimum(p[keep], 1.0) - 1.0)
    return qns_reconstruct_chi(chi, design, np.flatnonzero(keep))


def qns_reconstruct_chi(chi: np.ndarray, design: QnsDesign,
                        rows: Optional[np.ndarray] = None) -> QnsReconstruction:
    """NNLS solve of chi = A S for the given sequence rows (all rows by default)."""
    rows = np.arange(design.n_sequences) if rows is None else np.asarray(rows)
    chi = np.asarray(chi, dtype=float)
    if chi.shape != rows.shape:
        raise InvalidArgumentError("Need one chi value per kept row",
                                   {'rows': len(rows), 'chi': chi.shape})
    a = design.regression_matrix[rows]
    solution, residual = optimize.nnls(a, chi)
    singular = np.linalg.svd(a, compute_uv=False)
    rank = int(np.sum(singular > singular[0] * max(a.shape) * np.finfo(float).eps))
    condition = float(singular[0] / singular[rank - 1]) if rank else float('inf')

    spectrum = PowerSpectrum(design.frequencies[1:], solution[1:])
    logger.debug("QNS reconstruction: rank %d, condition %.3e, residual %.3e",
                 rank, condition, residual)
    return QnsReconstruction(spectrum, float(solution[0]), rows, rank,
                             condition, float(residual))


def row_space_projector(design: QnsDesign, rows: Optional[np.ndarray] = None) -> np.ndarray:
    """Orthogonal projector onto the spectrum components the design can identify."""
    a = design.regression_matrix if rows is None else design.regression_matrix[rows]
    _, singular, vt = np.linalg.svd(a)
    rank = int(np.sum(singular > singular[0] * max(a.shape) * np.finfo(float).eps))
    basis = vt[:rank]
    return basis.T @ basis


def passband_relative_error(estimate: PowerSpectrum, truth: PowerSpectrum, band) -> float:
    low, high = band
    mask = (estimate.frequencies >= low) & (estimate.frequencies <= high)
    diff = estimate.values[mask] - truth.values[mask]
    return float(np.linalg.norm(diff) / np.linalg.norm(truth.values[mask]))

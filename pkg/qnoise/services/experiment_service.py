import logging
import os
from typing import Callable, Dict

import numpy as np

from qnoise.config import RunConfig
from qnoise.engine.arma import (
    ArmaModel, default_grid, design_bandlimited_ma, design_multipole_ar, design_one_over_f,
    power_spectrum, white_noise, write_spectrum_csv, write_trajectory_csv,
)
from qnoise.engine.circuit import load_circuit
from qnoise.engine.quantum_core import superoperator_to_csv
from qnoise.engine.schwarma import SchwarmaModel
from qnoise.exceptions import InvalidArgumentError
from qnoise.experiments.decoupling import dd_sweep
from qnoise.experiments.landau_zener import build_setup, lz_experiment
from qnoise.experiments.qns import (
    design_spectrum, qns_build_design, qns_reconstruct, qns_simulate_survivals,
)
from qnoise.experiments.results import (
    FIDELITIES_FILE, RESULTS_FILE, SPECTRUM_FILE, SUPEROPERATOR_FILE, ExperimentResult,
    update_meta, write_fidelities_csv, write_meta, write_superoperator_json,
)
from qnoise.experiments.surface_code import surface_code_sweep
from qnoise.services.monte_carlo_service import monte_carlo_service, substream

logger = logging.getLogger(__name__)

SURVIVALS_FILE = 'survivals.csv'
TRAJECTORY_FILE = 'trajectory.csv'
# one per grid point, in row-major (gamma, tau_c) order
SUPEROPERATOR_CSV = 'superoperator_{}.csv'


def build_arma_model(cfg: RunConfig) -> ArmaModel:
    """The ARMA_* section as a model; band edges are given in units of pi."""
    if cfg.arma_model == 'white':
        model = white_noise()
    elif cfg.arma_model == 'bandlimited':
        if len(cfg.arma_band_pi) != 2:
            raise InvalidArgumentError("ARMA_BAND_PI needs exactly two edges",
                                       {'ARMA_BAND_PI': list(cfg.arma_band_pi)})
        low, high = (np.pi * v for v in cfg.arma_band_pi)
        model = design_bandlimited_ma(cfg.arma_num_taps, low, high)
    elif cfg.arma_model == 'multipole':
        model = design_multipole_ar([np.pi * v for v in cfg.arma_pole_freqs_pi], cfg.arma_pole_radius)
    elif cfg.arma_model == 'one_over_f':
        if len(cfg.arma_one_over_f_band_pi) != 2:
            raise InvalidArgumentError("ARMA_ONE_OVER_F_BAND_PI needs exactly two edges")
        low, high = (np.pi * v for v in cfg.arma_one_over_f_band_pi)
        model = design_one_over_f(cfg.arma_alpha, cfg.arma_sections, (low, high))
    else:
        raise InvalidArgumentError(f"Unknown ARMA model '{cfg.arma_model}'")
    if cfg.arma_burn_in > 0:
        model.burn_in = cfg.arma_burn_in
    return model


class ExperimentService:
    """Runs one experiment per RunConfig and writes its files under the output directory."""

    def __init__(self):
        self.app = None
        self._runners: Dict[str, Callable[[RunConfig], ExperimentResult]] = {
            'spectrum': self.run_spectrum,
            'qns': self.run_qns,
            'dd': self.run_dd,
            'surface': self.run_surface,
            'lz': self.run_lz,
        }

    def init_app(self, app):
        """Initialize the experiment service with Flask app"""
        self.app = app
        logger.info("🧪 Experiment service initialized")

    def run(self, kind: str, cfg: RunConfig) -> ExperimentResult:
        if kind not in self._runners:
            raise InvalidArgumentError(f"Unknown experiment '{kind}'", {'options': sorted(self._runners)})
        cfg = cfg.validate()
        os.makedirs(cfg.run_out, exist_ok=True)
        write_meta(cfg.run_out, cfg.to_dict(), cfg.run_seed, {'experiment': kind})
        monte_carlo_service.configure(cfg.run_threads)

        logger.info(f"▶️ Running {kind} (seed {cfg.run_seed}, samples {cfg.run_samples})")
        result = self._runners[kind](cfg)
        result.write_csv(os.path.join(cfg.run_out, RESULTS_FILE))
        summary = {k: v for k, v in result.summary.items() if _is_plain(v)}
        update_meta(cfg.run_out, summary=summary, rows=len(result.rows))
        logger.info(f"✅ {kind} finished; outputs in {cfg.run_out}")
        return result

    def run_spectrum(self, cfg: RunConfig) -> ExperimentResult:
        model = build_arma_model(cfg)
        spectrum = power_spectrum(model, default_grid(cfg.spectrum_grid_size))
        write_spectrum_csv(os.path.join(cfg.run_out, SPECTRUM_FILE), spectrum)
        if cfg.spectrum_trajectory_length > 0:
            trajectory = model.generate(cfg.spectrum_trajectory_length, substream(cfg.run_seed, 0),
                                        cfg.arma_noise_scale)
            write_trajectory_csv(os.path.join(cfg.run_out, TRAJECTORY_FILE), trajectory)

        result = ExperimentResult('spectrum', ['model', 'omega'])
        for omega, value in zip(spectrum.frequencies, spectrum.values):
            result.add('power', value, model=cfg.arma_model, omega=omega)
        result.summary.update(p=model.p, q=model.q, burn_in=model.burn_in)
        return result

    def run_qns(self, cfg: RunConfig) -> ExperimentResult:
        model = build_arma_model(cfg)
        design = qns_build_design(cfg.qns_w)
        survivals = qns_simulate_survivals(design, SchwarmaModel.z_dephasing(model), cfg.run_samples,
                                           cfg.run_seed, cfg.arma_noise_scale)
        survival_table = ExperimentResult('qns_survivals', ['sequence'])
        for k, (p, err) in enumerate(zip(survivals.p_hat, survivals.stderr), start=1):
            survival_table.add('survival', p, err, sequence=k)
        survival_table.write_csv(os.path.join(cfg.run_out, SURVIVALS_FILE))

        reconstruction = qns_reconstruct(survivals.p_hat, design)
        write_spectrum_csv(os.path.join(cfg.run_out, SPECTRUM_FILE), reconstruction.spectrum)
        truth = design_spectrum(design, model, cfg.arma_noise_scale)

        result = ExperimentResult('qns', ['j', 'omega'])
        for j, omega in enumerate(reconstruction.spectrum.frequencies, start=1):
            result.add('estimate', reconstruction.spectrum.values[j - 1], j=j, omega=omega)
            result.add('true', truth.values[j], j=j, omega=omega)
        result.summary.update(rank=reconstruction.rank, condition_number=reconstruction.condition_number,
                              residual=reconstruction.residual, dc=reconstruction.dc,
                              dropped_rows=design.n_sequences - len(reconstruction.kept_rows))
        return result

    def run_dd(self, cfg: RunConfig) -> ExperimentResult:
        return dd_sweep(cfg.dd_protocols, cfg.dd_periods, cfg.dd_noise, cfg.run_samples,
                        cfg.run_seed, cfg.dd_tau_c, cfg.dd_variance)

    def run_surface(self, cfg: RunConfig) -> ExperimentResult:
        circuit = load_circuit(cfg.surface_circuit) if cfg.surface_circuit else None
        result = surface_code_sweep(cfg.surface_gammas, cfg.surface_tau_cs, cfg.run_samples,
                                    cfg.run_seed, cfg.surface_check, cfg.surface_steps_per_gate,
                                    circuit=circuit)
        points = result.summary['points']
        labels = [{'gamma': p.gamma, 'tau_c': p.tau_c} for p in points]
        write_fidelities_csv(os.path.join(cfg.run_out, FIDELITIES_FILE),
                             [(label, p.schwarma_fidelities) for label, p in zip(labels, points)])
        if not cfg.surface_circuit:
            return result
        # mean channels for circuit files only; a 5-qubit check is 1024x1024 per point
        noise = {'family': 'hamiltonian_xyz', 'kernel': 'gaussian',
                 'steps_per_gate': cfg.surface_steps_per_gate, 'circuit': cfg.surface_circuit}
        write_superoperator_json(os.path.join(cfg.run_out, SUPEROPERATOR_FILE),
                                 [(label, p.schwarma_mean) for label, p in zip(labels, points)],
                                 cfg.run_seed, cfg.run_samples, noise)
        for index, point in enumerate(points):
            superoperator_to_csv(os.path.join(cfg.run_out, SUPEROPERATOR_CSV.format(index)),
                                 point.schwarma_mean)
        return result

    def run_lz(self, cfg: RunConfig) -> ExperimentResult:
        setup = build_setup(cfg.lz_spin, cfg.lz_delta, cfg.lz_alpha, cfg.lz_t0, cfg.lz_tau0,
                            cfg.lz_f0_ratio, cfg.lz_dt, cfg.lz_kappa)
        return lz_experiment(setup, cfg.run_samples, cfg.run_seed)


def _is_plain(value) -> bool:
    return value is None or isinstance(value, (bool, int, float, str))


# Global instance
experiment_service = ExperimentService()

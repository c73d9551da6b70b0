import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Dict, List

import numpy as np
from scipy import signal

from qnoise.config import ExperimentConfig, RunConfig
from qnoise.engine.arma import (
    ArmaModel, PowerSpectrum, SpectrumFn, convert_timescale, fit_ma_to_autocovariance,
    integrated_variance, periodogram_relative_error, power_spectrum, white_noise,
)
from qnoise.engine.circuit import (
    Gate, QuantumCircuit, ancilla_one_probability, basis_state, build_x_check,
    build_z_check, cnot_matrix, compile_cnot, ideal_unitary, monte_carlo_average, product_state,
)
from qnoise.engine.quantum_core import (
    IDENTITY, PAULIS, SIGMA_Z, compose, is_cptp, kraus_to_superoperator, random_unitary,
)
from qnoise.engine.schwarma import (
    SchwarmaModel, TangentVector, amplitude_damping_step, lindblad_dephasing_step,
    lindblad_depolarizing_step, lindblad_gap, lindblad_liouvillian_step, multiaxis_step,
    stiefel_exp, z_dephasing_step,
)
from qnoise.exceptions import InvalidArgumentError
from qnoise.experiments.decoupling import dd_experiment
from qnoise.experiments.landau_zener import (
    build_setup, lz_experiment, single_trajectory_residuals, transition_probability,
)
from qnoise.experiments.qns import (
    design_spectrum, qns_build_design, qns_forward, qns_reconstruct, qns_reconstruct_chi,
    qns_simulate_survivals, row_space_projector,
)
from qnoise.experiments.results import ExperimentResult
from qnoise.experiments.statistics import (
    analytic_dephasing_fidelity, f_test_sample_size, gaussian_kernel_autocovariance,
    gaussian_kernel_ma, simulate_variance_ratio_rejection,
)
from qnoise.experiments.surface_code import surface_code_sweep
from qnoise.services.experiment_service import build_arma_model
from qnoise.services.monte_carlo_service import derive_seed, monte_carlo_service, substream

logger = logging.getLogger(__name__)

# per-level sizes; 'full' runs at acceptance scale
LEVELS: Dict[str, Dict[str, float]] = {
    'quick': {
        'cptp_draws': 100, 'periodogram_samples': 2 ** 18, 'nperseg': 256,
        'periodogram_tol': 0.10, 'timescale_sums': 2000, 'oracle_trials': 2000,
        'qns_w': 32, 'dd_samples': 200, 'surface_samples': 100, 'lz_samples': 50,
    },
    'full': {
        'cptp_draws': 1000, 'periodogram_samples': 10 ** 6, 'nperseg': 1024,
        'periodogram_tol': 0.05, 'timescale_sums': 10000, 'oracle_trials': 10000,
        'qns_w': 128, 'dd_samples': 1000, 'surface_samples': 1000, 'lz_samples': 1000,
    },
}
SIGMA_BOUND = 4.0


@dataclass
class CheckResult:
    name: str
    passed: bool
    residual: float
    threshold: float
    detail: str = ''

    def line(self) -> str:
        status = 'PASS' if self.passed else 'FAIL'
        text = f"[{status}] {self.name}: residual={self.residual:.3e} threshold={self.threshold:.3e}"
        return f"{text} ({self.detail})" if self.detail else text


@dataclass
class ValidationReport:
    level: str
    checks: List[CheckResult] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def failures(self) -> List[CheckResult]:
        return [c for c in self.checks if not c.passed]

    def to_result(self) -> ExperimentResult:
        """Residual and threshold of every check as a results table."""
        result = ExperimentResult('validation', ['check', 'passed'])
        for check in self.checks:
            result.add('residual', check.residual, check=check.name, passed=check.passed)
            result.add('threshold', check.threshold, check=check.name, passed=check.passed)
        return result


def _check(name: str, residual: float, threshold: float, detail: str = '') -> CheckResult:
    residual = float(residual)
    return CheckResult(name, bool(np.isfinite(residual) and residual <= threshold), residual,
                       float(threshold), detail)


def periodogram_models() -> Dict[str, ArmaModel]:
    """White, 128-tap band-limited, 3-pole and 1/f (alpha 1 and 2) reference models."""
    base = RunConfig()
    return {
        'white': white_noise(),
        'bandlimited': build_arma_model(base.with_overrides(arma_model='bandlimited')),
        'multipole': build_arma_model(base.with_overrides(arma_model='multipole')),
        'one_over_f_1': build_arma_model(base.with_overrides(arma_model='one_over_f', arma_alpha=1.0)),
        'one_over_f_2': build_arma_model(base.with_overrides(arma_model='one_over_f', arma_alpha=2.0)),
    }


def flipped_ar_spectrum(model: ArmaModel, grid: np.ndarray) -> PowerSpectrum:
    """Spectrum with the AR sign convention inverted; a deliberate fault for self-tests."""
    grid = np.asarray(grid, dtype=float)
    if model.sections is not None:
        flipped = model.sections.copy()
        flipped[:, 4:] *= -1.0
        _, h = signal.sosfreqz(flipped, worN=grid)
        return PowerSpectrum(grid, np.abs(h) ** 2)
    _, h = signal.freqz(model.ma_coeffs, np.concatenate([[1.0], model.ar_coeffs]), worN=grid)
    return PowerSpectrum(grid, np.abs(h) ** 2)


class ValidationService:
    """Cross-module invariant suite behind the ``validate`` command."""

    def __init__(self):
        self.app = None

    def init_app(self, app):
        """Initialize the validation service with Flask app"""
        self.app = app
        logger.info("🩺 Validation service initialized")

    def run(self, level: str = 'quick', seed: int = ExperimentConfig.DEFAULT_SEED,
            spectrum_fn: SpectrumFn = power_spectrum) -> ValidationReport:
        if level not in LEVELS:
            raise InvalidArgumentError(f"Unknown validation level '{level}'", {'options': sorted(LEVELS)})
        sizes = LEVELS[level]
        report = ValidationReport(level)
        suites: Dict[str, Callable[[], List[CheckResult]]] = {
            'cptp': lambda: self.check_cptp(int(sizes['cptp_draws']), seed),
            'periodogram': lambda: self.check_periodograms(sizes, seed, spectrum_fn),
            'one_over_f': lambda: self.check_one_over_f_slopes(),
            'timescale': lambda: self.check_timescale(int(sizes['timescale_sums']), seed),
            'fit_ma': lambda: self.check_ma_fit(),
            'stiefel': lambda: self.check_stiefel(seed),
            'liouvillian': lambda: self.check_liouvillian(),
            'circuit': lambda: self.check_circuits(),
            'oracle': lambda: self.check_dephasing_oracle(int(sizes['oracle_trials']), seed),
            'qns': lambda: self.check_qns(level, int(sizes['qns_w']), seed),
            'dd': lambda: self.check_decoupling(int(sizes['dd_samples']), seed),
            'f_test': lambda: self.check_f_test(seed),
            'trotter': lambda: self.check_trotter(level, int(sizes['surface_samples']), seed),
            'lz': lambda: self.check_landau_zener(level, int(sizes['lz_samples']), seed),
        }
        for name, suite in suites.items():
            try:
                checks = suite()
            except Exception as e:
                # a crashing suite fails its row; the remaining suites still run
                logger.error(f"❌ Validation suite '{name}' raised: {e}")
                checks = [CheckResult(f'suite.{name}', False, float('inf'), 0.0,
                                      f'{type(e).__name__}: {e}')]
            for check in checks:
                logger.info(check.line())
                report.checks.append(check)
        logger.info(f"🩺 Validation ({level}): {len(report.checks) - len(report.failures)}"
                    f"/{len(report.checks)} checks passed")
        return report

    def check_cptp(self, draws: int, seed: int) -> List[CheckResult]:
        rng = substream(seed, 1)
        families = {
            'z_dephasing': lambda: z_dephasing_step(rng.normal()),
            'multiaxis': lambda: multiaxis_step(*rng.normal(size=3)),
            'amplitude_damping': lambda: amplitude_damping_step(
                complex(rng.uniform(0, np.pi / 2)) * np.exp(1j * rng.uniform(0, 2 * np.pi))),
            'lindblad_depolarizing': lambda: lindblad_depolarizing_step(
                *(rng.normal(size=3) + 1j * rng.normal(size=3))),
        }
        results = []
        for name, draw in families.items():
            worst_choi, worst_tp = 0.0, 0.0
            for _ in range(draws):
                _, metrics = is_cptp(kraus_to_superoperator(draw()))
                worst_choi = max(worst_choi, -metrics['min_choi_eigenvalue'])
                worst_tp = max(worst_tp, metrics['tp_residual'])
            results.append(_check(f'cptp.{name}.choi', worst_choi, ExperimentConfig.CHOI_PSD_TOL,
                                  f'{draws} draws'))
            results.append(_check(f'cptp.{name}.trace', worst_tp, ExperimentConfig.TP_TOL))
        return results

    def check_periodograms(self, sizes, seed: int, spectrum_fn: SpectrumFn) -> List[CheckResult]:
        results = []
        for index, (name, model) in enumerate(periodogram_models().items()):
            error = periodogram_relative_error(model, int(sizes['periodogram_samples']),
                                               substream(seed, 2, index), int(sizes['nperseg']),
                                               spectrum_fn)
            results.append(_check(f'periodogram.{name}', error, sizes['periodogram_tol'],
                                  f"{int(sizes['periodogram_samples'])} samples"))
        return results

    def check_one_over_f_slopes(self) -> List[CheckResult]:
        results = []
        base = RunConfig().with_overrides(arma_model='one_over_f')
        f_min, f_max = (np.pi * v for v in base.arma_one_over_f_band_pi)
        grid = np.geomspace(2.0 * f_min, 0.5 * f_max, 200)
        for alpha in (1.0, 2.0):
            model = build_arma_model(base.with_overrides(arma_alpha=alpha))
            values = power_spectrum(model, grid).values
            slope = np.polyfit(np.log(grid), np.log(values), 1)[0]
            results.append(_check(f'one_over_f.slope_alpha_{alpha:g}', abs(slope + alpha), 0.15,
                                  f'slope {slope:.3f}'))
        return results

    def check_timescale(self, n_sums: int, seed: int) -> List[CheckResult]:
        T, n_slow = 10, 6
        white = convert_timescale(np.eye(1, T * n_slow).ravel(), T, n_slow).values
        correlated = convert_timescale(np.ones(T * n_slow), T, n_slow).values
        expected_white = np.zeros(n_slow)
        expected_white[0] = T
        results = [
            _check('timescale.white', np.max(np.abs(white - expected_white)), 1e-10),
            _check('timescale.correlated', np.max(np.abs(correlated - T * T)), 1e-8),
        ]
        fast = gaussian_kernel_autocovariance(1.0, 2.0)
        model = fit_ma_to_autocovariance(fast)
        r_slow = convert_timescale(fast.values.tolist() + [0.0] * T * n_slow, T, n_slow).values
        sums = model.generate_batch(n_sums, T, substream(seed, 3)).sum(axis=1)
        variance = np.var(sums, ddof=1)
        se = r_slow[0] * math.sqrt(2.0 / (n_sums - 1))
        results.append(_check('timescale.sum_variance', abs(variance - r_slow[0]) / se, SIGMA_BOUND,
                              f'{n_sums} sums, r_s[0]={r_slow[0]:.4f}'))
        return results

    def check_ma_fit(self) -> List[CheckResult]:
        target = gaussian_kernel_autocovariance(1.0, 3.0).values
        taps = fit_ma_to_autocovariance(target).ma_coeffs
        order = len(target) - 1
        products = np.array([np.dot(taps[:order + 1 - k], taps[k:]) for k in range(order + 1)])
        return [_check('fit_ma.round_trip', np.max(np.abs(products - target)), 1e-8,
                       f'order {order}')]

    def check_stiefel(self, seed: int) -> List[CheckResult]:
        rng = substream(seed, 4)
        worst = 0.0
        for _ in range(50):
            h = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
            blocks = [rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2)) for _ in range(2)]
            a = 0.5 * (h - h.conj().T)
            x = TangentVector(a, np.vstack(blocks), 3)
            columns = stiefel_exp(random_unitary(2, rng), x).matrix
            worst = max(worst, np.max(np.abs(columns.conj().T @ columns - IDENTITY)))
        return [_check('stiefel.orthonormal', worst, ExperimentConfig.ORTHONORMAL_TOL, '50 tangents')]

    def check_liouvillian(self) -> List[CheckResult]:
        h = 0.3 * PAULIS[0] + 0.1 * SIGMA_Z
        ops = [np.array([[0, 1], [0, 0]], dtype=complex), SIGMA_Z]
        step = lindblad_liouvillian_step(h, ops, [0.05, 0.02])
        double = lindblad_liouvillian_step(2 * h, ops, [0.1, 0.04])
        ok, metrics = is_cptp(step)
        return [
            _check('liouvillian.semigroup', np.max(np.abs(compose(step, step).data - double.data)), 1e-10),
            _check('liouvillian.cptp', 0.0 if ok else max(-metrics['min_choi_eigenvalue'],
                                                          metrics['tp_residual']), 0.0),
        ] + self.check_lindblad_orders()

    def check_lindblad_orders(self) -> List[CheckResult]:
        """SchWARMA dissipative steps against exact Lindblad steps at matching rates."""
        y, rate = 0.05, 1e-3
        lowering = np.array([[0, 1], [0, 0]], dtype=complex)
        damping = lindblad_gap(amplitude_damping_step(y), [lowering], [y ** 2])
        dephasing = lindblad_gap(lindblad_dephasing_step(y), [SIGMA_Z], [y ** 2])
        root = math.sqrt(rate)
        depolarizing = lindblad_gap(lindblad_depolarizing_step(root, root, root), PAULIS, [rate] * 3)
        coherence = lindblad_liouvillian_step(np.zeros((2, 2)), [SIGMA_Z], [rate]).data
        expected = np.diag([1.0, math.exp(-2 * rate), math.exp(-2 * rate), 1.0])
        return [
            # relative distance from the leading-order gap
            _check('liouvillian.amplitude_damping_order', abs(damping / (y ** 4 / 6) - 1), 0.05,
                   f'gap {damping:.3e} at y={y}'),
            _check('liouvillian.dephasing_order', abs(dephasing / (4 * y ** 4 / 3) - 1), 0.05,
                   f'gap {dephasing:.3e} at y={y}'),
            _check('liouvillian.depolarizing_order', abs(depolarizing / (4 * rate ** 2) - 1), 0.05,
                   f'gap {depolarizing:.3e} at rate={rate}'),
            _check('liouvillian.z_coherence_decay', np.max(np.abs(coherence - expected)), 1e-12),
        ]

    def check_circuits(self) -> List[CheckResult]:
        cnot = QuantumCircuit(2, tuple(compile_cnot(0, 1)))
        u = ideal_unitary(cnot)
        cnot_error = 1.0 - abs(np.vdot(cnot_matrix(), u)) / 4.0

        z_check, x_check = build_z_check(), build_x_check()
        z_error, x_error = 0.0, 0.0
        plus = np.array([1, 1]) / np.sqrt(2)
        minus = np.array([1, -1]) / np.sqrt(2)
        for code in range(16):
            bits = [(code >> (3 - i)) & 1 for i in range(4)]
            p = ancilla_one_probability(z_check, basis_state([0] + bits))
            z_error = max(z_error, abs(p - sum(bits) % 2))
            state = product_state([np.array([1, 0])] + [minus if b else plus for b in bits])
            p = ancilla_one_probability(x_check, state)
            x_error = max(x_error, abs(p - sum(bits) % 2))
        return [
            _check('circuit.cnot_compilation', cnot_error, 1e-12),
            _check('circuit.z_check_parity', z_error, 1e-12),
            _check('circuit.x_check_parity', x_error, 1e-12),
        ]

    def check_dephasing_oracle(self, trials: int, seed: int) -> List[CheckResult]:
        depth = 64
        idle = QuantumCircuit(1, tuple((Gate('I', (0,)),) for _ in range(depth)))
        per_step = 0.1 / depth
        cases = {
            'white': (ArmaModel((), [math.sqrt(per_step)]), [per_step]),
            'tau_c_3': (gaussian_kernel_ma(per_step, 3.0),
                        gaussian_kernel_autocovariance(per_step, 3.0).values),
        }
        results = []
        for index, (name, (model, r)) in enumerate(cases.items()):
            expected = analytic_dephasing_fidelity(integrated_variance(r, depth), IDENTITY)
            mc = monte_carlo_average(idle, [SchwarmaModel.z_dephasing(model)], trials,
                                     derive_seed(seed, 5, index))
            z = abs(mc.mean_fidelity - expected) / max(mc.fidelity_stderr, 1e-15)
            results.append(_check(f'oracle.dephasing_{name}', z, SIGMA_BOUND,
                                  f'mc={mc.mean_fidelity:.6f} closed={expected:.6f}'))
        return results

    def check_qns(self, level: str, W: int, seed: int) -> List[CheckResult]:
        design = qns_build_design(W)
        cfg = RunConfig()
        model = build_arma_model(cfg)
        truth = design_spectrum(design, model, cfg.arma_noise_scale)
        projector = row_space_projector(design)
        chi = qns_forward(design, truth.values)
        estimate = qns_reconstruct_chi(chi, design)
        full = np.concatenate([[estimate.dc], estimate.spectrum.values])
        error = np.linalg.norm(projector @ (full - truth.values)) / np.linalg.norm(projector @ truth.values)
        results = [_check('qns.noiseless_round_trip', error, 1e-6, f'rank {estimate.rank}')]
        if level == 'full':
            survivals = qns_simulate_survivals(design, SchwarmaModel.z_dephasing(model), 1000,
                                               seed, cfg.arma_noise_scale)
            noisy = qns_reconstruct(survivals.p_hat, design)
            rows = noisy.kept_rows
            projector = row_space_projector(design, rows)
            full = np.concatenate([[noisy.dc], noisy.spectrum.values])
            low, high = (np.pi * v for v in cfg.arma_band_pi)
            band = (design.frequencies > low) & (design.frequencies < high)
            diff = (projector @ (full - truth.values))[band]
            reference = (projector @ truth.values)[band]
            results.append(_check('qns.end_to_end_passband',
                                  np.linalg.norm(diff) / np.linalg.norm(reference), 0.2,
                                  '1000 trajectories'))
        return results

    def check_decoupling(self, samples: int, seed: int) -> List[CheckResult]:
        static = dd_experiment('XX', 4, 'static', n_samples=samples, seed=seed, variance=0.05)
        fidelities = static.values('fidelity')
        refocus = np.max(np.abs(1.0 - fidelities[1::2]))

        model = gaussian_kernel_ma(1e-3, 3.0)
        runs = {p: dd_experiment(p, 8, 'multiaxis', model, samples, seed) for p in ('free', 'XX', 'XY4')}
        margin = np.inf
        for better, worse in (('XY4', 'XX'), ('XX', 'free')):
            diff = runs[better].values('fidelity') - runs[worse].values('fidelity')
            se = np.hypot(runs[better].stderrs('fidelity'), runs[worse].stderrs('fidelity'))
            margin = min(margin, np.min((diff + SIGMA_BOUND * se)[4:]))

        damping = {p: dd_experiment(p, 8, 'amplitude_damping', model, samples, seed)
                   for p in ('free', 'XX')}
        diff = damping['XX'].values('unitality') - damping['free'].values('unitality')
        se = np.hypot(damping['XX'].stderrs('unitality'), damping['free'].stderrs('unitality'))
        damping_margin = np.min(diff + SIGMA_BOUND * se)
        return [
            _check('dd.static_xx_refocus', refocus, 1e-10),
            _check('dd.fidelity_ordering', max(0.0, -margin), 0.0, f'min margin {margin:.3e}'),
            _check('dd.unitality_xx_vs_free', max(0.0, -damping_margin), 0.0,
                   f'min margin {damping_margin:.3e}'),
        ]

    def check_f_test(self, seed: int) -> List[CheckResult]:
        errors = np.logspace(-3, -1, 9)
        sizes = np.array([f_test_sample_size(e) for e in errors])
        slope = np.polyfit(np.log(errors), np.log(sizes), 1)[0]
        anchor = f_test_sample_size(0.025)
        results = [
            _check('f_test.slope', abs(slope + 2.0), 0.1, f'slope {slope:.3f}'),
            _check('f_test.anchor', abs(anchor - 17500) / 17500, 0.1, f'N(0.025)={anchor}'),
        ]
        trials = 4000
        for index, n in enumerate((10, 100)):
            rate = simulate_variance_ratio_rejection(n, substream(seed, 6, index), n_trials=trials)
            se = math.sqrt(0.05 * 0.95 / trials)
            results.append(_check(f'f_test.type_one_rate_n{n}', abs(rate - 0.05) / se, SIGMA_BOUND,
                                  f'rate {rate:.4f}'))
        return results

    def check_trotter(self, level: str, samples: int, seed: int) -> List[CheckResult]:
        if level == 'full':
            gammas, tau_cs = (1e-6, 1e-4), (1.0, 32.0)
        else:
            gammas, tau_cs = (1e-4,), (32.0,)
        sweep = surface_code_sweep(gammas, tau_cs, samples, seed, service=monte_carlo_service)
        z = max(p.abs_error / max(p.pooled_stderr, 1e-15) for p in sweep.summary['points'])
        results = [_check('trotter.cross_validation', z, SIGMA_BOUND, f'{samples} trials per point')]
        coefficient = sweep.summary['fit_coefficient']
        if level == 'full':
            ratio = abs(math.log10(coefficient) + 1.5) if coefficient else np.inf
            results.append(_check('trotter.error_fit_intercept', ratio, math.log10(3.0),
                                  f'coefficient {coefficient}'))
        return results

    def check_landau_zener(self, level: str, samples: int, seed: int) -> List[CheckResult]:
        t0 = 60.0 if level == 'full' else 10.0
        result = lz_experiment(build_setup(t0=t0), samples, seed)
        p_trotter, se_trotter = transition_probability(result, 'trotter')
        p_schwarma, se_schwarma = transition_probability(result, 'schwarma')
        pooled = max(math.hypot(se_trotter, se_schwarma), 1e-12)
        results = [_check('lz.transition_probability', abs(p_trotter - p_schwarma) / pooled,
                          SIGMA_BOUND, f'trotter={p_trotter:.5f} schwarma={p_schwarma:.5f}')]
        gaps = single_trajectory_residuals(build_setup(t0=10.0, dt=0.1, kappa=10), seed)
        for method, gap in gaps.items():
            results.append(_check(f'lz.batched_matches_single.{method}', gap, 1e-10))
        if level == 'full':
            speedup = result.summary['speedup']
            results.append(_check('lz.speedup', 50.0 / speedup, 1.0, f'{speedup:.0f}x'))
        return results


# Global instance
validation_service = ValidationService()

# Simulator configuration
import os
import re
from dataclasses import dataclass, field, fields, asdict, replace
from typing import Any, Dict, Optional, Tuple, get_type_hints

from dotenv import load_dotenv, dotenv_values

from qnoise.exceptions import ConfigError

load_dotenv()


class Config:
    # Worker threads for Monte Carlo trials (0 = all available cores)
    QNOISE_THREADS = int(os.environ.get('QNOISE_THREADS') or 0)

    # Where experiment outputs land unless --out is given
    QNOISE_OUTPUT_DIR = os.environ.get('QNOISE_OUTPUT_DIR') or 'results'

    # Master seed used when neither the run file nor --seed sets one
    QNOISE_SEED = int(os.environ.get('QNOISE_SEED') or 12345)

    LOG_LEVEL = os.environ.get('LOG_LEVEL') or 'INFO'


# Experiment Configuration Constants
class ExperimentConfig:
    # ARMA defaults
    DEFAULT_BURN_IN_FLOOR = 64
    BURN_IN_PER_COEFFICIENT = 10
    DEFAULT_POLE_RADIUS = 0.99
    DEFAULT_GRID_SIZE = 1024
    DEFAULT_NUM_TAPS = 128
    DEFAULT_ONE_OVER_F_SECTIONS = 12
    MA_FIT_FFT_FACTOR = 64

    # Numerical tolerances
    HERMITIAN_TOL = 1e-12
    TRACE_TOL = 1e-10
    TP_TOL = 1e-10
    CHOI_PSD_TOL = 1e-8
    ORTHONORMAL_TOL = 1e-10
    SKEW_TOL = 1e-12
    FIDELITY_IMAG_TOL = 1e-8
    TOEPLITZ_PSD_TOL = 1e-8

    # Monte Carlo and simulation defaults
    DEFAULT_SEED = 12345
    DEFAULT_SAMPLES = 1000
    DEFAULT_STEPS_PER_GATE = 100
    FULL_STEPS_PER_GATE = 1000
    DEFAULT_TROTTER_RATIO = 100
    TRIAL_BATCH_PER_THREAD = 4

    # Limits
    MIN_QNS_W = 4
    MAX_QUBITS = 5

    # Valid Options
    EXPERIMENT_KINDS = ['qns', 'dd', 'surface', 'lz', 'spectrum', 'validate']
    ARMA_MODELS = ['white', 'bandlimited', 'multipole', 'one_over_f']
    DD_PROTOCOLS = ['free', 'XX', 'XY4']
    DD_NOISE_KINDS = ['multiaxis', 'amplitude_damping', 'static']
    SURFACE_CHECKS = ['X', 'Z']
    LZ_SPINS = ['half', 'one']
    VALIDATE_LEVELS = ['quick', 'full']


@dataclass(frozen=True)
class RunConfig:
    """Every parameter an experiment run reads.

    File keys are the upper-cased field names, so the prefix is the section:
    ``ARMA_MODEL=multipole``, ``QNS_W=128``, ``SURFACE_GAMMAS=1e-6,1e-4``.
    Frequencies ending in ``_PI`` are given in units of pi.
    """

    run_experiment: str = ''
    run_seed: int = ExperimentConfig.DEFAULT_SEED
    run_samples: int = ExperimentConfig.DEFAULT_SAMPLES
    run_out: str = 'results'
    run_threads: int = 0

    arma_model: str = 'bandlimited'
    arma_num_taps: int = ExperimentConfig.DEFAULT_NUM_TAPS
    arma_band_pi: Tuple[float, ...] = (0.0, 0.25)
    arma_pole_freqs_pi: Tuple[float, ...] = (0.2, 0.4, 0.6)
    arma_pole_radius: float = ExperimentConfig.DEFAULT_POLE_RADIUS
    arma_alpha: float = 1.0
    arma_sections: int = ExperimentConfig.DEFAULT_ONE_OVER_F_SECTIONS
    arma_one_over_f_band_pi: Tuple[float, ...] = (0.001, 0.5)
    arma_noise_scale: float = 0.02
    arma_burn_in: int = 0

    spectrum_grid_size: int = ExperimentConfig.DEFAULT_GRID_SIZE
    spectrum_trajectory_length: int = 0

    qns_w: int = 128

    dd_protocols: Tuple[str, ...] = ('free', 'XX', 'XY4')
    dd_periods: int = 16
    dd_noise: str = 'multiaxis'
    dd_tau_c: float = 3.0
    dd_variance: float = 1e-3

    surface_gammas: Tuple[float, ...] = (1e-6, 1e-4)
    surface_tau_cs: Tuple[float, ...] = (1.0, 32.0)
    surface_check: str = 'Z'
    surface_steps_per_gate: int = ExperimentConfig.DEFAULT_STEPS_PER_GATE
    surface_circuit: str = ''

    lz_spin: str = 'half'
    lz_delta: float = 0.5
    lz_alpha: float = 1.0
    lz_t0: float = 60.0
    lz_tau0: float = 10.0
    lz_f0_ratio: float = 0.003
    lz_dt: float = 0.01
    lz_kappa: int = ExperimentConfig.DEFAULT_TROTTER_RATIO

    validate_level: str = 'quick'

    @classmethod
    def from_file(cls, path: str, base: Optional['RunConfig'] = None, **overrides) -> 'RunConfig':
        """Parse a KEY=VALUE run file over ``base``; unknown keys and malformed lines are errors."""
        if not os.path.exists(path):
            raise ConfigError(f"Config file not found: {path}")
        with open(path, 'r', encoding='utf-8') as f:
            lines = f.read().splitlines()
        _check_lines(lines)

        values = dotenv_values(path)
        known = {f.name for f in fields(cls)}
        hints = get_type_hints(cls)
        parsed: Dict[str, Any] = {}
        for key, raw in values.items():
            name = key.lower()
            if name not in known:
                raise ConfigError(f"Unknown config key '{key}'", key=key, line=_line_of(lines, key))
            if raw is None:
                raise ConfigError(f"Missing value for '{key}'", key=key, line=_line_of(lines, key))
            try:
                parsed[name] = _coerce(raw, hints[name])
            except ValueError as e:
                raise ConfigError(f"Bad value for '{key}': {e}", key=key, line=_line_of(lines, key))
        return (base or cls()).with_overrides(**parsed).with_overrides(**overrides)

    def with_overrides(self, **overrides) -> 'RunConfig':
        """Apply CLI flag values; ``None`` means the flag was not given."""
        known = {f.name for f in fields(self)}
        changes = {}
        for name, value in overrides.items():
            if value is None:
                continue
            if name not in known:
                raise ConfigError(f"Unknown config key '{name.upper()}'", key=name.upper())
            changes[name] = value
        return replace(self, **changes) if changes else self

    def to_dict(self) -> Dict[str, Any]:
        out = asdict(self)
        for name, value in out.items():
            if isinstance(value, tuple):
                out[name] = list(value)
        return out

    def validate(self) -> 'RunConfig':
        """Range checks for fields every experiment relies on."""
        if self.run_samples < 1:
            raise ConfigError("RUN_SAMPLES must be >= 1", key='RUN_SAMPLES')
        if self.run_threads < 0:
            raise ConfigError("RUN_THREADS must be >= 0", key='RUN_THREADS')
        if self.run_seed < 0:
            raise ConfigError("RUN_SEED must be a non-negative integer", key='RUN_SEED')
        _check_choice('ARMA_MODEL', self.arma_model, ExperimentConfig.ARMA_MODELS)
        _check_choice('DD_NOISE', self.dd_noise, ExperimentConfig.DD_NOISE_KINDS)
        _check_choice('SURFACE_CHECK', self.surface_check, ExperimentConfig.SURFACE_CHECKS)
        _check_choice('LZ_SPIN', self.lz_spin, ExperimentConfig.LZ_SPINS)
        _check_choice('VALIDATE_LEVEL', self.validate_level, ExperimentConfig.VALIDATE_LEVELS)
        for protocol in self.dd_protocols:
            _check_choice('DD_PROTOCOLS', protocol, ExperimentConfig.DD_PROTOCOLS)
        if self.qns_w < ExperimentConfig.MIN_QNS_W or self.qns_w % 2:
            raise ConfigError("QNS_W must be even and >= 4", key='QNS_W')
        if self.lz_kappa < 1:
            raise ConfigError("LZ_KAPPA must be >= 1", key='LZ_KAPPA')
        if self.surface_steps_per_gate < 1:
            raise ConfigError("SURFACE_STEPS_PER_GATE must be >= 1", key='SURFACE_STEPS_PER_GATE')
        if self.surface_circuit and not os.path.isfile(self.surface_circuit):
            raise ConfigError(f"SURFACE_CIRCUIT file not found: {self.surface_circuit}",
                              key='SURFACE_CIRCUIT')
        return self


_LINE_PATTERN = re.compile(r'^\s*(export\s+)?[A-Za-z_][A-Za-z0-9_]*\s*=')


def _check_lines(lines):
    for number, line in enumerate(lines, start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith('#'):
            continue
        if not _LINE_PATTERN.match(line):
            raise ConfigError(f"Malformed config line {number}: {stripped!r}", line=number)


def _line_of(lines, key: str) -> Optional[int]:
    pattern = re.compile(r'^\s*(export\s+)?' + re.escape(key) + r'\s*=')
    for number, line in enumerate(lines, start=1):
        if pattern.match(line):
            return number
    return None


def _coerce(raw: str, kind):
    text = raw.strip()
    if kind is int:
        return int(text)
    if kind is float:
        return float(text)
    if kind is str:
        return text
    if kind == Tuple[float, ...]:
        return tuple(float(v) for v in text.split(',') if v.strip())
    if kind == Tuple[str, ...]:
        return tuple(v.strip() for v in text.split(',') if v.strip())
    raise ValueError(f"unsupported field type {kind}")


def _check_choice(key: str, value: str, options):
    if value not in options:
        raise ConfigError(f"{key} must be one of {options}, got '{value}'", key=key)


class DevelopmentConfig(Config):
    DEBUG = True
    QNOISE_ENV = 'development'


class ProductionConfig(Config):
    DEBUG = False
    QNOISE_ENV = 'production'


class TestingConfig(Config):
    DEBUG = False
    TESTING = True
    QNOISE_ENV = 'testing'
    QNOISE_THREADS = 2


config = {
    'development': DevelopmentConfig,
    'production': ProductionConfig,
    'testing': TestingConfig,
    'default': DevelopmentConfig
}

"""ARMA noise models: trajectories, spectra, filter design and time-scale conversion.

Sign convention: the recursion is y_k = sum_i a_i y_{k-i} + sum_j b_j x_{k-j}, so the
spectrum denominator is |1 - sum_k a_k e^{-ik w}|^2. Frequencies are normalized angular
frequency in [0, pi].
"""
import logging
import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import linalg, optimize, signal

from qnoise.config import ExperimentConfig
from qnoise.exceptions import InvalidArgumentError

logger = logging.getLogger(__name__)

Sampler = Callable[[np.random.Generator, Tuple[int, ...]], np.ndarray]


@dataclass(frozen=True)
class PowerSpectrum:
    frequencies: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        freqs = np.asarray(self.frequencies, dtype=float)
        values = np.asarray(self.values, dtype=float)
        if freqs.shape != values.shape:
            raise InvalidArgumentError(
                "Spectrum grid and values differ in length",
                {'frequencies': freqs.shape, 'values': values.shape})
        if np.any(values < 0):
            raise InvalidArgumentError("Power spectrum values must be nonnegative")
        object.__setattr__(self, 'frequencies', freqs)
        object.__setattr__(self, 'values', values)

    def __len__(self):
        return len(self.values)


@dataclass(frozen=True)
class AutocovarianceSequence:
    values: np.ndarray
    lag_unit: float = 1.0

    def __post_init__(self):
        r = np.atleast_1d(np.asarray(self.values, dtype=float))
        if r.size == 0:
            raise InvalidArgumentError("Autocovariance needs at least the zero lag")
        if not np.all(np.isfinite(r)):
            raise InvalidArgumentError("Autocovariance values must be finite")
        scale = max(abs(r[0]), np.finfo(float).tiny)
        if r[0] < -ExperimentConfig.TOEPLITZ_PSD_TOL * scale:
            raise InvalidArgumentError("Autocovariance r[0] must be nonnegative", {'r0': float(r[0])})
        if np.any(np.abs(r[1:]) > r[0] + ExperimentConfig.TOEPLITZ_PSD_TOL * scale):
            raise InvalidArgumentError("Autocovariance violates |r[k]| <= r[0]")
        if self.lag_unit <= 0:
            raise InvalidArgumentError("lag_unit must be positive")
        object.__setattr__(self, 'values', r)

    def __len__(self):
        return len(self.values)

    def is_toeplitz_psd(self, tol: float = ExperimentConfig.TOEPLITZ_PSD_TOL) -> bool:
        return _toeplitz_min_eig(self.values) >= -tol * max(self.values[0], np.finfo(float).tiny)


class ArmaModel:
    """Stateful ARMA filter driven by i.i.d. Gaussian inputs.

    ``history`` is the filter state, which carries the last p outputs and the last q
    inputs between calls so repeated ``generate`` calls continue one realization.

    ``sections`` (rows ``[b0, b1, b2, 1, a1, a2]``) replaces the coefficient pair with a
    cascade of second-order sections. High-order designs with poles close to z = 1 stay
    stable only in this form; ``ar_coeffs``/``ma_coeffs`` are then the expanded
    polynomials, kept for reporting.
    """

    def __init__(self, ar_coeffs: Sequence[float] = (), ma_coeffs: Sequence[complex] = (1.0,),
                 burn_in: Optional[int] = None, complex_driving: bool = False,
                 sampler: Optional[Sampler] = None, sections: Optional[np.ndarray] = None):
        if sections is not None:
            sections = np.atleast_2d(np.asarray(sections, dtype=float))
            if sections.shape[1] != 6 or np.any(sections[:, 3] != 1.0):
                raise InvalidArgumentError("Sections must be rows [b0, b1, b2, 1, a1, a2]",
                                           {'shape': sections.shape})
            b_full, a_full = signal.sos2tf(sections)
            ar_coeffs = np.trim_zeros(-a_full[1:], 'b')
            ma_coeffs = b_full[:max(1, len(np.trim_zeros(b_full, 'b')))]
        self.sections = sections
        a = np.atleast_1d(np.asarray(ar_coeffs))
        b = np.atleast_1d(np.asarray(ma_coeffs))
        if b.size == 0:
            raise InvalidArgumentError("MA coefficients need at least b0")
        if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
            raise InvalidArgumentError("ARMA coefficients must be finite")
        if np.iscomplexobj(a):
            if np.any(a.imag != 0):
                raise InvalidArgumentError("AR coefficients must be real")
            a = a.real
        self.ar_coeffs = a.astype(float)
        self.ma_coeffs = b.astype(complex) if np.iscomplexobj(b) else b.astype(float)

        radius = self.spectral_radius()
        if radius >= 1.0:
            raise InvalidArgumentError(
                "Unstable AR polynomial: a root lies on or outside the unit circle",
                {'max_root_modulus': radius})

        if burn_in is None:
            burn_in = max(ExperimentConfig.DEFAULT_BURN_IN_FLOOR,
                          ExperimentConfig.BURN_IN_PER_COEFFICIENT * (self.p + self.q + 1))
            if self.sections is not None:
                burn_in = max(burn_in, self.settling_steps())
        if burn_in < 0:
            raise InvalidArgumentError("burn_in must be >= 0")
        self.burn_in = int(burn_in)
        self.complex_driving = complex_driving
        self.sampler = sampler
        self.history: Optional[np.ndarray] = None

    @property
    def p(self) -> int:
        return len(self.ar_coeffs)

    @property
    def q(self) -> int:
        return len(self.ma_coeffs) - 1

    @property
    def order(self) -> int:
        return max(self.p, self.q)

    @property
    def denominator(self) -> np.ndarray:
        return np.concatenate([[1.0], -self.ar_coeffs])

    @property
    def is_complex(self) -> bool:
        return self.complex_driving or np.iscomplexobj(self.ma_coeffs)

    def spectral_radius(self) -> float:
        """Largest root modulus of 1 - sum a_i z^-i (0 for pure MA)."""
        if self.sections is not None:
            # per-section quadratics; the expanded polynomial loses these roots to rounding
            return float(max(np.max(np.abs(np.roots(row[3:])), initial=0.0)
                             for row in self.sections))
        if self.p == 0:
            return 0.0
        return float(np.max(np.abs(np.roots(self.denominator))))

    def settling_steps(self, tolerance: float = 1e-6) -> int:
        """Steps for the slowest pole to decay below ``tolerance``."""
        radius = self.spectral_radius()
        if radius == 0.0:
            return self.q + 1
        return int(math.ceil(math.log(tolerance) / math.log(radius)))

    def clone(self, complex_driving: Optional[bool] = None) -> 'ArmaModel':
        """Same coefficients, fresh (unprimed) history; optionally switch the driving."""
        driving = self.complex_driving if complex_driving is None else complex_driving
        if self.sections is not None:
            return ArmaModel(burn_in=self.burn_in, complex_driving=driving, sampler=self.sampler,
                             sections=self.sections)
        return ArmaModel(self.ar_coeffs, self.ma_coeffs, burn_in=self.burn_in,
                         complex_driving=driving, sampler=self.sampler)

    def reset(self):
        self.history = None

    def draw_inputs(self, rng: np.random.Generator, shape, noise_scale: float = 1.0) -> np.ndarray:
        if self.sampler is not None:
            x = np.asarray(self.sampler(rng, shape))
        elif self.complex_driving:
            x = (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)
        else:
            x = rng.standard_normal(shape)
        return noise_scale * x

    def filter(self, inputs) -> np.ndarray:
        """Run the recursion on explicit inputs, continuing from the stored history."""
        x = np.asarray(inputs)
        dtype = np.result_type(x, self.ma_coeffs, float)
        if x.size == 0:
            return np.zeros(0, dtype=dtype)
        if self.sections is not None:
            if self.history is None:
                zi = np.zeros((len(self.sections), 2), dtype=dtype)
            else:
                zi = self.history.astype(np.result_type(dtype, self.history))
            y, self.history = signal.sosfilt(self.sections, x, zi=zi)
            return y
        if self.order == 0:
            return (self.ma_coeffs[0] * x).astype(dtype)
        if self.history is None:
            zi = np.zeros(self.order, dtype=dtype)
        else:
            dtype = np.result_type(dtype, self.history)
            zi = self.history.astype(dtype)
        y, self.history = signal.lfilter(self.ma_coeffs, self.denominator, x, zi=zi)
        return y

    def generate(self, n: int, rng: np.random.Generator, noise_scale: float = 1.0) -> np.ndarray:
        """Next n outputs; the first call discards ``burn_in`` samples from a zero state."""
        if n < 0:
            raise InvalidArgumentError("n must be >= 0")
        warmup = self.burn_in if self.history is None else 0
        if n == 0 and warmup == 0:
            return np.zeros(0, dtype=complex if self.is_complex else float)
        x = self.draw_inputs(rng, (warmup + n,), noise_scale)
        y = self.filter(x)
        if self.order == 0 and self.history is None:
            self.history = np.zeros(0, dtype=y.dtype)
        return y[warmup:]

    def generate_batch(self, n_traj: int, n: int, rng: np.random.Generator,
                       noise_scale: float = 1.0) -> np.ndarray:
        """n_traj independent realizations of length n, shape (n_traj, n); history untouched."""
        x = self.draw_inputs(rng, (n_traj, self.burn_in + n), noise_scale)
        if self.sections is not None:
            y = signal.sosfilt(self.sections, x, axis=-1)
        elif self.order == 0:
            y = self.ma_coeffs[0] * x
        else:
            y = signal.lfilter(self.ma_coeffs, self.denominator, x, axis=-1)
        return y[:, self.burn_in:]

    def __repr__(self):
        if self.sections is not None:
            return f"ArmaModel(sections={len(self.sections)}, burn_in={self.burn_in})"
        return f"ArmaModel(p={self.p}, q={self.q}, burn_in={self.burn_in})"


def white_noise() -> ArmaModel:
    return ArmaModel((), (1.0,))


def default_grid(size: int = ExperimentConfig.DEFAULT_GRID_SIZE) -> np.ndarray:
    return np.linspace(0.0, np.pi, size)


def power_spectrum(model: ArmaModel, grid: Optional[np.ndarray] = None) -> PowerSpectrum:
    """S(w) = |B(e^{iw})|^2 / |1 - sum a_k e^{-ikw}|^2 for unit-variance driving."""
    grid = default_grid() if grid is None else np.asarray(grid, dtype=float)
    if model.sections is not None:
        _, h = signal.sosfreqz(model.sections, worN=grid)
        return PowerSpectrum(grid, np.abs(h) ** 2)
    _, h = signal.freqz(model.ma_coeffs, model.denominator, worN=grid)
    return PowerSpectrum(grid, np.abs(h) ** 2)


SpectrumFn = Callable[[ArmaModel, np.ndarray], PowerSpectrum]


def autocovariance(model: ArmaModel, n_lags: int, n_fft: int = 65536,
                   spectrum_fn: SpectrumFn = power_spectrum) -> AutocovarianceSequence:
    """Theoretical autocovariance r[0..n_lags-1] by inverse FFT of the spectrum."""
    if n_lags > n_fft // 2:
        raise InvalidArgumentError("n_fft too small for the requested lags")
    grid = 2.0 * np.pi * np.arange(n_fft) / n_fft
    values = spectrum_fn(model, grid).values
    r = np.fft.ifft(values).real[:n_lags]
    return AutocovarianceSequence(r)


def design_bandlimited_ma(num_taps: int, low_edge: float, high_edge: float) -> ArmaModel:
    """Hamming-window FIR with unit passband on [low_edge, high_edge].

    Low-pass designs use the prototype directly; other bands cosine-modulate a
    half-bandwidth prototype to the band center.
    """
    taps = bandlimited_taps(num_taps, low_edge, high_edge)
    return ArmaModel((), taps)


def bandlimited_taps(num_taps: int, low_edge: float, high_edge: float) -> np.ndarray:
    if num_taps < 2:
        raise InvalidArgumentError("num_taps must be >= 2", {'num_taps': num_taps})
    if not (0.0 <= low_edge < high_edge <= np.pi):
        raise InvalidArgumentError(
            "Band edges must satisfy 0 <= low_edge < high_edge <= pi",
            {'low_edge': low_edge, 'high_edge': high_edge})

    if low_edge == 0.0 and high_edge == np.pi:
        taps = np.zeros(num_taps)
        taps[0] = 1.0
        return taps
    if low_edge == 0.0:
        return signal.firwin(num_taps, high_edge / np.pi, window='hamming')

    n = np.arange(num_taps)
    if high_edge == np.pi:
        prototype = signal.firwin(num_taps, (np.pi - low_edge) / np.pi, window='hamming')
        return prototype * np.cos(np.pi * n)

    half_width = 0.5 * (high_edge - low_edge)
    center = 0.5 * (high_edge + low_edge)
    prototype = signal.firwin(num_taps, half_width / np.pi, window='hamming')
    return 2.0 * prototype * np.cos(center * (n - 0.5 * (num_taps - 1)))


def design_multiband_ma(num_taps: int, bands: Sequence[Tuple[float, float]]) -> ArmaModel:
    """Sum of band-limited designs, one per (low, high) band."""
    if not bands:
        raise InvalidArgumentError("At least one band is required")
    taps = sum(bandlimited_taps(num_taps, low, high) for low, high in bands)
    return ArmaModel((), taps)


def design_multipole_ar(pole_freqs: Sequence[float],
                        pole_radius: float = ExperimentConfig.DEFAULT_POLE_RADIUS) -> ArmaModel:
    """Pure AR model with conjugate pole pairs at ``pole_radius * exp(+-i w)``."""
    if not (0.0 < pole_radius < 1.0):
        raise InvalidArgumentError("pole_radius must lie in (0, 1)", {'pole_radius': pole_radius})
    freqs = np.asarray(pole_freqs, dtype=float)
    if freqs.size == 0:
        return white_noise()
    poles = pole_radius * np.exp(1j * np.concatenate([freqs, -freqs]))
    ar = -np.poly(poles)[1:].real
    return ArmaModel(ar, (1.0,))


def _corner_to_pole(omega: float) -> float:
    # Real root in (0, 1] whose first-order section has its -3 dB corner at omega.
    c = 2.0 - math.cos(min(omega, np.pi))
    return c - math.sqrt(c * c - 1.0)


def design_one_over_f(alpha: float, num_sections: int,
                      band: Tuple[float, float]) -> ArmaModel:
    """Cascade of first-order pole/zero sections with spectrum ~ w^-alpha in band.

    Section corners are log-spaced; each zero sits alpha/2 of a spacing above its
    pole, so the staircase averages to the target slope. Gain gives S(f_max) = 1.
    The model keeps the cascade as second-order sections.
    """
    f_min, f_max = band
    if not (0.0 < alpha <= 2.0):
        raise InvalidArgumentError("alpha must lie in (0, 2]", {'alpha': alpha})
    if num_sections < 3:
        raise InvalidArgumentError("num_sections must be >= 3", {'num_sections': num_sections})
    if f_min <= 0.0:
        raise InvalidArgumentError("f_min must be > 0 (1/f diverges at DC)", {'f_min': f_min})
    if not (f_min < f_max <= np.pi):
        raise InvalidArgumentError("Band must satisfy 0 < f_min < f_max <= pi",
                                   {'f_min': f_min, 'f_max': f_max})

    spacing = math.log(f_max / f_min) / (num_sections - 2)
    pole_corners = f_min * np.exp(spacing * (np.arange(num_sections) - 1))
    zero_corners = pole_corners * math.exp(0.5 * alpha * spacing)

    poles = np.array([_corner_to_pole(w) for w in pole_corners])
    zeros = np.array([_corner_to_pole(w) for w in zero_corners])
    sections = signal.zpk2sos(zeros, poles, 1.0)

    level = power_spectrum(ArmaModel(sections=sections), np.array([f_max])).values[0]
    sections[0, :3] /= math.sqrt(level)
    return ArmaModel(sections=sections)


def integrated_variance(r: Union[AutocovarianceSequence, Sequence[float]], T: int) -> float:
    """Var of the sum of T consecutive samples; lags past the sequence count as zero."""
    values = _values(r)
    if T < 0:
        raise InvalidArgumentError("T must be >= 0")
    if T == 0:
        return 0.0
    lags = np.arange(1, min(T, len(values)))
    return float(T * values[0] + 2.0 * np.sum((T - lags) * values[lags]))


def convert_timescale(r_fast: Union[AutocovarianceSequence, Sequence[float]], T: int,
                      n_slow: int) -> AutocovarianceSequence:
    """Slow-step autocovariance whose partial-sum variances match the fast process.

    Row m equates Var(sum of m slow steps) with Var(sum of m*T fast steps); the system
    is lower triangular in r_s.
    """
    values = _values(r_fast)
    lag_unit = r_fast.lag_unit if isinstance(r_fast, AutocovarianceSequence) else 1.0
    if T < 1 or n_slow < 1:
        raise InvalidArgumentError("T and n_slow must be >= 1", {'T': T, 'n_slow': n_slow})
    if len(values) < n_slow * T:
        raise InvalidArgumentError(
            "Fast autocovariance too short for the requested conversion",
            {'required': n_slow * T, 'given': len(values)})

    m = np.arange(1, n_slow + 1)
    targets = np.array([integrated_variance(values, k * T) for k in m])
    system = np.zeros((n_slow, n_slow))
    system[:, 0] = m
    for row in range(1, n_slow):
        j = np.arange(1, row + 1)
        system[row, j] = 2.0 * (row + 1 - j)
    r_slow = linalg.solve_triangular(system, targets, lower=True)

    tol = ExperimentConfig.TOEPLITZ_PSD_TOL * max(abs(r_slow[0]), np.finfo(float).tiny)
    if _toeplitz_min_eig(r_slow) < -tol:
        logger.warning(
            "Converted autocovariance is not Toeplitz-PSD (min eigenvalue %.3e); projecting",
            _toeplitz_min_eig(r_slow))
        r_slow = _project_toeplitz_psd(r_slow)
    return AutocovarianceSequence(r_slow, lag_unit=lag_unit * T)


def fit_ma_to_autocovariance(r_target: Union[AutocovarianceSequence, Sequence[float]],
                             burn_in: Optional[int] = None) -> ArmaModel:
    """MA(P) model whose autocovariance reproduces r[0..P].

    Minimum-phase taps from cepstral factorization of the target spectrum, refined by
    Levenberg-Marquardt on sum_j b_j b_{j+k} = r_k.
    """
    r = _values(r_target)
    order = len(r) - 1
    if r[0] == 0.0 and not np.any(r):
        return ArmaModel((), np.zeros(order + 1), burn_in=burn_in)
    if _toeplitz_min_eig(r) < -ExperimentConfig.TOEPLITZ_PSD_TOL * r[0]:
        raise InvalidArgumentError("Target autocovariance is not Toeplitz-PSD",
                                   {'min_eigenvalue': _toeplitz_min_eig(r)})
    if order == 0:
        return ArmaModel((), [math.sqrt(r[0])], burn_in=burn_in)

    taps = _cepstral_factor(r)

    def residual(b):
        return np.array([np.dot(b[:order + 1 - k], b[k:]) for k in range(order + 1)]) - r

    def jacobian(b):
        padded = np.concatenate([np.zeros(order), b, np.zeros(order)])
        rows = []
        for k in range(order + 1):
            i = np.arange(order + 1)
            rows.append(padded[order + i + k] + padded[order + i - k])
        return np.array(rows)

    fit = optimize.least_squares(residual, taps, jac=jacobian, method='lm',
                                 xtol=1e-14, ftol=1e-14, gtol=1e-14)
    taps = fit.x if np.linalg.norm(fit.fun) <= np.linalg.norm(residual(taps)) else taps
    if taps[0] < 0:
        taps = -taps
    return ArmaModel((), taps, burn_in=burn_in)


def _cepstral_factor(r: np.ndarray) -> np.ndarray:
    order = len(r) - 1
    n_fft = 1 << int(math.ceil(math.log2(ExperimentConfig.MA_FIT_FFT_FACTOR * (order + 1))))
    row = np.zeros(n_fft)
    row[:order + 1] = r
    row[n_fft - order:] = r[1:][::-1]
    spectrum = np.fft.fft(row).real
    spectrum = np.maximum(spectrum, 1e-14 * spectrum.max())
    cepstrum = np.fft.ifft(0.5 * np.log(spectrum)).real

    folded = np.zeros(n_fft)
    folded[0] = cepstrum[0]
    folded[1:n_fft // 2] = 2.0 * cepstrum[1:n_fft // 2]
    folded[n_fft // 2] = cepstrum[n_fft // 2]
    minimum_phase = np.fft.ifft(np.exp(np.fft.fft(folded))).real
    return minimum_phase[:order + 1]


def expected_welch_spectrum(model: ArmaModel, frequencies: np.ndarray, nperseg: int,
                            spectrum_fn: SpectrumFn = power_spectrum) -> PowerSpectrum:
    """Mean of the Hann-window Welch estimate, i.e. the spectrum seen through the window."""
    window = signal.get_window('hann', nperseg)
    lag_weights = np.correlate(window, window, mode='full')
    r = autocovariance(model, nperseg, spectrum_fn=spectrum_fn).values
    lags = np.arange(-(nperseg - 1), nperseg)
    r_sym = r[np.abs(lags)]
    freqs = np.asarray(frequencies, dtype=float)
    values = np.cos(np.outer(freqs, lags)) @ (r_sym * lag_weights) / np.sum(window ** 2)
    return PowerSpectrum(freqs, np.maximum(values, 0.0))


def estimate_spectrum(samples: np.ndarray, nperseg: int = 1024) -> PowerSpectrum:
    """Welch estimate on the same scale as ``power_spectrum`` (unit-variance white -> 1)."""
    freqs, density = signal.welch(samples, fs=2.0 * np.pi, window='hann', nperseg=nperseg,
                                  noverlap=nperseg // 2, detrend=False,
                                  return_onesided=False, scaling='density')
    keep = freqs >= 0
    order = np.argsort(freqs[keep])
    return PowerSpectrum(freqs[keep][order], 2.0 * np.pi * density[keep][order])


def periodogram_relative_error(model: ArmaModel, n_samples: int, rng: np.random.Generator,
                               nperseg: int = 1024,
                               spectrum_fn: SpectrumFn = power_spectrum) -> float:
    """Relative L2 distance between a Welch estimate of generated samples and the model."""
    source = model.clone()
    source.burn_in = max(source.burn_in, source.settling_steps())
    samples = source.generate(n_samples, rng)
    estimate = estimate_spectrum(samples, nperseg)
    expected = expected_welch_spectrum(model, estimate.frequencies, nperseg, spectrum_fn)
    return float(np.linalg.norm(estimate.values - expected.values) / np.linalg.norm(expected.values))


def write_spectrum_csv(path: str, spectrum: PowerSpectrum):
    np.savetxt(path, np.column_stack([spectrum.frequencies, spectrum.values]),
               delimiter=',', fmt='%.17g', header='omega,value', comments='')


def read_spectrum_csv(path: str) -> PowerSpectrum:
    data = np.loadtxt(path, delimiter=',', skiprows=1, ndmin=2)
    return PowerSpectrum(data[:, 0], data[:, 1])


def write_trajectory_csv(path: str, values: np.ndarray):
    values = np.asarray(values)
    index = np.arange(len(values))
    if np.iscomplexobj(values):
        np.savetxt(path, np.column_stack([index, values.real, values.imag]),
                   delimiter=',', fmt='%.17g', header='index,real,imag', comments='')
    else:
        np.savetxt(path, np.column_stack([index, values]),
                   delimiter=',', fmt='%.17g', header='index,value', comments='')


def read_trajectory_csv(path: str) -> np.ndarray:
    data = np.loadtxt(path, delimiter=',', skiprows=1, ndmin=2)
    if data.shape[1] == 3:
        return data[:, 1] + 1j * data[:, 2]
    return data[:, 1]


def _values(r) -> np.ndarray:
    if isinstance(r, AutocovarianceSequence):
        return r.values
    return np.atleast_1d(np.asarray(r, dtype=float))


def _toeplitz_min_eig(r: np.ndarray) -> float:
    return float(np.linalg.eigvalsh(linalg.toeplitz(r)).min())


def _project_toeplitz_psd(r: np.ndarray) -> np.ndarray:
    # Clip negative eigenvalues of the symmetric circulant embedding; the leading
    # Toeplitz block of a PSD circulant is PSD.
    if len(r) == 1:
        return np.maximum(r, 0.0)
    embedded = np.concatenate([r, r[-2:0:-1]])
    eigenvalues = np.maximum(np.fft.fft(embedded).real, 0.0)
    return np.fft.ifft(eigenvalues).real[:len(r)]

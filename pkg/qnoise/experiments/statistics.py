"""Closed-form dephasing fidelity, Gaussian-kernel noise presets and Monte Carlo sample sizing."""
import logging
import math
from typing import Optional

import numpy as np
from scipy import stats

from qnoise.engine.arma import ArmaModel, AutocovarianceSequence, fit_ma_to_autocovariance
from qnoise.engine.quantum_core import SIGMA_Z
from qnoise.exceptions import InvalidArgumentError

logger = logging.getLogger(__name__)


def analytic_dephasing_fidelity(variance: float, u_ideal: np.ndarray,
                                generator: np.ndarray = SIGMA_Z) -> float:
    """Average process fidelity under Gaussian noise exp(-i S G) with Var(S) = variance.

    (1/N^2) sum_jk exp(-Var (l_j - l_k)^2 / 2) over the eigenvalues l of G, valid when
    G commutes with the ideal evolution.
    """
    if variance < 0:
        raise InvalidArgumentError("variance must be >= 0", {'variance': variance})
    u = np.asarray(u_ideal, dtype=complex)
    g = np.asarray(generator, dtype=complex)
    if u.shape != g.shape:
        raise InvalidArgumentError("Unitary and generator dimensions differ",
                                   {'unitary': u.shape, 'generator': g.shape})
    if np.max(np.abs(u @ g - g @ u)) > 1e-10:
        raise InvalidArgumentError("Noise generator must commute with the ideal evolution")
    eigenvalues = np.linalg.eigvalsh(g)
    gaps = eigenvalues[:, None] - eigenvalues[None, :]
    n = len(eigenvalues)
    return float(np.sum(np.exp(-0.5 * variance * gaps ** 2)) / (n * n))


def gaussian_kernel_autocovariance(variance: float, tau_c: float,
                                   n_lags: Optional[int] = None) -> AutocovarianceSequence:
    """r[k] = variance exp(-k^2 / (4 tau_c^2)), truncated where the kernel is ~1e-11."""
    if variance < 0 or tau_c <= 0:
        raise InvalidArgumentError("Need variance >= 0 and tau_c > 0",
                                   {'variance': variance, 'tau_c': tau_c})
    if n_lags is None:
        n_lags = int(math.ceil(10.0 * tau_c)) + 1
    k = np.arange(n_lags)
    return AutocovarianceSequence(variance * np.exp(-k ** 2 / (4.0 * tau_c ** 2)))


def gaussian_kernel_ma(variance: float, tau_c: float, complex_driving: bool = False) -> ArmaModel:
    """MA model with per-step variance ``variance`` and a Gaussian correlation of width tau_c."""
    model = fit_ma_to_autocovariance(gaussian_kernel_autocovariance(variance, tau_c))
    if complex_driving:
        return model.clone(complex_driving=True)
    return model


def f_test_sample_size(relative_error: float, p_level: float = 0.05) -> int:
    """Smallest N whose one-sided F(N-1, N-1) critical value is <= 1 + relative_error."""
    if not (0.0 < relative_error < 1.0):
        raise InvalidArgumentError("relative_error must lie in (0, 1)",
                                   {'relative_error': relative_error})
    if not (0.0 < p_level < 0.5):
        raise InvalidArgumentError("p_level must lie in (0, 0.5)", {'p_level': p_level})
    target = 1.0 + relative_error

    def resolves(n: int) -> bool:
        return stats.f.isf(p_level, n - 1, n - 1) <= target

    low, high = 2, 4
    while not resolves(high):
        low, high = high, high * 2
    while high - low > 1:
        mid = (low + high) // 2
        if resolves(mid):
            high = mid
        else:
            low = mid
    return high


def simulate_variance_ratio_rejection(n: int, rng: np.random.Generator, p_level: float = 0.05,
                                      n_trials: int = 2000, variance_ratio: float = 1.0) -> float:
    """Rejection rate of the one-sided F-test on two normal samples of size n."""
    if n < 2:
        raise InvalidArgumentError("n must be >= 2", {'n': n})
    critical = stats.f.isf(p_level, n - 1, n - 1)
    first = rng.standard_normal((n_trials, n)) * math.sqrt(variance_ratio)
    second = rng.standard_normal((n_trials, n))
    ratio = np.var(first, axis=1, ddof=1) / np.var(second, axis=1, ddof=1)
    return float(np.mean(ratio > critical))


def mean_and_stderr(samples: np.ndarray, axis: int = 0):
    samples = np.asarray(samples)
    n = samples.shape[axis]
    mean = samples.mean(axis=axis)
    if n < 2:
        return mean, np.zeros_like(mean, dtype=float)
    return mean, samples.std(axis=axis, ddof=1) / math.sqrt(n)


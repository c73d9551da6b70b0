import numpy as np
import pytest

from qnoise.engine.arma import power_spectrum
from qnoise.exceptions import InvalidArgumentError
from qnoise.services.validation_service import (
    LEVELS, CheckResult, ValidationReport, ValidationService, flipped_ar_spectrum,
    periodogram_models,
)

SEED = 12345


@pytest.fixture
def validator():
    return ValidationService()


def _all_pass(checks):
    failed = [c.line() for c in checks if not c.passed]
    assert not failed, failed


def test_unknown_level_rejected(validator):
    with pytest.raises(InvalidArgumentError):
        validator.run('exhaustive')


def test_crashing_suite_fails_its_row_and_run_completes(validator, monkeypatch):
    for name in dir(validator):
        if name.startswith('check_'):
            monkeypatch.setattr(validator, name, lambda *args, **kwargs: [])

    def broken(*args, **kwargs):
        raise RuntimeError('unstable polynomial')

    monkeypatch.setattr(validator, 'check_one_over_f_slopes', broken)
    monkeypatch.setattr(validator, 'check_circuits',
                        lambda: [CheckResult('circuit.stub', True, 0.0, 1.0)])
    report = validator.run('quick', SEED)
    assert [c.name for c in report.checks] == ['suite.one_over_f', 'circuit.stub']
    assert [c.name for c in report.failures] == ['suite.one_over_f']
    assert 'RuntimeError: unstable polynomial' in report.failures[0].detail


def test_periodogram_models_include_stable_one_over_f():
    models = periodogram_models()
    for name in ('one_over_f_1', 'one_over_f_2'):
        assert models[name].sections is not None
        assert models[name].spectral_radius() < 1.0


def test_circuit_checks(validator):
    checks = validator.check_circuits()
    assert [c.name for c in checks] == [
        'circuit.cnot_compilation', 'circuit.z_check_parity', 'circuit.x_check_parity']
    _all_pass(checks)


def test_channel_checks(validator):
    _all_pass(validator.check_cptp(20, SEED))
    _all_pass(validator.check_stiefel(SEED))
    _all_pass(validator.check_liouvillian())
    _all_pass(validator.check_ma_fit())


def test_lindblad_order_checks(validator):
    checks = validator.check_lindblad_orders()
    assert [c.name for c in checks] == [
        'liouvillian.amplitude_damping_order', 'liouvillian.dephasing_order',
        'liouvillian.depolarizing_order', 'liouvillian.z_coherence_decay']
    _all_pass(checks)
    # the residuals are relative, so each gap sits near its leading term
    assert all(c.residual < 0.05 for c in checks)


def test_timescale_and_slope_checks(validator):
    _all_pass(validator.check_timescale(2000, SEED))
    _all_pass(validator.check_one_over_f_slopes())


def test_f_test_checks(validator):
    _all_pass(validator.check_f_test(SEED))


def test_noiseless_qns_round_trip(validator):
    checks = validator.check_qns('quick', 32, SEED)
    assert len(checks) == 1
    _all_pass(checks)


def test_flipped_ar_sign_is_caught(validator):
    checks = {c.name: c for c in validator.check_periodograms(LEVELS['quick'], SEED,
                                                              flipped_ar_spectrum)}
    # no AR part, so the flip is invisible
    assert checks['periodogram.white'].passed
    assert checks['periodogram.bandlimited'].passed
    assert not checks['periodogram.multipole'].passed


def test_flipped_spectrum_matches_true_one_without_ar():
    model = periodogram_models()['bandlimited']
    grid = np.linspace(0.0, np.pi, 17)
    np.testing.assert_allclose(flipped_ar_spectrum(model, grid).values,
                               power_spectrum(model, grid).values, rtol=1e-10, atol=1e-14)


def test_report_summary_and_table():
    report = ValidationReport('quick', [
        CheckResult('a', True, 1e-12, 1e-10),
        CheckResult('b', False, 0.5, 0.1, 'too far'),
    ])
    assert not report.passed
    assert [c.name for c in report.failures] == ['b']
    assert report.checks[1].line() == '[FAIL] b: residual=5.000e-01 threshold=1.000e-01 (too far)'
    table = report.to_result()
    assert len(table.rows) == 4
    np.testing.assert_array_equal(table.values('residual', check='b'), [0.5])

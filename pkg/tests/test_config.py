import pytest

from qnoise.config import RunConfig, config
from qnoise.exceptions import ConfigError


def _write(tmp_path, text):
    path = tmp_path / 'run.env'
    path.write_text(text)
    return str(path)


def test_defaults():
    cfg = RunConfig()
    assert cfg.qns_w == 128
    assert cfg.arma_model == 'bandlimited'
    assert cfg.dd_protocols == ('free', 'XX', 'XY4')
    assert cfg.surface_gammas == (1e-6, 1e-4)
    assert cfg.validate() is cfg


def test_from_file_parses_every_field_type(tmp_path):
    path = _write(tmp_path, "\n".join([
        "# spectroscopy run",
        "RUN_SEED=7",
        "",
        "ARMA_MODEL=multipole",
        "ARMA_POLE_RADIUS=0.9",
        "ARMA_POLE_FREQS_PI=0.1, 0.3",
        "DD_PROTOCOLS=XX,XY4",
        "export QNS_W=64",
    ]))
    cfg = RunConfig.from_file(path)
    assert cfg.run_seed == 7
    assert cfg.arma_model == 'multipole'
    assert cfg.arma_pole_radius == 0.9
    assert cfg.arma_pole_freqs_pi == (0.1, 0.3)
    assert cfg.dd_protocols == ('XX', 'XY4')
    assert cfg.qns_w == 64


def test_unknown_key_reports_line(tmp_path):
    path = _write(tmp_path, "RUN_SEED=1\nQNS_WIDTH=64\n")
    with pytest.raises(ConfigError) as excinfo:
        RunConfig.from_file(path)
    assert excinfo.value.key == 'QNS_WIDTH'
    assert excinfo.value.line == 2


def test_malformed_line_reports_line(tmp_path):
    path = _write(tmp_path, "RUN_SEED=1\n# fine\nthis is not a setting\n")
    with pytest.raises(ConfigError) as excinfo:
        RunConfig.from_file(path)
    assert excinfo.value.line == 3


def test_bad_value_reports_key(tmp_path):
    path = _write(tmp_path, "QNS_W=wide\n")
    with pytest.raises(ConfigError) as excinfo:
        RunConfig.from_file(path)
    assert excinfo.value.key == 'QNS_W'
    assert excinfo.value.to_dict()['details'] == {'key': 'QNS_W', 'line': 1}


def test_missing_file(tmp_path):
    with pytest.raises(ConfigError):
        RunConfig.from_file(str(tmp_path / 'absent.env'))


def test_flags_override_file_and_file_overrides_base(tmp_path):
    path = _write(tmp_path, "RUN_SEED=7\nRUN_SAMPLES=50\n")
    base = RunConfig(run_seed=1, run_out='base-out')
    cfg = RunConfig.from_file(path, base=base, run_samples=9, run_threads=None)
    assert cfg.run_seed == 7
    assert cfg.run_samples == 9
    assert cfg.run_out == 'base-out'
    assert cfg.run_threads == 0


def test_with_overrides_rejects_unknown_names():
    with pytest.raises(ConfigError):
        RunConfig().with_overrides(qns_width=64)
    assert RunConfig().with_overrides(qns_w=None) == RunConfig()


@pytest.mark.parametrize('changes', [
    dict(run_samples=0),
    dict(run_threads=-1),
    dict(run_seed=-5),
    dict(arma_model='pink'),
    dict(dd_noise='telegraph'),
    dict(dd_protocols=('XX', 'CPMG')),
    dict(surface_check='Y'),
    dict(lz_spin='two'),
    dict(validate_level='exhaustive'),
    dict(qns_w=7),
    dict(lz_kappa=0),
    dict(surface_steps_per_gate=0),
    dict(surface_circuit='no/such/circuit.txt'),
])
def test_validate_rejects(changes):
    with pytest.raises(ConfigError):
        RunConfig(**changes).validate()


def test_to_dict_lists_tuples():
    out = RunConfig().to_dict()
    assert out['dd_protocols'] == ['free', 'XX', 'XY4']
    assert out['qns_w'] == 128


def test_environment_configs():
    assert config['default'] is config['development']
    assert config['testing'].TESTING
    assert config['testing'].QNOISE_THREADS == 2

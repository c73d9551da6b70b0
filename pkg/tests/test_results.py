import json

import numpy as np
import pytest

from qnoise.engine.quantum_core import unitary_to_superoperator
from qnoise.exceptions import InvalidArgumentError
from qnoise.experiments.results import (
    ExperimentResult, package_versions, read_results_csv, read_superoperator_json, update_meta,
    write_fidelities_csv, write_meta, write_superoperator_json,
)


def test_add_checks_axes_and_bounds():
    result = ExperimentResult('dd', ['protocol', 'step'])
    result.add('fidelity', 0.99, 0.001, protocol='XX', step=1)
    with pytest.raises(InvalidArgumentError):
        result.add('fidelity', 0.99, protocol='XX')
    with pytest.raises(InvalidArgumentError):
        result.add('fidelity', 1.2, protocol='XX', step=2)
    with pytest.raises(InvalidArgumentError):
        result.add('fidelity', 0.5, -1.0, protocol='XX', step=2)
    with pytest.raises(InvalidArgumentError):
        result.add('abs_error', 0.5, np.nan, protocol='XX', step=2)
    result.add('abs_error', 3.0, protocol='XX', step=2)
    assert len(result.rows) == 2


def test_select_and_values():
    result = ExperimentResult('lz', ['method', 'level'])
    for method in ('trotter', 'schwarma'):
        for level in (0, 1):
            result.add('population', 0.5, 0.01, method=method, level=level)
    assert len(result.select('population', method='trotter')) == 2
    np.testing.assert_array_equal(result.values('population', level=1), [0.5, 0.5])
    np.testing.assert_array_equal(result.stderrs('population', method='schwarma', level=0), [0.01])


def test_csv_keeps_full_precision(tmp_path):
    result = ExperimentResult('qns', ['j', 'omega'])
    result.add('estimate', 0.1, j=1, omega=np.float64(0.2))
    path = tmp_path / 'results.csv'
    result.write_csv(str(path))
    lines = path.read_text().splitlines()
    assert lines[0] == 'j,omega,metric,value,stderr'
    assert lines[1] == '1,0.20000000000000001,estimate,0.10000000000000001,0'
    rows = read_results_csv(str(path))
    assert float(rows[0]['value']) == 0.1


def test_meta_written_then_updated(tmp_path):
    out = tmp_path / 'nested' / 'run'
    path = write_meta(str(out), {'qns_w': 8}, 12345, {'experiment': 'qns'})
    meta = json.loads(open(path).read())
    assert meta['config'] == {'qns_w': 8}
    assert meta['seed'] == 12345
    assert meta['experiment'] == 'qns'
    assert 'numpy' in meta['versions'] and 'python' in meta['versions']

    update_meta(str(out), rows=4, summary={'rank': np.int64(3)})
    meta = json.loads(open(path).read())
    assert meta['rows'] == 4
    assert meta['summary'] == {'rank': 3.0}


def test_package_versions_marks_missing():
    assert package_versions(('surely-not-installed-pkg',))['surely-not-installed-pkg'] == 'unknown'


def test_fidelity_samples_csv(tmp_path):
    path = str(tmp_path / 'fidelities.csv')
    write_fidelities_csv(path, [({'gamma': 1e-4, 'tau_c': 2.0}, np.array([0.25, 0.5]))])
    rows = read_results_csv(path)
    assert [(r['gamma'], r['tau_c'], r['trial'], r['fidelity']) for r in rows] == [
        ('0.0001', '2', '0', '0.25'), ('0.0001', '2', '1', '0.5')]
    with pytest.raises(InvalidArgumentError):
        write_fidelities_csv(path, [])


def test_superoperator_json_keeps_metadata(tmp_path):
    path = str(tmp_path / 'superoperator.json')
    channel = unitary_to_superoperator(np.array([[0, 1j], [1j, 0]]))
    write_superoperator_json(path, [({'gamma': 0.0, 'tau_c': 1.0}, channel)], 11, 40,
                             {'family': 'hamiltonian_xyz'})
    with open(path) as handle:
        document = json.load(handle)
    assert (document['seed'], document['n_samples']) == (11, 40)
    assert document['noise'] == {'family': 'hamiltonian_xyz'}
    assert document['superoperators'][0]['dimension'] == 2
    [(labels, loaded)] = read_superoperator_json(path)
    assert labels == {'gamma': 0.0, 'tau_c': 1.0}
    np.testing.assert_array_equal(loaded.data, channel.data)

"""
Integration tests for the iqprob command-line interface
"""

import io
import json

import pytest
import numpy as np
import sys
from pathlib import Path

# Add project root to path
sys.path.insert(0, str(Path(__file__).parent.parent))

from src.cli import EXIT_FAILED, EXIT_INVALID, EXIT_OK, load_tolerances, run
from src.examples_spin import spin1_catalog
from src.matrix_io import matrix_to_document, save_matrix

ANGLE = 0.4


def run_cli(*argv):
    """Run the CLI and parse its stdout as JSON when it is a document."""
    buffer = io.StringIO()
    code = run([str(arg) for arg in argv], stdout=buffer)
    text = buffer.getvalue()
    return code, (json.loads(text) if text.lstrip().startswith('{') else text)


@pytest.fixture(scope="module")
def files(tmp_path_factory):
    """Matrix, resolution and measure documents on disk"""
    root = tmp_path_factory.mktemp('inputs')
    v = np.array([np.cos(ANGLE), np.sin(ANGLE)])
    paths = {}

    def matrix(name, value):
        paths[name] = root / f'{name}.json'
        save_matrix(np.asarray(value, dtype=complex), paths[name])

    def document(name, value):
        paths[name] = root / f'{name}.json'
        paths[name].write_text(json.dumps(value))

    matrix('p', np.diag([1, 0]))
    matrix('q', np.outer(v, v))
    matrix('mixed', np.eye(2) / 2)
    matrix('up', np.diag([1, 0]))
    matrix('down', np.diag([0, 1]))
    matrix('bad', np.diag([2, 0]))

    catalog = spin1_catalog()
    for axis in ('x', 'z'):
        document(f'{axis}_resolution', {
            'projectors': [matrix_to_document(p.matrix) for p in catalog.resolution(axis)]
        })

    document('measure', {'n': 2, 'distributions': [[0.2, 0.8], [0.6, 0.4]]})
    document('bad_measure', {'n': 2, 'lower': [0, 0.5, 0.6, 1], 'upper': [0, 0.4, 0.5, 1]})
    paths['not_json'] = root / 'not_json.json'
    paths['not_json'].write_text('{not json')
    return paths


class TestMatrixCommands:
    """Test cases for decompose, bounds, interval and compare"""

    def test_decompose(self, files):
        code, doc = run_cli('decompose', files['p'], files['q'])
        assert code == EXIT_OK
        assert doc['schema'] == 'iqprob/1'
        assert doc['command'] == 'decompose'
        assert doc['result']['decomposition']['m'] == 1
        assert doc['result']['decomposition']['principal_angles'] == pytest.approx([ANGLE])
        assert max(doc['result']['reconstruction_errors'].values()) < 1e-10

    def test_bounds_with_alternative_method(self, files):
        code, doc = run_cli('bounds', files['p'], files['q'], '--method', 'harmonic-mean')
        assert code == EXIT_OK
        result = doc['result']
        assert result['intersection_method'] == 'harmonic-mean'
        assert result['method_deviation'] < 1e-8
        assert result['operators']['commuting'] is False
        upper = np.array(result['operators']['upper']['entries'])[..., 0]
        assert np.allclose(upper, np.cos(ANGLE) ** 2 * np.eye(2))

    def test_interval(self, files):
        code, doc = run_cli('interval', files['mixed'], files['p'], files['q'])
        assert code == EXIT_OK
        interval = doc['result']['interval']
        assert interval['lower'] == pytest.approx(0.0)
        assert interval['upper'] == pytest.approx(np.cos(ANGLE) ** 2)

    def test_conditional_on_null_event(self, files):
        code, doc = run_cli('interval', files['down'], files['q'], files['p'], '--conditional')
        assert code == EXIT_INVALID
        assert doc['error']['code'] == 'ConditionOnNullEvent'

    def test_conditional_out_of_range(self, files):
        """cos^2 / sin^2 of the angle exceeds 1 and is reported, not clamped"""
        code, doc = run_cli('interval', files['down'], files['p'], files['q'], '--conditional')
        assert code == EXIT_INVALID
        assert doc['error']['code'] == 'IntervalOutOfRange'

    def test_compare(self, files):
        code, doc = run_cli('compare', files['mixed'], files['p'], files['q'], files['p'], files['q'])
        assert code == EXIT_OK
        assert doc['result']['distance'] == 0.0
        assert doc['result']['dominance']['surely_more_probable'] is False
        assert doc['result']['dominance_spectrum']['dominating_state_exists'] is False

    def test_invalid_projector(self, files):
        code, doc = run_cli('bounds', files['bad'], files['q'])
        assert code == EXIT_INVALID
        assert doc['error']['code'] == 'NotIdempotent'
        assert doc['error']['path'] == str(files['bad'])

    def test_missing_file(self, files, tmp_path):
        code, doc = run_cli('decompose', tmp_path / 'absent.json', files['q'])
        assert code == EXIT_INVALID
        assert doc['error']['code'] == 'MalformedInput'

    def test_malformed_json(self, files):
        code, doc = run_cli('decompose', files['not_json'], files['q'])
        assert code == EXIT_INVALID
        assert doc['error']['code'] == 'MalformedInput'


class TestCheckCommands:
    """Test cases for axioms, nogo, twotime, search and classical"""

    def test_axioms_for_pair(self, files):
        code, doc = run_cli('axioms', files['p'], files['q'], '--state', files['up'])
        assert code == EXIT_OK
        report = doc['result']['report']
        assert report['passed'] is True
        assert report['states_checked'] == 11

    def test_axioms_needs_both_projectors(self, files):
        code, doc = run_cli('axioms', files['p'])
        assert code == EXIT_INVALID
        assert doc['error']['code'] == 'ValidationError'

    def test_axioms_random_pairs(self):
        code, doc = run_cli('axioms', '--pairs', 3, '--dim', 3, '--samples', 2)
        assert code == EXIT_OK
        assert doc['result']['summary'][0]['instances'] == 3
        assert doc['result']['failures'] == []

    def test_nogo(self, files):
        code, doc = run_cli('nogo', files['x_resolution'], files['z_resolution'])
        assert code == EXIT_OK
        certificate = doc['result']['certificate']
        assert certificate['additive_joint_probability'] is False
        assert certificate['trace_defect'] == pytest.approx(3.0)
        assert 'defect' not in certificate

    def test_nogo_with_witnesses(self, files):
        code, doc = run_cli('nogo', files['x_resolution'], files['z_resolution'], '--emit-witnesses')
        assert code == EXIT_OK
        assert doc['result']['certificate']['defect']['dim'] == 3

    @pytest.mark.parametrize('order, expected', [
        ('pq', np.cos(ANGLE) ** 2),
        ('qp', np.cos(ANGLE) ** 4),
        ('mean', (np.cos(ANGLE) ** 2 + np.cos(ANGLE) ** 4) / 2),
    ])
    def test_twotime(self, files, order, expected):
        code, doc = run_cli('twotime', files['up'], files['p'], files['q'], '--order', order)
        assert code == EXIT_OK
        assert doc['result']['order'] == order
        assert doc['result']['value'] == pytest.approx(expected)

    def test_search_non_subadditivity(self):
        code, doc = run_cli('search', 'non-subadditivity', '--max-trials', 50)
        assert code == EXIT_OK
        assert doc['result']['witness']['excess_eigenvalue'] > 0

    def test_search_two_time(self):
        code, doc = run_cli('search', 'two-time', '--max-trials', 500, '--seed', 3)
        assert code == EXIT_OK
        witnesses = doc['result']['witnesses']
        assert witnesses['mean_above_joint'] != 'not found'
        assert witnesses['mean_below_joint'] != 'not found'

    def test_classical(self, files):
        code, doc = run_cli('classical', files['measure'])
        assert code == EXIT_OK
        assert doc['result']['axioms']['passed'] is True
        assert doc['result']['derived']['passed'] is True

    def test_classical_failure_exit_code(self, files):
        code, doc = run_cli('classical', files['bad_measure'])
        assert code == EXIT_FAILED
        assert doc['passed'] is False
        assert doc['result']['axioms']['checks']['lower_superadditive']['pass'] is False


class TestCatalogAndSuites:
    """Test cases for spin1 and suite"""

    def test_spin1_catalog(self):
        code, doc = run_cli('spin1')
        assert code == EXIT_OK
        assert set(doc['result']['projectors']) == {'x', 'y', 'z'}
        assert set(doc['result']['projectors']['y']) == {'1', '0', '-1'}

    @pytest.mark.golden
    def test_spin1_reproduce(self):
        code, doc = run_cli('spin1', '--reproduce')
        assert code == EXIT_OK
        assert doc['result']['reproduction']['passed'] is True

    @pytest.mark.golden
    def test_spin1_reproduce_pretty(self):
        code, text = run_cli('spin1', '--reproduce', '--output', 'pretty')
        assert code == EXIT_OK
        assert 'SPIN-1 REFERENCE TABLE REPRODUCTION' in text

    def test_suite(self):
        code, doc = run_cli('suite', 'two_dimensional', '--count', 3, '--seed', 5)
        assert code == EXIT_OK
        assert doc['result']['summary'] == [
            {'suite': 'two_dimensional', 'instances': 3, 'passed': 3, 'failed': 0, 'errors': 0}
        ]


class TestArguments:
    """Test cases for configuration and argument errors"""

    def test_invalid_tolerance(self, files):
        code, doc = run_cli('decompose', files['p'], files['q'], '--tol', 'proj=-1')
        assert code == EXIT_INVALID
        assert doc['error']['code'] == 'InvalidTolerance'

    def test_tolerance_layers(self, monkeypatch):
        monkeypatch.setenv('IQPROB_TOL', 'band=1e-7,proj=1e-8')
        tolerances = load_tolerances(['proj=1e-9'])
        assert tolerances.band == 1e-7
        assert tolerances.proj == 1e-9

    def test_negative_seed(self):
        code, doc = run_cli('suite', 'classical', '--seed', -1)
        assert code == EXIT_INVALID
        assert doc['error']['code'] == 'ValidationError'

    def test_unknown_method(self, files):
        code, doc = run_cli('bounds', files['p'], files['q'], '--method', 'gauss-seidel')
        assert code == EXIT_INVALID
        assert 'gauss-seidel' in doc['error']['message']

    @pytest.mark.parametrize('argv', [[], ['transmogrify'], ['twotime', 'a.json']])
    def test_usage_errors(self, argv):
        assert run(argv, stdout=io.StringIO()) == EXIT_INVALID

    def test_version(self):
        assert run(['--version'], stdout=io.StringIO()) == EXIT_OK

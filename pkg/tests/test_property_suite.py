"""
Tests for the seeded property suites
"""

import time

import pytest
import numpy as np
import pandas as pd
import sys
from pathlib import Path

# Add project root to path
sys.path.insert(0, str(Path(__file__).parent.parent))

from src.errors import DecompositionInconsistent
from src.hermitian_core import DEFAULT_TOLERANCES
from src.property_suite import (
    SUITES,
    PropertySuiteRunner,
    _guarded,
    axiom_instance,
    classical_instance,
    decomposition_instance,
    intersection_instance,
    operator_property_instance,
    summarize,
    two_dimensional_instance,
)
from tests import TEST_CONFIG

COUNT = TEST_CONFIG['suite_count']


class TestInstances:
    """Test cases for single suite instances"""

    @pytest.fixture(scope="class")
    def seeds(self):
        return np.random.SeedSequence(TEST_CONFIG['seed']).spawn(4)

    def test_axiom_instance(self, seeds):
        row = axiom_instance(seeds[0], DEFAULT_TOLERANCES, dims=(2, 5), states=4)
        assert row['passed'], row
        assert row['failed_axioms'] == ''
        assert 2 <= row['dim'] <= 5

    def test_intersection_instance(self, seeds):
        row = intersection_instance(seeds[1], DEFAULT_TOLERANCES, dims=(2, 5))
        assert row['passed'], row
        assert row['max_disagreement'] <= 1e-6
        assert 0 <= row['intersection_rank'] <= min(row['rank_p'], row['rank_q'])

    def test_decomposition_instance(self, seeds):
        row = decomposition_instance(seeds[2], DEFAULT_TOLERANCES, dims=(2, 5))
        assert row['passed'], row
        assert row['block_dims_consistent']

    @pytest.mark.parametrize('index', range(4))
    def test_operator_property_instance(self, seeds, index):
        row = operator_property_instance(seeds[index], DEFAULT_TOLERANCES, dims=(2, 6))
        assert row['passed'], row

    def test_two_dimensional_instance(self, seeds):
        row = two_dimensional_instance(seeds[0], DEFAULT_TOLERANCES)
        assert row['passed']
        assert 0.0 <= row['transition_probability'] <= 1.0

    def test_classical_instance(self, seeds):
        row = classical_instance(seeds[3], DEFAULT_TOLERANCES, max_outcomes=6)
        assert row['passed'], row
        assert row['exhaustive']

    def test_instances_are_reproducible(self, seeds):
        first = operator_property_instance(seeds[0], DEFAULT_TOLERANCES, dims=(2, 6))
        second = operator_property_instance(seeds[0], DEFAULT_TOLERANCES, dims=(2, 6))
        assert first == second

    def test_guarded_turns_errors_into_rows(self):
        def failing(seed, tol):
            raise DecompositionInconsistent('degenerate generic block')

        row = _guarded(failing, 0, DEFAULT_TOLERANCES)
        assert row == {
            'passed': False,
            'error': 'DecompositionInconsistent',
            'message': 'degenerate generic block',
        }


class TestPropertySuiteRunner:
    """Test cases for the suite runner"""

    @pytest.fixture(scope="class")
    def runner(self):
        return PropertySuiteRunner(seed=TEST_CONFIG['seed'])

    @pytest.mark.parametrize('name', SUITES)
    def test_small_suites_pass(self, runner, name):
        frame = runner.run_all([name], {name: COUNT})[name]
        assert isinstance(frame, pd.DataFrame)
        assert len(frame) == COUNT
        assert list(frame['instance']) == list(range(COUNT))
        assert frame['passed'].all(), frame[~frame['passed']].to_dict(orient='records')

    def test_seeded_runs_repeat(self, runner):
        first = runner.decomposition_suite(count=COUNT, dims=(2, 5))
        second = runner.decomposition_suite(count=COUNT, dims=(2, 5))
        pd.testing.assert_frame_equal(first, second)

    def test_suites_use_separate_streams(self, runner):
        """Different suites draw different instances from the same seed"""
        axioms = runner.axiom_suite(count=COUNT, dims=(2, 8), states=2)
        decompositions = runner.decomposition_suite(count=COUNT, dims=(2, 8))
        columns = ['dim', 'rank_p', 'rank_q']
        assert axioms[columns].values.tolist() != decompositions[columns].values.tolist()

    def test_unknown_suite(self, runner):
        with pytest.raises(ValueError):
            runner.run_all(['benchmarks'])

    def test_summarize(self, runner):
        frames = runner.run_all(['two_dimensional', 'classical'], {'two_dimensional': 3, 'classical': 2})
        summary = summarize(frames)
        assert list(summary.columns) == ['suite', 'instances', 'passed', 'failed', 'errors']
        assert summary.set_index('suite').loc['two_dimensional', 'instances'] == 3
        assert (summary['failed'] == 0).all()

    @pytest.mark.slow
    def test_parallel_matches_serial(self):
        serial = PropertySuiteRunner(seed=1).intersection_suite(count=8)
        parallel = PropertySuiteRunner(seed=1, n_jobs=2).intersection_suite(count=8)
        pd.testing.assert_frame_equal(serial, parallel)

    @pytest.mark.slow
    @pytest.mark.integration
    def test_full_suites(self):
        """Default suite sizes, all instances pass"""
        frames = PropertySuiteRunner(seed=0, n_jobs=-1).run_all()
        summary = summarize(frames)
        assert set(summary['suite']) == set(SUITES)
        assert (summary['failed'] == 0).all(), summary.to_string()

    @pytest.mark.slow
    @pytest.mark.integration
    def test_axiom_suite_runtime(self):
        """500 seeded pairs across dims 2-8 pass within the 30 s budget"""
        start = time.perf_counter()
        frame = PropertySuiteRunner(seed=0, n_jobs=-1).axiom_suite(count=500)
        elapsed = time.perf_counter() - start

        assert frame['passed'].all(), frame[~frame['passed']].to_dict(orient='records')
        assert elapsed < 30.0

    @pytest.mark.slow
    @pytest.mark.integration
    def test_intersection_suite_at_seed_zero(self):
        """All four methods agree on 500 pairs; only sub-1e-3 angles may be exempt"""
        frame = PropertySuiteRunner(seed=0, n_jobs=-1).intersection_suite(count=500)
        assert frame['passed'].all(), frame[~frame['passed']].to_dict(orient='records')

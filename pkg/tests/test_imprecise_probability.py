"""
Unit tests for the lower/upper probability operators, intervals, dominance
and the axiom checker
"""


import pytest
import numpy as np
import sys
from pathlib import Path

from hypothesis import given, settings
from hypothesis import strategies as st

# Add project root to path
sys.path.insert(0, str(Path(__file__).parent.parent))

from src.errors import ConditionOnNullEvent, DimensionMismatch, IntervalOutOfRange, ValidationError
from src.hermitian_core import (
    DensityMatrix,
    Projector,
    identity_projector,
    operator_norm,
    spectral_basis,
    zero_projector,
)
from src.imprecise_probability import (
    ProbabilityInterval,
    check_axioms,
    complement_identity_defect,
    complementary_subadditivity_order,
    conditional_interval,
    dominance_spectrum,
    find_non_subadditivity_witness,
    generic_spectrum_defect,
    interval_distance,
    lower_operator,
    monotonicity_order,
    orthogonal_refinement_defect,
    orthogonal_sum,
    probability_interval,
    superadditivity_order,
    sure_dominance,
    trace_identity_defect,
    two_dimensional_closed_form_defect,
    upper_operator,
    upper_operator_via_span,
)
from src.projector_geometry import span_sum_projector
from src.sampling import (
    commuting_density,
    haar_unitary,
    random_density,
    random_projector,
    random_projector_pair,
)
from tests import TEST_CONFIG

TOL = TEST_CONFIG['numeric_tolerance']

AXIOM_NAMES = {
    'A1_order', 'A2_symmetry', 'A3_commuting_reduction', 'A4_sandwich_sampled',
    'A4_sandwich_operator', 'A5_commutation', 'mutual_commutation', 'marginals',
}


def diagonal(*entries) -> Projector:
    return Projector.from_basis(np.eye(len(entries))[:, [i for i, e in enumerate(entries) if e]],
                                len(entries))


def rotated_pair(angle: float):
    p = Projector.from_basis(np.array([[1.0], [0.0]], dtype=complex))
    q = Projector.from_basis(np.array([[np.cos(angle)], [np.sin(angle)]], dtype=complex))
    return p, q


def random_pair(seed: int, dim: int = 5):
    rng = np.random.default_rng([TEST_CONFIG['seed'], seed])
    return random_projector_pair(dim, rng)


class TestProbabilityInterval:
    """Test cases for the interval value type"""

    def test_rounding_slack_is_clamped(self):
        interval = ProbabilityInterval(-1e-13, 1 + 1e-13)
        assert interval.lp == 0.0
        assert interval.up == 1.0

    @pytest.mark.parametrize('lp, up', [(0.6, 0.4), (-0.1, 0.5), (0.2, 1.5)])
    def test_invalid_intervals(self, lp, up):
        with pytest.raises(IntervalOutOfRange):
            ProbabilityInterval(lp, up)

    def test_distance(self):
        a, b = ProbabilityInterval(0.1, 0.5), ProbabilityInterval(0.2, 0.9)
        assert interval_distance(a, b) == pytest.approx(0.4)
        assert interval_distance(a, a) == 0.0

    def test_to_dict(self):
        assert ProbabilityInterval(0.25, 0.5).to_dict() == {'lower': 0.25, 'upper': 0.5, 'width': 0.25}


class TestProbabilityOperators:
    """Test cases for lower(p, q) and upper(p, q)"""

    def test_commuting_pair_reduces_to_product(self):
        p, q = diagonal(1, 1, 0), diagonal(1, 0, 1)
        product = p.matrix @ q.matrix
        assert np.allclose(lower_operator(p, q).matrix, product)
        assert np.allclose(upper_operator(p, q).matrix, product)

    @pytest.mark.parametrize('angle', TEST_CONFIG['angles'])
    def test_two_dimensional_closed_form(self, angle):
        """Rank-one pair in dim 2: lower = 0 and upper = cos^2 I"""
        p, q = rotated_pair(angle)
        assert np.allclose(lower_operator(p, q).matrix, 0)
        assert np.allclose(upper_operator(p, q).matrix, np.cos(angle) ** 2 * np.eye(2))
        assert two_dimensional_closed_form_defect(p, q) < TOL

    def test_closed_form_needs_dim_two(self):
        with pytest.raises(ValidationError):
            two_dimensional_closed_form_defect(diagonal(1, 0, 0), diagonal(0, 1, 0))

    def test_marginals(self):
        """omega(p, I) = p and omega(p, 0) = 0"""
        p, _ = random_pair(1)
        identity, zero = identity_projector(p.dim), zero_projector(p.dim)
        for operator in (lower_operator, upper_operator):
            assert np.allclose(operator(p, identity).matrix, p.matrix, atol=TOL)
            assert np.allclose(operator(p, zero).matrix, 0, atol=TOL)

    @pytest.mark.parametrize('seed', range(5))
    def test_span_form_of_upper(self, seed):
        p, q = random_pair(seed)
        assert operator_norm(upper_operator(p, q).matrix - upper_operator_via_span(p, q).matrix) < TOL

    @pytest.mark.parametrize('seed', range(5))
    def test_complement_identity(self, seed):
        assert complement_identity_defect(*random_pair(seed)) < TOL

    @pytest.mark.parametrize('seed', range(5))
    def test_trace_identity(self, seed):
        assert trace_identity_defect(*random_pair(seed)) < TOL

    @pytest.mark.parametrize('seed', range(5))
    def test_generic_spectrum(self, seed):
        """upper is cos^2 of the principal angles, doubled, on the generic block"""
        assert generic_spectrum_defect(*random_pair(seed)) < TOL

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            upper_operator(diagonal(1, 0), diagonal(1, 0, 0))


class TestOrderProperties:
    """Test cases for superadditivity, subadditivity and monotonicity"""

    @pytest.fixture(scope="class")
    def split(self):
        """Random p with an orthogonal split q + k"""
        rng = np.random.default_rng(TEST_CONFIG['seed'])
        basis = haar_unitary(6, rng)
        p = random_projector(6, 3, rng)
        q = Projector.from_basis(basis[:, :2], 6)
        k = Projector.from_basis(basis[:, 2:4], 6)
        return p, q, k

    def test_superadditivity(self, split):
        assert superadditivity_order(*split)

    def test_orthogonal_sum_requires_orthogonality(self, split):
        p, q, _ = split
        with pytest.raises(ValidationError):
            orthogonal_sum(p, q)

    @pytest.mark.parametrize('seed', range(5))
    def test_complementary_subadditivity(self, seed):
        assert complementary_subadditivity_order(*random_pair(seed))

    def test_monotonicity(self):
        """Widening both events to p' >= p, q and q' >= p, q raises both operators"""
        rng = np.random.default_rng(TEST_CONFIG['seed'])
        p, q = random_projector_pair(6, rng, ranks=(2, 1))
        span = span_sum_projector(p, q)
        outside = spectral_basis(span, 0.0)
        assert outside.shape[1] == 3

        extra = Projector.from_basis((outside @ haar_unitary(3, rng))[:, :1], 6)
        wide = orthogonal_sum(span, extra)

        verdict = monotonicity_order(p, q, wide, span)
        assert verdict
        assert verdict.min_eigenvalue >= -TOL

    def test_monotonicity_requires_containment(self):
        p, q = diagonal(1, 0, 0), diagonal(0, 1, 0)
        with pytest.raises(ValidationError):
            monotonicity_order(p, q, diagonal(1, 0, 1), diagonal(1, 1, 0))

    def test_orthogonal_refinement(self):
        """k orthogonal to p and q peels off g(I - p, I - q)"""
        rng = np.random.default_rng(TEST_CONFIG['seed'])
        basis = haar_unitary(6, rng)
        p = Projector.from_basis(basis[:, :4] @ haar_unitary(4, rng)[:, :2], 6)
        q = Projector.from_basis(basis[:, :4] @ haar_unitary(4, rng)[:, :2], 6)
        k = Projector.from_basis(basis[:, 4:5], 6)

        assert orthogonal_refinement_defect(p, q, k) < TOL

    def test_orthogonal_refinement_rejects_overlap(self):
        with pytest.raises(ValidationError):
            orthogonal_refinement_defect(diagonal(1, 0, 0), diagonal(0, 1, 0), diagonal(1, 0, 0))

    def test_non_subadditivity_witness(self):
        """Complement meets of two orthogonal rank-one events can exceed I"""
        witness = find_non_subadditivity_witness(seed=TEST_CONFIG['seed'], max_trials=100)
        assert witness is not None
        assert witness.excess > 0
        assert witness.p.rank == 1
        assert set(witness.to_dict()) >= {'excess_eigenvalue', 'trials', 'p', 'q', 'k'}


class TestIntervals:
    """Test cases for probability and conditional intervals"""

    def test_commuting_interval_is_precise(self):
        p, q = diagonal(1, 1, 0), diagonal(0, 1, 1)
        rho = DensityMatrix.pure([1, 1, 1])
        interval = probability_interval(rho, p, q)
        assert interval.is_precise()
        assert interval.lp == pytest.approx(1 / 3)

    @settings(max_examples=20, deadline=None)
    @given(st.integers(min_value=0, max_value=2 ** 32 - 1))
    def test_interval_contains_joint_on_commuting_states(self, seed):
        """For rho commuting with q, tr(rho pq) lies in the interval"""
        rng = np.random.default_rng(seed)
        p, q = random_projector_pair(4, rng)
        rho = commuting_density(q, rng)
        interval = probability_interval(rho, p, q)
        joint = float(np.real(np.trace(rho.matrix @ p.matrix @ q.matrix)))
        assert interval.lp - TOL <= joint <= interval.up + TOL

    def test_random_state_interval_is_valid(self):
        rng = np.random.default_rng(TEST_CONFIG['seed'])
        p, q = random_projector_pair(5, rng, ranks=(3, 3))
        interval = probability_interval(random_density(5, rng), p, q)
        assert 0.0 <= interval.lp <= interval.up <= 1.0

    def test_conditional_interval(self):
        """Dividing by tr(rho q)"""
        p, q = rotated_pair(np.pi / 3)
        rho = DensityMatrix.maximally_mixed(2)
        interval = conditional_interval(rho, p, q)
        assert interval.lp == pytest.approx(0.0)
        assert interval.up == pytest.approx(0.25 / 0.5)

    def test_conditional_upper_above_one_raises(self):
        """A divided upper bound above 1 is rejected, not clamped"""
        p, q = rotated_pair(np.pi / 6)
        rho = DensityMatrix.pure([0, 1])
        # joint upper cos^2 = 0.75 over tr(rho q) = sin^2 = 0.25
        with pytest.raises(IntervalOutOfRange, match='exceeds 1'):
            conditional_interval(rho, p, q)

    def test_condition_on_null_event(self):
        p, q = diagonal(1, 0), diagonal(1, 0)
        with pytest.raises(ConditionOnNullEvent):
            conditional_interval(DensityMatrix.pure([0, 1]), p, q)


class TestDominance:
    """Test cases for sure dominance"""

    def test_dominance_spectrum_and_witness(self):
        first = (diagonal(1, 0), diagonal(1, 0))
        second = (diagonal(0, 1), diagonal(0, 1))
        spectrum = dominance_spectrum(first, second)

        assert spectrum.eigenvalues == pytest.approx([-1.0, 1.0])
        assert spectrum.certifies_dominance
        verdict = sure_dominance(DensityMatrix.pure(spectrum.witness), first, second)
        assert verdict.dominates
        assert verdict.margin == pytest.approx(1.0)

    def test_no_dominance_when_upper_covers(self):
        p, q = rotated_pair(0.3)
        spectrum = dominance_spectrum((p, q), (p, q))
        assert not spectrum.certifies_dominance
        assert spectrum.witness is None
        assert spectrum.to_dict()['dominating_state_exists'] is False


class TestAxioms:
    """Test cases for the axiom checker"""

    @pytest.mark.parametrize('seed', range(5))
    def test_random_pairs_pass(self, seed):
        report = check_axioms(*random_pair(seed), seed=seed)
        assert set(report.results) == AXIOM_NAMES
        assert report.passed, report.failed()
        assert report.states_checked == 10

    def test_commuting_reduction_applies(self):
        report = check_axioms(diagonal(1, 1, 0), diagonal(1, 0, 1))
        assert report.passed
        assert 'not applicable' not in report.results['A3_commuting_reduction'].note

    def test_commuting_reduction_skipped(self):
        report = check_axioms(*rotated_pair(0.4))
        assert report.results['A3_commuting_reduction'].note.startswith('not applicable')

    def test_extra_states_filtered(self):
        """Only supplied states commuting with p or q enter the sampled sandwich"""
        p, q = rotated_pair(0.4)
        commuting = DensityMatrix.pure([1, 0])
        generic = DensityMatrix.pure([1, 1j])
        report = check_axioms(p, q, states=[commuting, generic], synthesized_states=0)
        assert report.states_checked == 1

    def test_report_to_dict(self):
        document = check_axioms(*rotated_pair(0.4)).to_dict()
        assert document['passed'] is True
        assert set(document['axioms']) == AXIOM_NAMES
        assert document['axioms']['A1_order']['witness'] is None

"""
Lower and upper probability operators for a pair of projectors.

    lower(p, q) = g(p, q)
    upper(p, q) = I - (p - q)^2 - g(I - p, I - q)

Probability intervals on states, conditional intervals, the Hausdorff
distance between intervals, sure-dominance queries and the axiom checker.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from src.errors import ConditionOnNullEvent, IntervalOutOfRange, ValidationError
from src.hermitian_core import (
    DEFAULT_TOLERANCES,
    DensityMatrix,
    HermitianOperator,
    Projector,
    PSDVerdict,
    Tolerances,
    commutator,
    eigh,
    identity_projector,
    operator_norm,
    psd_order,
    require_same_dim,
    zero_projector,
)
from src.matrix_io import matrix_to_document
from src.projector_geometry import (
    IntersectionMethod,
    cs_decompose,
    intersection_projector,
    joint_commutant_lift,
    span_sum_projector,
)
from src.sampling import commuting_density, random_projector

logger = logging.getLogger(__name__)

INTERVAL_SLACK = 1e-12
DOMINANCE_MARGIN = 1e-12
AXIOM_TOLERANCE = 1e-8

ProjectorPair = Tuple[Projector, Projector]


@dataclass(frozen=True)
class ProbabilityInterval:
    """Interval (lp, up) with 0 <= lp <= up <= 1 up to a 1e-12 rounding slack."""

    lp: float
    up: float

    def __post_init__(self):
        lp, up = float(self.lp), float(self.up)
        if not (-INTERVAL_SLACK <= lp <= up + INTERVAL_SLACK and up <= 1 + INTERVAL_SLACK):
            raise IntervalOutOfRange(f"Invalid probability interval ({lp!r}, {up!r})")
        lp = min(max(lp, 0.0), 1.0)
        up = min(max(up, lp), 1.0)
        object.__setattr__(self, 'lp', lp)
        object.__setattr__(self, 'up', up)

    @property
    def width(self) -> float:
        return self.up - self.lp

    def is_precise(self, tol: float = INTERVAL_SLACK) -> bool:
        return self.width <= tol

    def to_dict(self) -> dict:
        return {'lower': self.lp, 'upper': self.up, 'width': self.width}


@dataclass(frozen=True, eq=False)
class ProbabilityOperatorPair:
    lower: HermitianOperator
    upper: HermitianOperator
    p: Projector
    q: Projector

    def uncertainty(self) -> np.ndarray:
        """upper - lower"""
        return self.upper.matrix - self.lower.matrix

    def to_dict(self) -> dict:
        return {
            'lower': matrix_to_document(self.lower.matrix),
            'upper': matrix_to_document(self.upper.matrix),
            'commuting': self.p.commutes_with(self.q),
        }


@dataclass(frozen=True)
class DominanceVerdict:
    dominates: bool
    margin: float
    lower_first: float
    upper_second: float

    def to_dict(self) -> dict:
        return {
            'surely_more_probable': self.dominates,
            'margin': self.margin,
            'lower_first': self.lower_first,
            'upper_second': self.upper_second,
        }


@dataclass(frozen=True, eq=False)
class DominanceSpectrum:
    eigenvalues: np.ndarray
    witness: Optional[np.ndarray]
    commutator_norm: float

    @property
    def certifies_dominance(self) -> bool:
        return self.witness is not None

    def to_dict(self) -> dict:
        witness = None
        if self.witness is not None:
            witness = [[float(z.real), float(z.imag)] for z in self.witness]
        return {
            'eigenvalues': self.eigenvalues.tolist(),
            'dominating_state_exists': self.certifies_dominance,
            'witness_vector': witness,
            'commutator_norm': self.commutator_norm,
        }


@dataclass(frozen=True, eq=False)
class AxiomResult:
    passed: bool
    worst_margin: float
    witness: Optional[np.ndarray] = None
    note: str = ''

    def to_dict(self) -> dict:
        return {
            'pass': self.passed,
            'worst_margin': self.worst_margin,
            'witness': matrix_to_document(self.witness) if self.witness is not None else None,
            'note': self.note,
        }


@dataclass(frozen=True, eq=False)
class AxiomReport:
    results: Dict[str, AxiomResult] = field(default_factory=dict)
    states_checked: int = 0

    @property
    def passed(self) -> bool:
        return all(result.passed for result in self.results.values())

    def failed(self) -> List[str]:
        return [name for name, result in self.results.items() if not result.passed]

    @property
    def worst_margin(self) -> float:
        return min((result.worst_margin for result in self.results.values()), default=0.0)

    def to_dict(self) -> dict:
        return {
            'passed': self.passed,
            'states_checked': self.states_checked,
            'axioms': {name: result.to_dict() for name, result in self.results.items()},
        }


@dataclass(frozen=True, eq=False)
class NonSubadditivityWitness:
    p: Projector
    q: Projector
    k: Projector
    excess: float
    trials: int

    def to_dict(self) -> dict:
        return {
            'excess_eigenvalue': self.excess,
            'trials': self.trials,
            'p': matrix_to_document(self.p.matrix),
            'q': matrix_to_document(self.q.matrix),
            'k': matrix_to_document(self.k.matrix),
        }


def lower_operator(p: Projector, q: Projector,
                   tol: Tolerances = DEFAULT_TOLERANCES) -> HermitianOperator:
    """Lower probability operator g(p, q)."""
    return intersection_projector(p, q, IntersectionMethod.SPECTRAL, tol).operator


def upper_operator(p: Projector, q: Projector,
                   tol: Tolerances = DEFAULT_TOLERANCES) -> HermitianOperator:
    """Upper probability operator I - (p - q)^2 - g(I - p, I - q)."""
    dim = require_same_dim(p, q)
    difference = p.matrix - q.matrix
    complement_meet = intersection_projector(p.complement(), q.complement(),
                                             IntersectionMethod.SPECTRAL, tol)
    matrix = np.eye(dim) - difference @ difference - complement_meet.matrix
    return HermitianOperator.trusted(matrix)


def upper_operator_via_span(p: Projector, q: Projector,
                            tol: Tolerances = DEFAULT_TOLERANCES) -> HermitianOperator:
    """Equivalent form (I - p - q)^2 - I + (p+q)(p+q)^-."""
    dim = require_same_dim(p, q)
    shifted = np.eye(dim) - p.matrix - q.matrix
    span = span_sum_projector(p, q, tol)
    return HermitianOperator.trusted(shifted @ shifted - np.eye(dim) + span.matrix)


def probability_operators(p: Projector, q: Projector,
                          tol: Tolerances = DEFAULT_TOLERANCES) -> ProbabilityOperatorPair:
    return ProbabilityOperatorPair(lower_operator(p, q, tol), upper_operator(p, q, tol), p, q)


def probability_interval(rho: DensityMatrix, p: Projector, q: Projector,
                         tol: Tolerances = DEFAULT_TOLERANCES,
                         operators: Optional[ProbabilityOperatorPair] = None) -> ProbabilityInterval:
    """
    Interval (tr(rho lower), tr(rho upper)); exactly tr(rho pq) for commuting p, q.

    Raises:
        DimensionMismatch, IntervalOutOfRange
    """
    require_same_dim(rho, p, q)
    if p.commutes_with(q, tol.herm):
        value = rho.expectation(p.matrix @ q.matrix)
        return ProbabilityInterval(value, value)

    operators = operators or probability_operators(p, q, tol)
    return ProbabilityInterval(rho.expectation(operators.lower), rho.expectation(operators.upper))


def conditional_interval(rho: DensityMatrix, p: Projector, q: Projector,
                         tol: Tolerances = DEFAULT_TOLERANCES) -> ProbabilityInterval:
    """
    Both bounds of the joint interval divided by tr(rho q).

    Raises:
        ConditionOnNullEvent: if tr(rho q) <= tol.div
        IntervalOutOfRange: if a divided bound leaves [0, 1]; never clamped
    """
    weight = rho.expectation(q)
    if weight <= tol.div:
        raise ConditionOnNullEvent(f"tr(rho q) = {weight:.3e} is not above {tol.div:.1e}")

    joint = probability_interval(rho, p, q, tol)
    lp, up = joint.lp / weight, joint.up / weight
    if up > 1 + INTERVAL_SLACK:
        raise IntervalOutOfRange(
            f"Conditional upper bound {up:.6g} exceeds 1 (joint upper {joint.up:.6g}, "
            f"tr(rho q) = {weight:.6g})"
        )
    return ProbabilityInterval(lp, up)


def interval_distance(a: ProbabilityInterval, b: ProbabilityInterval) -> float:
    """Hausdorff distance max(|lp - lp'|, |up - up'|)."""
    return max(abs(a.lp - b.lp), abs(a.up - b.up))


def sure_dominance(rho: DensityMatrix, pair1: ProjectorPair, pair2: ProjectorPair,
                   tol: Tolerances = DEFAULT_TOLERANCES) -> DominanceVerdict:
    """Pair 1 is surely more probable than pair 2 on rho iff lower_1 > upper_2."""
    lower_first = probability_interval(rho, *pair1, tol).lp
    upper_second = probability_interval(rho, *pair2, tol).up
    margin = lower_first - upper_second
    return DominanceVerdict(margin > DOMINANCE_MARGIN, margin, lower_first, upper_second)


def dominance_spectrum(pair1: ProjectorPair, pair2: ProjectorPair,
                       tol: Tolerances = DEFAULT_TOLERANCES) -> DominanceSpectrum:
    """
    Ascending eigenvalues of lower(pair1) - upper(pair2).

    A positive eigenvalue certifies a dominating state: its eigenvector,
    taken as a pure state, is returned as the witness.
    """
    require_same_dim(*pair1, *pair2)
    lower = lower_operator(*pair1, tol).matrix
    upper = upper_operator(*pair2, tol).matrix

    spectrum = eigh(lower - upper)
    witness = None
    if spectrum.eigenvalues[-1] > DOMINANCE_MARGIN:
        witness = spectrum.eigenvectors[:, -1].copy()

    return DominanceSpectrum(
        eigenvalues=spectrum.eigenvalues.copy(),
        witness=witness,
        commutator_norm=operator_norm(commutator(lower, upper)),
    )


def _min_eigenpair(matrix: np.ndarray) -> Tuple[float, np.ndarray]:
    spectrum = eigh((matrix + matrix.conj().T) / 2)
    return float(spectrum.eigenvalues[0]), spectrum.eigenvectors[:, 0]


def _pinch(matrix: np.ndarray, projector: np.ndarray) -> np.ndarray:
    complement = np.eye(projector.shape[0]) - projector
    return projector @ matrix @ projector + complement @ matrix @ complement


def _state_witness(vector: np.ndarray) -> np.ndarray:
    return np.outer(vector, vector.conj())


def _equality_result(defect: float, check_tol: float, note: str = '') -> AxiomResult:
    return AxiomResult(defect <= check_tol, -defect, None, note)


def _ordered_result(candidates, check_tol: float, note: str = '') -> AxiomResult:
    value, vector = min(candidates, key=lambda item: item[0])
    witness = _state_witness(vector) if value < -check_tol else None
    return AxiomResult(value >= -check_tol, value, witness, note)


def check_axioms(p: Projector, q: Projector,
                 states: Optional[Sequence[DensityMatrix]] = None,
                 tol: Tolerances = DEFAULT_TOLERANCES,
                 check_tol: float = AXIOM_TOLERANCE,
                 seed: int = 0,
                 synthesized_states: int = 10) -> AxiomReport:
    """
    Check the lower/upper operator axioms for one projector pair.

    Args:
        p, q: projector pair
        states: extra states; only those commuting with p or q enter the
            sandwich check
        tol: tolerance bundle for the underlying operators
        check_tol: pass threshold for every margin
        seed: seed for the synthesized commuting states
        synthesized_states: number of states built to commute with q
            (first half) and p (second half)

    Returns:
        AxiomReport with one entry per axiom; the sampled sandwich check is
        evidence, the pinching check is an operator-level certificate
    """
    dim = require_same_dim(p, q, *(states or []))
    pm, qm = p.matrix, q.matrix

    pair = probability_operators(p, q, tol)
    swapped = probability_operators(q, p, tol)
    lower, upper = pair.lower.matrix, pair.upper.matrix
    identity = np.eye(dim)

    results = {}

    results['A1_order'] = _ordered_result(
        [
            _min_eigenpair(lower),
            _min_eigenpair(upper - lower),
            _min_eigenpair(identity - upper),
        ],
        check_tol,
        '0 <= lower <= upper <= I',
    )

    symmetry = max(
        operator_norm(lower - swapped.lower.matrix),
        operator_norm(upper - swapped.upper.matrix),
    )
    results['A2_symmetry'] = _equality_result(symmetry, check_tol, 'invariance under p <-> q')

    if operator_norm(commutator(pm, qm)) <= check_tol:
        product = pm @ qm
        reduction = max(operator_norm(lower - product), operator_norm(upper - product))
        results['A3_commuting_reduction'] = _equality_result(reduction, check_tol, 'lower = upper = pq')
    else:
        results['A3_commuting_reduction'] = AxiomResult(True, 0.0, None, 'not applicable: [p, q] != 0')

    # sandwich on states commuting with p or q
    rng = np.random.default_rng(seed)
    sampled = [
        rho for rho in (states or [])
        if operator_norm(commutator(rho, pm)) <= check_tol
        or operator_norm(commutator(rho, qm)) <= check_tol
    ]
    half = (synthesized_states + 1) // 2
    sampled += [commuting_density(q, rng) for _ in range(half)]
    sampled += [commuting_density(p, rng) for _ in range(synthesized_states - half)]

    worst, worst_state = 0.0, None
    for rho in sampled:
        joint = float(np.real(np.trace(rho.matrix @ pm @ qm)))
        margin = min(joint - rho.expectation(lower), rho.expectation(upper) - joint)
        if worst_state is None or margin < worst:
            worst, worst_state = margin, rho
    passed = worst >= -check_tol
    results['A4_sandwich_sampled'] = AxiomResult(
        passed,
        worst,
        None if passed else worst_state.matrix.copy(),
        f'{len(sampled)} commuting states sampled (evidence, not proof)',
    )

    results['A4_sandwich_operator'] = _ordered_result(
        [
            _min_eigenpair(_pinch(qm @ pm @ qm - lower, qm)),
            _min_eigenpair(_pinch(upper - qm @ pm @ qm, qm)),
            _min_eigenpair(_pinch(pm @ qm @ pm - lower, pm)),
            _min_eigenpair(_pinch(upper - pm @ qm @ pm, pm)),
        ],
        check_tol,
        'pinching certificate over all states commuting with p or q',
    )

    commutation = max(
        operator_norm(commutator(operator, projector))
        for operator in (lower, upper)
        for projector in (pm, qm)
    )
    results['A5_commutation'] = _equality_result(commutation, check_tol, '[lower|upper, p|q] = 0')

    results['mutual_commutation'] = _equality_result(
        operator_norm(commutator(lower, upper)), check_tol, '[lower, upper] = 0'
    )

    results['marginals'] = _equality_result(_marginal_defect(p, q, tol), check_tol,
                                            'omega(p, I) = p and omega(p, 0) = 0')

    report = AxiomReport(results, states_checked=len(sampled))
    if not report.passed:
        logger.warning(f"Axiom check failed: {', '.join(report.failed())}")
    return report


def _marginal_defect(p: Projector, q: Projector, tol: Tolerances) -> float:
    dim = p.dim
    identity, zero = identity_projector(dim), zero_projector(dim)
    defect = 0.0
    for projector in (p, q):
        for operator in (lower_operator, upper_operator):
            defect = max(
                defect,
                operator_norm(operator(projector, identity, tol).matrix - projector.matrix),
                operator_norm(operator(projector, zero, tol).matrix),
            )
    return defect


def complement_identity_defect(p: Projector, q: Projector,
                               tol: Tolerances = DEFAULT_TOLERANCES) -> float:
    """|| (upper(p,q) - upper(p',q')) - (lower(p,q) - lower(p',q')) || with p' = I - p."""
    p_c, q_c = p.complement(), q.complement()
    upper_gap = upper_operator(p, q, tol).matrix - upper_operator(p_c, q_c, tol).matrix
    lower_gap = lower_operator(p, q, tol).matrix - lower_operator(p_c, q_c, tol).matrix
    return operator_norm(upper_gap - lower_gap)


def orthogonal_sum(q: Projector, k: Projector, tol: Tolerances = DEFAULT_TOLERANCES) -> Projector:
    """q + k for mutually orthogonal projectors."""
    require_same_dim(q, k)
    overlap = operator_norm(q.matrix @ k.matrix)
    if overlap > tol.proj:
        raise ValidationError(f"Projectors are not orthogonal: ||qk|| = {overlap:.3e}")
    return Projector(HermitianOperator.trusted(q.matrix + k.matrix), q.rank + k.rank)


def superadditivity_order(p: Projector, q: Projector, k: Projector,
                          tol: Tolerances = DEFAULT_TOLERANCES) -> PSDVerdict:
    """lower(p, q + k) >= lower(p, q) + lower(p, k) for qk = 0."""
    joint = lower_operator(p, orthogonal_sum(q, k, tol), tol).matrix
    parts = lower_operator(p, q, tol).matrix + lower_operator(p, k, tol).matrix
    return psd_order(joint, parts, tol.psd)


def complementary_subadditivity_order(p: Projector, q: Projector,
                                      tol: Tolerances = DEFAULT_TOLERANCES) -> PSDVerdict:
    """upper(p, q) + upper(p, I - q) >= upper(p, I) = p."""
    parts = upper_operator(p, q, tol).matrix + upper_operator(p, q.complement(), tol).matrix
    joint = upper_operator(p, identity_projector(p.dim), tol).matrix
    return psd_order(parts, joint, tol.psd)


def monotonicity_order(p: Projector, q: Projector, p_wide: Projector, q_wide: Projector,
                       tol: Tolerances = DEFAULT_TOLERANCES) -> PSDVerdict:
    """
    omega(p', q') >= omega(p, q) for omega in {lower, upper} when p' and q'
    both dominate p and q. The verdict carries the smaller of the two margins.
    """
    span = span_sum_projector(p, q, tol).matrix
    for wide in (p_wide, q_wide):
        spill = operator_norm(span - wide.matrix @ span)
        if spill > tol.proj:
            raise ValidationError(f"Widened projector does not contain ran(p) + ran(q): {spill:.3e}")

    verdicts = [
        psd_order(operator(p_wide, q_wide, tol), operator(p, q, tol), tol.psd)
        for operator in (lower_operator, upper_operator)
    ]
    smallest = min(verdict.min_eigenvalue for verdict in verdicts)
    return PSDVerdict(all(verdicts), smallest)


def trace_identity_defect(p: Projector, q: Projector,
                          tol: Tolerances = DEFAULT_TOLERANCES) -> float:
    """|tr(q - g(q, I - p)) - tr(p - g(p, I - q))|"""
    left = q.rank - lower_operator(q, p.complement(), tol).matrix.trace()
    right = p.rank - lower_operator(p, q.complement(), tol).matrix.trace()
    return float(abs(left - right))


def two_dimensional_closed_form_defect(p: Projector, q: Projector,
                                       tol: Tolerances = DEFAULT_TOLERANCES) -> float:
    """
    In dim 2 with rank-1 p, q: lower = 0 and upper = tr(pq) I.
    Returns max(||lower||, ||upper - tr(pq) I||).
    """
    dim = require_same_dim(p, q)
    if dim != 2 or p.rank != 1 or q.rank != 1:
        raise ValidationError(f"Closed form needs rank-1 projectors in dim 2, got dim {dim}, "
                              f"ranks {p.rank} and {q.rank}")
    transition = float(np.real(np.trace(p.matrix @ q.matrix)))
    return max(
        operator_norm(lower_operator(p, q, tol)),
        operator_norm(upper_operator(p, q, tol).matrix - transition * np.eye(2)),
    )


def generic_spectrum_defect(p: Projector, q: Projector,
                            tol: Tolerances = DEFAULT_TOLERANCES) -> float:
    """
    || upper - (C^2 (+) C^2 on the generic block + projector onto ran p & ran q) ||

    Zero exactly when the generic-block spectrum of the upper operator is the
    doubly degenerate cos^2 of the principal angles.
    """
    decomposition = cs_decompose(p, q, tol)
    expected = joint_commutant_lift(decomposition) + decomposition.block_projectors['11'].matrix
    return operator_norm(upper_operator(p, q, tol).matrix - expected)


def orthogonal_refinement_defect(p: Projector, q: Projector, k: Projector,
                                 tol: Tolerances = DEFAULT_TOLERANCES) -> float:
    """|| g(I-p, I-q) - k - g(I-p, I-q-k) || for k orthogonal to both p and q."""
    require_same_dim(p, q, k)
    for name, other in (('p', p), ('q', q)):
        overlap = operator_norm(other.matrix @ k.matrix)
        if overlap > tol.proj:
            raise ValidationError(f"k is not orthogonal to {name}: {overlap:.3e}")

    p_c = p.complement()
    remainder = Projector(HermitianOperator.trusted(q.complement().matrix - k.matrix),
                          q.dim - q.rank - k.rank)
    left = lower_operator(p_c, q.complement(), tol).matrix
    right = k.matrix + lower_operator(p_c, remainder, tol).matrix
    return operator_norm(left - right)


def find_non_subadditivity_witness(seed: int = 0, max_trials: int = 10_000,
                                   threshold: float = 1e-9,
                                   tol: Tolerances = DEFAULT_TOLERANCES) -> Optional[NonSubadditivityWitness]:
    """
    Search dim 3 for a rank-1 p with g(I-p, I-q) + g(I-p, I-k) not <= I,
    where q = diag(1,0,0) and k = diag(0,0,1). Returns None when nothing
    is found within ``max_trials``.
    """
    rng = np.random.default_rng(seed)
    q = Projector(HermitianOperator(np.diag([1.0, 0.0, 0.0]).astype(complex)), 1)
    k = Projector(HermitianOperator(np.diag([0.0, 0.0, 1.0]).astype(complex)), 1)

    for trial in range(1, max_trials + 1):
        p = random_projector(3, 1, rng)
        p_c = p.complement()
        total = (
            intersection_projector(p_c, q.complement(), IntersectionMethod.SPECTRAL, tol).matrix
            + intersection_projector(p_c, k.complement(), IntersectionMethod.SPECTRAL, tol).matrix
        )
        excess = float(eigh(total - np.eye(3)).eigenvalues[-1])
        if excess > threshold:
            logger.info(f"Non-subadditivity witness found after {trial} trial(s), excess {excess:.4g}")
            return NonSubadditivityWitness(p, q, k, excess, trial)

    logger.info(f"No non-subadditivity witness found in {max_trials} trials")
    return None

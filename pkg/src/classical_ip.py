"""
Classical imprecise probability over a finite event space.

Events are bitmasks over n elementary outcomes (bit i set means outcome i is in
the event). Measures store lower and upper values for all 2**n events.
Checks are vectorized with numpy over event pairs: exhaustive up to the
configured size, seeded sampling beyond it.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from src.errors import EmptyCredalSet, InvalidMeasure, IQProbError, MalformedInput
from src.imprecise_probability import ProbabilityInterval

logger = logging.getLogger(__name__)

MAX_OUTCOMES = 20
EXHAUSTIVE_DISJOINT_LIMIT = 10
EXHAUSTIVE_PAIR_LIMIT = 8
SAMPLED_PAIRS = 100_000
CHECK_TOLERANCE = 1e-10
DISTRIBUTION_TOLERANCE = 1e-12


@dataclass(frozen=True)
class EventSpace:
    n: int

    def __post_init__(self):
        if not isinstance(self.n, (int, np.integer)) or not 1 <= self.n <= MAX_OUTCOMES:
            raise InvalidMeasure(f"Event space needs 1 <= n <= {MAX_OUTCOMES}, got {self.n!r}")

    @property
    def size(self) -> int:
        return 1 << self.n

    @property
    def full(self) -> int:
        return self.size - 1

    @property
    def empty(self) -> int:
        return 0

    def event(self, *outcomes: int) -> int:
        """Bitmask of the given 0-based outcomes."""
        mask = 0
        for outcome in outcomes:
            if not 0 <= outcome < self.n:
                raise InvalidMeasure(f"Outcome {outcome} outside 0..{self.n - 1}")
            mask |= 1 << outcome
        return mask

    def complement(self, event: int) -> int:
        return self.full ^ event

    def outcomes(self, event: int) -> List[int]:
        return [i for i in range(self.n) if event >> i & 1]


@dataclass(frozen=True, eq=False)
class ImpreciseMeasure:
    space: EventSpace
    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        for name in ('lower', 'upper'):
            values = np.array(getattr(self, name), dtype=float)
            if values.shape != (self.space.size,):
                raise InvalidMeasure(
                    f"'{name}' must hold {self.space.size} values (one per event), got {values.shape}"
                )
            if not np.all(np.isfinite(values)):
                raise InvalidMeasure(f"'{name}' contains non-finite values")
            values.setflags(write=False)
            object.__setattr__(self, name, values)

    def refines(self, other: "ImpreciseMeasure", tol: float = CHECK_TOLERANCE) -> bool:
        """True if self is at least as tight as other: other.lower <= lower, upper <= other.upper."""
        return bool(
            np.all(other.lower <= self.lower + tol) and np.all(self.upper <= other.upper + tol)
        )

    def to_dict(self) -> dict:
        return {'n': self.space.n, 'lower': self.lower.tolist(), 'upper': self.upper.tolist()}


@dataclass(frozen=True, eq=False)
class CredalSet:
    space: EventSpace
    distributions: np.ndarray

    def __post_init__(self):
        dists = np.atleast_2d(np.array(self.distributions, dtype=float))
        if dists.size == 0:
            raise EmptyCredalSet("A credal set needs at least one distribution")
        if dists.shape[1] != self.space.n:
            raise InvalidMeasure(f"Distributions must have length {self.space.n}, got {dists.shape[1]}")
        if not np.all(np.isfinite(dists)) or np.any(dists < 0):
            raise InvalidMeasure("Distributions must be finite and non-negative")
        sums = dists.sum(axis=1)
        if np.any(np.abs(sums - 1) > DISTRIBUTION_TOLERANCE):
            raise InvalidMeasure(f"Each distribution must sum to 1 (got sums {sums.tolist()})")
        dists.setflags(write=False)
        object.__setattr__(self, 'distributions', dists)

    def event_probabilities(self) -> np.ndarray:
        """Array of shape (k, 2**n) with P_j(A) for every distribution j and event A."""
        probabilities = np.zeros((self.distributions.shape[0], 1))
        for outcome in range(self.space.n):
            weight = self.distributions[:, outcome:outcome + 1]
            probabilities = np.concatenate([probabilities, probabilities + weight], axis=1)
        return probabilities


@dataclass(frozen=True)
class ClassicalCheck:
    passed: bool
    worst_margin: float
    witness: Tuple[int, ...] = ()
    cases: int = 0

    def to_dict(self) -> dict:
        return {
            'pass': self.passed,
            'worst_margin': self.worst_margin,
            'witness_events': list(self.witness),
            'cases': self.cases,
        }


@dataclass(frozen=True)
class ClassicalReport:
    checks: Dict[str, ClassicalCheck] = field(default_factory=dict)
    exhaustive: bool = True

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks.values())

    def failed(self) -> List[str]:
        return [name for name, check in self.checks.items() if not check.passed]

    def to_dict(self) -> dict:
        return {
            'passed': self.passed,
            'exhaustive': self.exhaustive,
            'checks': {name: check.to_dict() for name, check in self.checks.items()},
        }


def envelope(credal: CredalSet) -> ImpreciseMeasure:
    """Pointwise min/max of P(A) over the credal set."""
    probabilities = credal.event_probabilities()
    return ImpreciseMeasure(credal.space, probabilities.min(axis=0), probabilities.max(axis=0))


def precise_measure(space: EventSpace, distribution: Sequence[float]) -> ImpreciseMeasure:
    return envelope(CredalSet(space, np.asarray([distribution], dtype=float)))


def vacuous_measure(space: EventSpace) -> ImpreciseMeasure:
    lower = np.zeros(space.size)
    lower[space.full] = 1.0
    upper = np.ones(space.size)
    upper[space.empty] = 0.0
    return ImpreciseMeasure(space, lower, upper)


def classical_joint(measure: ImpreciseMeasure, a: int, b: int) -> ProbabilityInterval:
    """(lower(A & B), upper(A & B))"""
    for event in (a, b):
        if not 0 <= event <= measure.space.full:
            raise InvalidMeasure(f"Event {event} is outside the space of {measure.space.n} outcomes")
    both = a & b
    return ProbabilityInterval(measure.lower[both], measure.upper[both])


def _all_pairs(space: EventSpace, disjoint: bool) -> Tuple[np.ndarray, np.ndarray]:
    events = np.arange(space.size, dtype=np.int64)
    first, second = np.meshgrid(events, events, indexing='ij')
    first, second = first.ravel(), second.ravel()
    if disjoint:
        keep = (first & second) == 0
        first, second = first[keep], second[keep]
    return first, second


def _sampled_pairs(space: EventSpace, disjoint: bool, rng: np.random.Generator,
                   samples: int) -> Tuple[np.ndarray, np.ndarray]:
    first = rng.integers(0, space.size, samples, dtype=np.int64)
    second = rng.integers(0, space.size, samples, dtype=np.int64)
    if disjoint:
        second &= space.full ^ first
    return first, second


def _event_pairs(space: EventSpace, disjoint: bool, limit: int, rng: np.random.Generator,
                 samples: int) -> Tuple[np.ndarray, np.ndarray, bool]:
    if space.n <= limit:
        return (*_all_pairs(space, disjoint), True)
    return (*_sampled_pairs(space, disjoint, rng, samples), False)


def _check(margins: np.ndarray, *events: np.ndarray, tol: float = CHECK_TOLERANCE) -> ClassicalCheck:
    margins = np.asarray(margins, dtype=float)
    if margins.size == 0:
        return ClassicalCheck(True, 0.0, (), 0)
    worst = int(np.argmin(margins))
    witness = tuple(int(np.asarray(event).ravel()[worst]) for event in events)
    value = float(margins[worst])
    return ClassicalCheck(value >= -tol, value, witness, int(margins.size))


def check_axioms_classical(measure: ImpreciseMeasure, seed: int = 0,
                           samples: int = SAMPLED_PAIRS) -> ClassicalReport:
    """
    Check lower(empty) = 0, upper(full) = 1, conjugacy upper(A) = 1 - lower(not A),
    superadditivity of lower and subadditivity of upper on disjoint pairs.
    """
    space = measure.space
    lower, upper = measure.lower, measure.upper
    rng = np.random.default_rng(seed)
    events = np.arange(space.size, dtype=np.int64)

    first, second, exhaustive = _event_pairs(space, True, EXHAUSTIVE_DISJOINT_LIMIT, rng, samples)
    union = first | second

    checks = {
        'lower_empty_zero': _check(np.array([-abs(lower[space.empty])]), np.array([space.empty])),
        'upper_full_one': _check(np.array([-abs(upper[space.full] - 1.0)]), np.array([space.full])),
        'conjugacy': _check(-np.abs(upper - (1.0 - lower[space.full ^ events])), events),
        'lower_superadditive': _check(lower[union] - lower[first] - lower[second], first, second),
        'upper_subadditive': _check(upper[first] + upper[second] - upper[union], first, second),
    }

    report = ClassicalReport(checks, exhaustive)
    logger.debug(f"Classical axioms: {len(first)} disjoint pairs, passed={report.passed}")
    return report


def check_derived_inequalities(measure: ImpreciseMeasure, seed: int = 0,
                               samples: int = SAMPLED_PAIRS) -> ClassicalReport:
    """
    Check the consequences of the axioms: monotonicity, the mixed bound on
    disjoint unions, lower <= upper, the modular inequality, subadditivity of
    upper - lower, the three two-event chains and the distributivity bounds
    of joint probabilities.
    """
    space = measure.space
    lo, up = measure.lower, measure.upper
    rng = np.random.default_rng(seed)
    events = np.arange(space.size, dtype=np.int64)

    first, second, exhaustive_disjoint = _event_pairs(
        space, True, EXHAUSTIVE_DISJOINT_LIMIT, rng, samples
    )
    union = first | second
    spread = up - lo

    a1, a2, exhaustive_pairs = _event_pairs(space, False, EXHAUSTIVE_PAIR_LIMIT, rng, samples)
    both, either = a1 & a2, a1 | a2

    checks = {
        'monotone_upper': _check(up[union] - up[first], first, second),
        'monotone_lower': _check(lo[union] - lo[first], first, second),
        'mixed_bound_upper': _check(up[union] - up[first] - lo[second], first, second),
        'mixed_bound_lower': _check(up[first] + lo[second] - lo[union], first, second),
        'lower_below_upper': _check(spread, events),
        'modular': _check(up[either] + lo[both] - lo[a1] - lo[a2], a1, a2),
        'spread_subadditive': _check(spread[first] + spread[second] - spread[union], first, second),
        'chain1_left': _check(lo[a1] + up[a2] - lo[either] - lo[both], a1, a2),
        'chain1_right': _check(up[either] + up[both] - lo[a1] - up[a2], a1, a2),
        'chain2_left': _check(lo[either] + up[both] - lo[a1] - lo[a2], a1, a2),
        'chain2_right': _check(up[a1] + up[a2] - lo[either] - up[both], a1, a2),
        'chain3_left': _check(up[either] + lo[both] - lo[a1] - lo[a2], a1, a2),
        'chain3_right': _check(up[a1] + up[a2] - up[either] - lo[both], a1, a2),
    }

    # joint probabilities against a disjoint union B | C, sampled triples
    a = rng.integers(0, space.size, samples, dtype=np.int64)
    b, c = _sampled_pairs(space, True, rng, samples)
    checks['joint_lower_superadditive'] = _check(
        lo[a & (b | c)] - lo[a & b] - lo[a & c], a, b, c
    )
    checks['joint_upper_subadditive'] = _check(
        up[a & b] + up[a & c] - up[a & (b | c)], a, b, c
    )

    return ClassicalReport(checks, exhaustive_disjoint and exhaustive_pairs)


def measure_from_dict(document, path: Optional[str] = None) -> ImpreciseMeasure:
    """Parse {"n", "lower", "upper"} or a credal set {"n", "distributions"} (enveloped)."""
    if not isinstance(document, dict) or 'n' not in document:
        raise MalformedInput("Measure document must be an object with an 'n' field", path)
    try:
        space = EventSpace(int(document['n']))
        if 'distributions' in document:
            return envelope(credal_from_dict(document, path))
        return ImpreciseMeasure(space, document['lower'], document['upper'])
    except IQProbError as e:
        if path and e.path is None:
            e.with_path(path)
        raise
    except KeyError as e:
        raise MalformedInput(f"Measure document is missing {e}", path) from e
    except (TypeError, ValueError) as e:
        raise MalformedInput(f"Measure document is not numeric: {e}", path) from e


def credal_from_dict(document, path: Optional[str] = None) -> CredalSet:
    try:
        return CredalSet(EventSpace(int(document['n'])), document['distributions'])
    except KeyError as e:
        raise MalformedInput(f"Credal document is missing {e}", path) from e

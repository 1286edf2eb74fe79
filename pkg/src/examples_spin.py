"""
Built-in spin-1/2 and spin-1 observables and the reference tables computed from them.

The spin-1 reference values (upper/lower operators of the x and z
projector families, their sum, the eigenstate table of the upper
operators, and the dominance spectra) double as the golden-test corpus.
"""

import logging
from dataclasses import dataclass
from itertools import product
from typing import Dict, List, Sequence, Tuple

import numpy as np
import pandas as pd

from src.hermitian_core import (
    DEFAULT_TOLERANCES,
    DensityMatrix,
    HermitianOperator,
    Projector,
    Tolerances,
    eigvalsh,
    psd_order,
)
from src.imprecise_probability import (
    check_axioms,
    dominance_spectrum,
    lower_operator,
    sure_dominance,
    upper_operator,
)
from src.measurement_models import ProjectiveResolution

logger = logging.getLogger(__name__)

GOLDEN_TOLERANCE = 1e-10
AXES = ('x', 'y', 'z')
SQRT2 = np.sqrt(2.0)


def realize(rows: Sequence[Sequence]) -> np.ndarray:
    """Turn nested (numerator, denominator, power of sqrt(2)) triples into a matrix; 0 is an exact zero."""
    matrix = np.zeros((len(rows), len(rows[0])), dtype=complex)
    for i, row in enumerate(rows):
        for j, entry in enumerate(row):
            if entry:
                num, den, root2 = entry
                matrix[i, j] = num / den * SQRT2 ** root2
    return matrix


@dataclass(frozen=True, eq=False)
class SpinCatalog:
    """Spin component observables with their eigenprojector resolutions."""

    name: str
    values: Tuple[int, ...]
    observables: Dict[str, np.ndarray]
    resolutions: Dict[str, ProjectiveResolution]

    @property
    def dim(self) -> int:
        return len(self.values)

    def observable(self, axis: str) -> np.ndarray:
        return self.observables[self._axis(axis)]

    def resolution(self, axis: str) -> ProjectiveResolution:
        return self.resolutions[self._axis(axis)]

    def projector(self, axis: str, value: int) -> Projector:
        if value not in self.values:
            raise ValueError(f"Spin-{self.name} has no component value {value}; use one of {self.values}")
        return self.resolution(axis)[self.values.index(value)]

    def sum(self, axis: str, *values: int) -> Projector:
        """Projector onto the span of the given eigenvalues of one component."""
        if len(set(values)) != len(values):
            raise ValueError(f"Repeated component values {values}")
        members = [self.projector(axis, value) for value in values]
        matrix = np.zeros((self.dim, self.dim), dtype=complex)
        for member in members:
            matrix += member.matrix
        return Projector(HermitianOperator.trusted(matrix), sum(m.rank for m in members))

    def _axis(self, axis: str) -> str:
        if axis not in self.observables:
            raise ValueError(f"Unknown spin axis '{axis}'; use one of {sorted(self.observables)}")
        return axis


def _catalog(name: str, values: Tuple[int, ...], observables: Dict[str, np.ndarray],
             eigenvectors: Dict[str, Sequence[np.ndarray]]) -> SpinCatalog:
    resolutions = {
        axis: ProjectiveResolution.from_matrices(
            [np.outer(vector, vector.conj()) for vector in vectors],
            labels=[str(value) for value in values],
        )
        for axis, vectors in eigenvectors.items()
    }
    return SpinCatalog(name, values, observables, resolutions)


def spin1_catalog() -> SpinCatalog:
    """L^x, L^y, L^z and their eigenprojectors P^a_j, j = 1, 0, -1."""
    observables = {
        'x': np.array([[0, 1, 0], [1, 0, 1], [0, 1, 0]], dtype=complex) / SQRT2,
        'y': np.array([[0, 1, 0], [-1, 0, 1], [0, -1, 0]], dtype=complex) / (SQRT2 * 1j),
        'z': np.diag([1, 0, -1]).astype(complex),
    }
    eigenvectors = {
        'x': [
            np.array([1, SQRT2, 1]) / 2,
            np.array([1, 0, -1]) / SQRT2,
            np.array([1, -SQRT2, 1]) / 2,
        ],
        'y': [
            np.array([1, 1j * SQRT2, -1]) / 2,
            np.array([1, 0, 1]) / SQRT2,
            np.array([1, -1j * SQRT2, -1]) / 2,
        ],
        'z': list(np.eye(3, dtype=complex)),
    }
    return _catalog('1', (1, 0, -1), observables, eigenvectors)


def spin_half_catalog() -> SpinCatalog:
    """Pauli matrices and their eigenprojectors, j = +1, -1."""
    observables = {
        'x': np.array([[0, 1], [1, 0]], dtype=complex),
        'y': np.array([[0, -1j], [1j, 0]], dtype=complex),
        'z': np.diag([1, -1]).astype(complex),
    }
    eigenvectors = {
        'x': [np.array([1, 1]) / SQRT2, np.array([1, -1]) / SQRT2],
        'y': [np.array([1, 1j]) / SQRT2, np.array([1, -1j]) / SQRT2],
        'z': list(np.eye(2, dtype=complex)),
    }
    return _catalog('1/2', (1, -1), observables, eigenvectors)


# Golden spin-1 values, keyed by (P^x value, P^z value)

def rank_one_upper(x_value: int, z_value: int) -> List[List]:
    """Upper operator of the rank-one pair (P^x_x_value, P^z_z_value); its lower operator is 0."""
    s = x_value
    half, quarter = (1, 2, 0), (1, 4, 0)
    if x_value == 0 and z_value == 0:
        return [[0, 0, 0], [0, 0, 0], [0, 0, 0]]
    if x_value == 0:
        return [[half, 0, 0], [0, 0, 0], [0, 0, half]]
    if z_value == 0:
        return [[quarter, 0, quarter], [0, half, 0], [quarter, 0, quarter]]
    if z_value == 1:
        return [[quarter, 0, 0], [0, (1, 6, 0), (s, 12, 1)], [0, (s, 12, 1), (1, 12, 0)]]
    return [[(1, 12, 0), (s, 12, 1), 0], [(s, 12, 1), (1, 6, 0), 0], [0, 0, quarter]]


UPPER_SUM = [[(13, 6, 0), 0, (1, 2, 0)], [0, (5, 3, 0), 0], [(1, 2, 0), 0, (13, 6, 0)]]
UPPER_SUM_EIGENVALUES = (5 / 3, 5 / 3, 8 / 3)


def _rank_two_table() -> Dict[Tuple[Tuple[int, ...], Tuple[int, ...]], Tuple[List, List]]:
    table = {}
    half, quarter = (1, 2, 0), (1, 4, 0)
    for s in (1, -1):
        table[((0, s), (1, 0))] = (
            [[(2, 3, 0), (s, 3, 1), 0], [(s, 3, 1), (1, 3, 0), 0], [0, 0, 0]],
            [[(3, 4, 0), (s, 4, 1), 0], [(s, 4, 1), half, 0], [0, 0, quarter]],
        )
        table[((0, s), (-1, 0))] = (
            [[0, 0, 0], [0, (1, 3, 0), (s, 3, 1)], [0, (s, 3, 1), (2, 3, 0)]],
            [[quarter, 0, 0], [0, half, (s, 4, 1)], [0, (s, 4, 1), (3, 4, 0)]],
        )
        table[((1, -1), (s, 0))] = (
            [[0, 0, 0], [0, (1, 1, 0), 0], [0, 0, 0]],
            [[half, 0, 0], [0, (1, 1, 0), 0], [0, 0, half]],
        )
        table[((0, s), (1, -1))] = (
            [[half, 0, (-1, 2, 0)], [0, 0, 0], [(-1, 2, 0), 0, half]],
            [[(3, 4, 0), 0, (-1, 4, 0)], [0, half, 0], [(-1, 4, 0), 0, (3, 4, 0)]],
        )
    commuting = [[half, 0, half], [0, 0, 0], [half, 0, half]]
    table[((1, -1), (1, -1))] = (commuting, commuting)
    return table


RANK_TWO = _rank_two_table()


def eigenstate_upper_value(x_value: int, z_value: int, y_value: int) -> float:
    """tr(uo(P^x_x_value, P^z_z_value) P^y_y_value)"""
    if x_value == 0 and z_value == 0:
        return 0.0
    if x_value * z_value != 0:
        return 1 / 6
    return 1 / 4 if y_value != 0 else 1 / 2


# (first pair, second pair) as ((x values, z values), (x values, z values)) with ascending spectra
DOMINANCE_CASES = {
    'x in {0,-1}, z in {1,0} over x in {0,1}, z in {1,0}': (
        (((0, -1), (1, 0)), ((0, 1), (1, 0))),
        ((-np.sqrt(393) - 3) / 24, -1 / 4, (np.sqrt(393) - 3) / 24),
    ),
    'x in {0,1}, z in {1,0} over x in {1,-1}, z in {1,0}': (
        (((0, 1), (1, 0)), ((1, -1), (1, 0))),
        ((-np.sqrt(57) - 3) / 12, -1 / 2, (np.sqrt(57) - 3) / 12),
    ),
}


@dataclass(frozen=True, eq=False)
class ReproductionReport:
    rows: pd.DataFrame
    tolerance: float = GOLDEN_TOLERANCE

    @property
    def passed(self) -> bool:
        return bool(self.rows['passed'].all())

    @property
    def max_deviation(self) -> float:
        return float(self.rows['max_deviation'].max())

    def failed(self) -> pd.DataFrame:
        return self.rows[~self.rows['passed']]

    def to_dict(self) -> dict:
        return {
            'passed': self.passed,
            'max_deviation': self.max_deviation,
            'tolerance': self.tolerance,
            'rows': [
                {
                    'table': row.table,
                    'case': row.case,
                    'max_deviation': float(row.max_deviation),
                    'passed': bool(row.passed),
                }
                for row in self.rows.itertuples(index=False)
            ],
        }

    def format_report(self) -> str:
        lines = [
            '═' * 67,
            '              SPIN-1 REFERENCE TABLE REPRODUCTION',
            '═' * 67,
        ]
        for table, group in self.rows.groupby('table', sort=False):
            lines.append('')
            lines.append(f"{table.upper()}")
            lines.append('─' * 66)
            for row in group.itertuples(index=False):
                mark = 'ok  ' if row.passed else 'FAIL'
                lines.append(f"{mark} {row.case:<48} {row.max_deviation:10.2e}")
        lines += [
            '',
            '═' * 67,
            f"Cases: {len(self.rows)}   Failed: {len(self.failed())}   "
            f"Max deviation: {self.max_deviation:.2e} (tolerance {self.tolerance:.0e})",
            '═' * 67,
        ]
        return '\n'.join(lines)


class TableReproducer:
    """Computes every spin-1 reference table and compares it with the golden constants."""

    def __init__(self, tol: Tolerances = DEFAULT_TOLERANCES, tolerance: float = GOLDEN_TOLERANCE):
        self.logger = logging.getLogger(__name__)
        self.tol = tol
        self.tolerance = tolerance
        self.catalog = spin1_catalog()
        self._rows: List[dict] = []

    def run(self) -> ReproductionReport:
        self._rows = []
        self._overlaps()
        self._rank_one()
        self._upper_sum()
        self._eigenstate_table()
        self._rank_two()
        self._dominance()
        self._axioms()

        report = ReproductionReport(pd.DataFrame(self._rows), self.tolerance)
        if report.passed:
            self.logger.info(f"Reproduced {len(self._rows)} reference cases, "
                             f"max deviation {report.max_deviation:.2e}")
        else:
            self.logger.warning(f"{len(report.failed())} reference cases deviate by more than "
                                f"{self.tolerance:.0e}")
        return report

    def _record(self, table: str, case: str, deviation: float, passed: bool = None):
        deviation = float(deviation)
        if passed is None:
            passed = deviation <= self.tolerance
        self._rows.append({'table': table, 'case': case, 'max_deviation': deviation, 'passed': bool(passed)})

    def _compare(self, table: str, case: str, observed, expected):
        deviation = np.max(np.abs(np.asarray(observed) - np.asarray(expected)), initial=0.0)
        self._record(table, case, deviation)

    def _pair(self, x_values: Tuple[int, ...], z_values: Tuple[int, ...]) -> Tuple[Projector, Projector]:
        return self.catalog.sum('x', *x_values), self.catalog.sum('z', *z_values)

    def _overlaps(self):
        for first, second in (('x', 'y'), ('x', 'z'), ('y', 'z')):
            deviation = 0.0
            for j, k in product(self.catalog.values, repeat=2):
                value = np.real(np.trace(self.catalog.projector(first, j).matrix
                                         @ self.catalog.projector(second, k).matrix))
                expected = 0.0 if j == k == 0 else (0.5 if 0 in (j, k) else 0.25)
                deviation = max(deviation, abs(value - expected))
            self._record('overlaps', f"tr(P^{first}_j P^{second}_k)", deviation)

    def _rank_one(self):
        for x_value, z_value in product(self.catalog.values, repeat=2):
            p, q = self._pair((x_value,), (z_value,))
            upper = upper_operator(p, q, self.tol).matrix
            lower = lower_operator(p, q, self.tol).matrix
            deviation = max(
                np.max(np.abs(upper - realize(rank_one_upper(x_value, z_value)))),
                np.max(np.abs(lower)),
            )
            self._record('rank-one upper operators', f"P^x_{x_value}, P^z_{z_value}", deviation)

    def _upper_sum(self):
        total = sum(
            upper_operator(*self._pair((x_value,), (z_value,)), self.tol).matrix
            for x_value, z_value in product(self.catalog.values, repeat=2)
        )
        self._compare('upper operator sum', 'sum over all x, z values', total, realize(UPPER_SUM))
        self._compare('upper operator sum', 'eigenvalues', eigvalsh(total), UPPER_SUM_EIGENVALUES)
        exceeds = psd_order(total, np.eye(self.catalog.dim), self.tol.psd)
        self._record('upper operator sum', 'sum exceeds identity', 0.0, exceeds.holds)

    def _eigenstate_table(self):
        for x_value, z_value in product(self.catalog.values, repeat=2):
            upper = upper_operator(*self._pair((x_value,), (z_value,)), self.tol).matrix
            deviation = max(
                abs(np.real(np.trace(upper @ self.catalog.projector('y', y_value).matrix))
                    - eigenstate_upper_value(x_value, z_value, y_value))
                for y_value in self.catalog.values
            )
            self._record('upper operators on L^y eigenstates', f"P^x_{x_value}, P^z_{z_value}", deviation)

    def _rank_two(self):
        for (x_values, z_values), (lower_golden, upper_golden) in RANK_TWO.items():
            p, q = self._pair(x_values, z_values)
            lower = lower_operator(p, q, self.tol).matrix
            upper = upper_operator(p, q, self.tol).matrix
            case = f"x in {set(x_values)}, z in {set(z_values)}"
            self._compare('rank-two lower/upper operators', case,
                          np.stack([lower, upper]), np.stack([realize(lower_golden), realize(upper_golden)]))

            if p.commutes_with(q, self.tol.herm):
                expected = np.zeros(3)
            elif x_values == (1, -1) or set(z_values) == {1, -1}:
                expected = np.array([0, 0.5, 0.5])
            else:
                expected = np.array([0, 0.25, 0.25])
            self._compare('uncertainty spectra', case, eigvalsh(upper - lower), expected)

    def _dominance(self):
        for index, (case, ((first, second), expected)) in enumerate(DOMINANCE_CASES.items()):
            pair1, pair2 = self._pair(*first), self._pair(*second)
            spectrum = dominance_spectrum(pair1, pair2, self.tol)
            self._compare('dominance spectra', case, spectrum.eigenvalues, expected)

            if spectrum.witness is None:
                self._record('dominance spectra', f"{case}: witness state", np.inf, False)
                continue
            verdict = sure_dominance(DensityMatrix.pure(spectrum.witness), pair1, pair2, self.tol)
            self._record('dominance spectra', f"{case}: witness state",
                         abs(verdict.margin - expected[-1]))

            if index == 0:
                # the two operators do not commute
                self._record('dominance spectra', f"{case}: [lower, upper] != 0", 0.0,
                             spectrum.commutator_norm > self.tolerance)

    def _axioms(self):
        pairs = [((x_value,), (z_value,)) for x_value, z_value in product(self.catalog.values, repeat=2)]
        pairs += list(RANK_TWO)
        for x_values, z_values in pairs:
            report = check_axioms(*self._pair(x_values, z_values), tol=self.tol)
            self._record('axioms', f"x in {set(x_values)}, z in {set(z_values)}",
                         max(0.0, -report.worst_margin), report.passed)


def reproduce_tables(tol: Tolerances = DEFAULT_TOLERANCES) -> ReproductionReport:
    return TableReproducer(tol).run()

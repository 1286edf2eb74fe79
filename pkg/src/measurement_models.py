"""
Measurement models that fail to give an additive joint probability.

The no-go certificate: with maximal admissible operators g(P_k, Q_i) the
defect D = I - sum g(P_k, Q_i) does not vanish for non-commuting
resolutions. Two-time (sequential) probabilities depend on the order and
reproduce only the marginal of the first measurement.
"""

import logging
from dataclasses import dataclass
from enum import Enum
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from src.errors import ResolutionInvalid
from src.hermitian_core import (
    DEFAULT_TOLERANCES,
    DensityMatrix,
    Projector,
    Tolerances,
    eigh,
    operator_norm,
    require_same_dim,
    validate_projector,
)
from src.matrix_io import matrix_to_document
from src.projector_geometry import IntersectionMethod, intersection_projector
from src.sampling import commuting_density, random_projector

logger = logging.getLogger(__name__)

RESOLUTION_TOLERANCE = 1e-10
NEAR_RESOLUTION_TOLERANCE = 1e-6
MARGINAL_TOLERANCE = 1e-10


class MeasurementOrder(Enum):
    PQ = 'pq'  # P measured first
    QP = 'qp'

    @classmethod
    def parse(cls, value) -> "MeasurementOrder":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError as e:
            raise ValueError(f"Unknown measurement order '{value}' (use 'pq' or 'qp')") from e


@dataclass(frozen=True, eq=False)
class ProjectiveResolution:
    """Orthogonal projectors summing to the identity."""

    projectors: Tuple[Projector, ...]
    labels: Tuple[str, ...] = ()

    def __post_init__(self):
        projectors = tuple(self.projectors)
        if not projectors:
            raise ResolutionInvalid("A resolution needs at least one projector")
        labels = tuple(self.labels) or tuple(str(k) for k in range(len(projectors)))
        if len(labels) != len(projectors):
            raise ResolutionInvalid("Number of labels does not match number of projectors")
        object.__setattr__(self, 'projectors', projectors)
        object.__setattr__(self, 'labels', labels)
        _check_resolution(projectors)

    @property
    def dim(self) -> int:
        return self.projectors[0].dim

    def __len__(self) -> int:
        return len(self.projectors)

    def __iter__(self):
        return iter(self.projectors)

    def __getitem__(self, index) -> Projector:
        return self.projectors[index]

    def commutes_with(self, other: "ProjectiveResolution", tol: float = RESOLUTION_TOLERANCE) -> bool:
        return all(p.commutes_with(q, tol) for p in self for q in other)

    @classmethod
    def from_matrices(cls, matrices: Sequence, tol: Tolerances = DEFAULT_TOLERANCES,
                      labels: Sequence[str] = ()) -> "ProjectiveResolution":
        return cls(tuple(validate_projector(matrix, tol) for matrix in matrices), tuple(labels))

    @classmethod
    def from_observable(cls, observable, tol: Tolerances = DEFAULT_TOLERANCES) -> "ProjectiveResolution":
        """Eigenspace projectors of an observable, eigenvalues grouped within tol.band."""
        spectrum = eigh(observable)
        values = spectrum.eigenvalues
        breaks = np.flatnonzero(np.diff(values) > tol.band) + 1
        groups = np.split(np.arange(len(values)), breaks)

        projectors, labels = [], []
        for group in groups:
            projectors.append(Projector.from_basis(spectrum.eigenvectors[:, group]))
            labels.append(f"{float(np.mean(values[group])):g}")
        return cls(tuple(projectors), tuple(labels))


def _check_resolution(projectors: Sequence[Projector]):
    dims = {p.dim for p in projectors}
    if len(dims) != 1:
        raise ResolutionInvalid(f"Resolution projectors have differing dimensions: {sorted(dims)}")
    dim = dims.pop()

    completeness = operator_norm(sum(p.matrix for p in projectors) - np.eye(dim))
    orthogonality = max(
        (operator_norm(a.matrix @ b.matrix)
         for index, a in enumerate(projectors) for b in projectors[index + 1:]),
        default=0.0,
    )
    defect = max(completeness, orthogonality)

    if defect > RESOLUTION_TOLERANCE:
        if defect <= NEAR_RESOLUTION_TOLERANCE:
            logger.warning(f"Near-resolution rejected (defect {defect:.3e}); inputs are not renormalized")
            raise ResolutionInvalid(
                f"Near-resolution: defect {defect:.3e} is above {RESOLUTION_TOLERANCE:.0e} "
                f"(completeness {completeness:.3e}, orthogonality {orthogonality:.3e})"
            )
        raise ResolutionInvalid(
            f"Not a projective resolution: completeness defect {completeness:.3e}, "
            f"orthogonality defect {orthogonality:.3e}"
        )


@dataclass(frozen=True, eq=False)
class NoGoCertificate:
    intersections: Dict[Tuple[int, int], Projector]
    defect: np.ndarray
    defect_spectrum: np.ndarray
    forced_zero: List[Tuple[int, int]]
    tolerance: float

    @property
    def trace_defect(self) -> float:
        return float(np.real(np.trace(self.defect)))

    @property
    def additive_joint_probability_exists(self) -> bool:
        return operator_norm(self.defect) <= self.tolerance

    def to_dict(self, emit_witnesses: bool = False) -> dict:
        document = {
            'additive_joint_probability': self.additive_joint_probability_exists,
            'verdict': ('additive joint probability exists'
                        if self.additive_joint_probability_exists
                        else 'no additive joint probability'),
            'defect_spectrum': self.defect_spectrum.tolist(),
            'trace_defect': self.trace_defect,
            'forced_zero': [list(pair) for pair in self.forced_zero],
            'intersection_ranks': {f"{k},{i}": proj.rank for (k, i), proj in self.intersections.items()},
        }
        if emit_witnesses:
            document['defect'] = matrix_to_document(self.defect)
            document['intersections'] = {
                f"{k},{i}": matrix_to_document(proj.matrix) for (k, i), proj in self.intersections.items()
            }
        return document


@dataclass(frozen=True, eq=False)
class MarginalDefectTable:
    first_marginal_residuals: np.ndarray
    second_marginal_defects: np.ndarray
    order: MeasurementOrder

    @property
    def first_marginal_exact(self) -> bool:
        return bool(np.all(self.first_marginal_residuals <= MARGINAL_TOLERANCE))

    @property
    def max_second_defect(self) -> float:
        return float(np.max(self.second_marginal_defects))

    def to_frame(self) -> pd.DataFrame:
        rows = [
            {'marginal': 'first', 'outcome': k, 'defect': float(value)}
            for k, value in enumerate(self.first_marginal_residuals)
        ]
        rows += [
            {'marginal': 'second', 'outcome': i, 'defect': float(value)}
            for i, value in enumerate(self.second_marginal_defects)
        ]
        return pd.DataFrame(rows)

    def to_dict(self) -> dict:
        return {
            'order': self.order.value,
            'first_marginal_exact': self.first_marginal_exact,
            'first_marginal_residuals': self.first_marginal_residuals.tolist(),
            'second_marginal_defects': self.second_marginal_defects.tolist(),
            'max_second_defect': self.max_second_defect,
        }


@dataclass(frozen=True, eq=False)
class TwoTimeWitness:
    rho: DensityMatrix
    p: Projector
    q: Projector
    mean: float
    joint: float
    trial: int

    def to_dict(self) -> dict:
        return {
            'mean': self.mean,
            'joint': self.joint,
            'gap': self.mean - self.joint,
            'trial': self.trial,
            'rho': matrix_to_document(self.rho.matrix),
            'p': matrix_to_document(self.p.matrix),
            'q': matrix_to_document(self.q.matrix),
        }


@dataclass(frozen=True, eq=False)
class TwoTimeWitnessReport:
    above: Optional[TwoTimeWitness] = None
    below: Optional[TwoTimeWitness] = None
    max_trials: int = 0

    def to_dict(self) -> dict:
        return {
            'mean_above_joint': self.above.to_dict() if self.above else 'not found',
            'mean_below_joint': self.below.to_dict() if self.below else 'not found',
            'max_trials': self.max_trials,
        }


def no_go_certificate(p_resolution: ProjectiveResolution, q_resolution: ProjectiveResolution,
                      tol: Tolerances = DEFAULT_TOLERANCES) -> NoGoCertificate:
    """
    Maximal admissible joint operators g(P_k, Q_i) and the defect
    D = I - sum g(P_k, Q_i); D != 0 certifies that no additive joint
    probability exists.
    """
    dim = require_same_dim(p_resolution[0], q_resolution[0])

    intersections = {}
    forced_zero = []
    total = np.zeros((dim, dim), dtype=complex)
    for k, p in enumerate(p_resolution):
        for i, q in enumerate(q_resolution):
            meet = intersection_projector(p, q, IntersectionMethod.SPECTRAL, tol)
            intersections[(k, i)] = meet
            if meet.rank == 0:
                forced_zero.append((k, i))
            total += meet.matrix

    defect = np.eye(dim) - total
    certificate = NoGoCertificate(
        intersections=intersections,
        defect=defect,
        defect_spectrum=eigh(defect).eigenvalues.copy(),
        forced_zero=forced_zero,
        tolerance=tol.proj,
    )
    logger.info(
        f"No-go certificate: {len(forced_zero)}/{len(intersections)} pairs forced to zero, "
        f"trace defect {certificate.trace_defect:.6g}"
    )
    return certificate


def two_time_probability(rho: DensityMatrix, p: Projector, q: Projector,
                         order: MeasurementOrder = MeasurementOrder.PQ) -> float:
    """tr(Q P rho P) when P is measured first, tr(P Q rho Q) otherwise."""
    require_same_dim(rho, p, q)
    order = MeasurementOrder.parse(order)
    first, second = (p.matrix, q.matrix) if order is MeasurementOrder.PQ else (q.matrix, p.matrix)
    return float(np.real(np.trace(second @ first @ rho.matrix @ first)))


def two_time_mean(rho: DensityMatrix, p: Projector, q: Projector) -> float:
    """mu = tr(rho (PQP + QPQ) / 2)"""
    require_same_dim(rho, p, q)
    pm, qm = p.matrix, q.matrix
    return rho.expectation((pm @ qm @ pm + qm @ pm @ qm) / 2)


def marginal_defect(rho: DensityMatrix, p_resolution: ProjectiveResolution,
                    q_resolution: ProjectiveResolution,
                    order: MeasurementOrder = MeasurementOrder.PQ) -> MarginalDefectTable:
    """
    Marginals of the two-time probability table.

    For the measured-first family the sum over the other outcomes gives
    tr(P_k rho) exactly; for the second family the defects
    |sum_k tr(Q_i P_k rho P_k) - tr(Q_i rho)| are generically nonzero.
    """
    order = MeasurementOrder.parse(order)
    require_same_dim(rho, p_resolution[0], q_resolution[0])
    first, second = (
        (p_resolution, q_resolution) if order is MeasurementOrder.PQ else (q_resolution, p_resolution)
    )

    table = np.array([
        [two_time_probability(rho, a, b, MeasurementOrder.PQ) for b in second]
        for a in first
    ])
    first_residuals = np.abs(table.sum(axis=1) - [rho.expectation(a) for a in first])
    second_defects = np.abs(table.sum(axis=0) - [rho.expectation(b) for b in second])
    return MarginalDefectTable(first_residuals, second_defects, order)


def search_two_time_witnesses(dim: int = 3, seed: int = 0, max_trials: int = 10_000,
                              threshold: float = 1e-9) -> TwoTimeWitnessReport:
    """
    Seeded search for states with [rho, P] = 0 where the two-time mean is
    above, and separately below, the joint probability tr(rho P Q).
    """
    rng = np.random.default_rng(seed)
    found = {}

    for sign in (1, -1):
        for trial in range(1, max_trials + 1):
            p = random_projector(dim, int(rng.integers(1, dim)), rng)
            q = random_projector(dim, int(rng.integers(1, dim)), rng)
            rho = commuting_density(p, rng)
            mean = two_time_mean(rho, p, q)
            joint = float(np.real(np.trace(rho.matrix @ p.matrix @ q.matrix)))
            if sign * (mean - joint) > threshold:
                found[sign] = TwoTimeWitness(rho, p, q, mean, joint, trial)
                break
        else:
            logger.info(f"No two-time witness with sign {sign:+d} in {max_trials} trials")

    return TwoTimeWitnessReport(found.get(1), found.get(-1), max_trials)

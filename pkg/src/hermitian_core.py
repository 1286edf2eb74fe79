"""
Hermitian core for iqprob.
Validated operator types (Hermitian operators, projectors, density matrices),
the tolerance bundle, the spectral decomposition contract, the Moore-Penrose
pseudo-inverse and the PSD ordering used by every other module.
"""

import logging
from dataclasses import dataclass, fields
from dataclasses import replace as dataclass_replace
from typing import Dict, Optional

import numpy as np
import scipy.linalg

from src.errors import (
    BandAmbiguity,
    ConvergenceFailure,
    DimensionMismatch,
    InvalidTolerance,
    MalformedInput,
    NonFiniteEntries,
    NotHermitian,
    NotIdempotent,
    NotPositive,
    NotSquare,
    SpectrumOutOfBand,
    TraceNotUnit,
)

logger = logging.getLogger(__name__)

MACHINE_EPS = float(np.finfo(float).eps)


@dataclass(frozen=True)
class Tolerances:
    """
    Tolerance bundle shared by all operations.

    ``rank`` is relative to the largest absolute eigenvalue; ``None`` means
    dim * machine epsilon of the matrix at hand.
    """

    herm: float = 1e-10
    proj: float = 1e-10
    psd: float = 1e-10
    trace: float = 1e-10
    band: float = 1e-8
    div: float = 1e-12
    rank: Optional[float] = None

    def __post_init__(self):
        for item in fields(self):
            value = getattr(self, item.name)
            if value is None and item.name == 'rank':
                continue
            try:
                valid = np.isfinite(value) and value > 0
            except TypeError:
                valid = False
            if not valid:
                raise InvalidTolerance(
                    f"Tolerance '{item.name}' must be a positive finite number, got {value!r}"
                )

    @classmethod
    def names(cls):
        return [item.name for item in fields(cls)]

    def rank_cutoff(self, dim: int) -> float:
        return self.rank if self.rank is not None else dim * MACHINE_EPS

    def replace(self, **overrides) -> "Tolerances":
        unknown = sorted(set(overrides) - set(self.names()))
        if unknown:
            raise InvalidTolerance(f"Unknown tolerance name(s): {', '.join(unknown)}")
        return dataclass_replace(self, **overrides)

    @classmethod
    def from_string(cls, text: str, base: Optional["Tolerances"] = None) -> "Tolerances":
        """
        Parse a tolerance override string.

        Accepts a single float (applied to herm, proj, psd and trace) or
        comma-separated ``name=value`` pairs, e.g. ``"proj=1e-9,band=1e-7"``.
        """
        base = base or cls()
        text = (text or '').strip()
        if not text:
            return base

        try:
            if '=' not in text:
                value = float(text)
                return base.replace(herm=value, proj=value, psd=value, trace=value)

            overrides = {}
            for chunk in text.split(','):
                if not chunk.strip():
                    continue
                name, _, raw = chunk.partition('=')
                overrides[name.strip()] = float(raw)
        except ValueError as e:
            raise InvalidTolerance(f"Cannot parse tolerance override '{text}': {e}") from e

        return base.replace(**overrides)

    def to_dict(self) -> Dict[str, Optional[float]]:
        return {name: getattr(self, name) for name in self.names()}


DEFAULT_TOLERANCES = Tolerances()


def as_complex_matrix(data) -> np.ndarray:
    """Coerce input to a finite dense complex square matrix (a fresh copy)."""
    try:
        matrix = np.array(data, dtype=complex)
    except (TypeError, ValueError) as e:
        raise MalformedInput(f"Cannot interpret input as a complex matrix: {e}") from e

    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1] or matrix.shape[0] < 1:
        raise NotSquare(f"Expected a non-empty square matrix, got shape {matrix.shape}")
    if not np.all(np.isfinite(matrix)):
        raise NonFiniteEntries("Matrix contains NaN or infinite entries")
    return matrix


def matrix_of(obj) -> np.ndarray:
    """Underlying ndarray of any validated operator type or raw array."""
    matrix = getattr(obj, 'matrix', None)
    if matrix is not None:
        return matrix
    return np.asarray(obj, dtype=complex)


def operator_norm(matrix) -> float:
    """Spectral (largest singular value) norm."""
    matrix = matrix_of(matrix)
    if matrix.size == 0:
        return 0.0
    return float(np.linalg.norm(matrix, 2))


def symmetrize(matrix: np.ndarray) -> np.ndarray:
    return (matrix + matrix.conj().T) / 2


def commutator(a, b) -> np.ndarray:
    a, b = matrix_of(a), matrix_of(b)
    return a @ b - b @ a


def require_same_dim(*operators) -> int:
    dims = {matrix_of(op).shape[0] for op in operators}
    if len(dims) != 1:
        raise DimensionMismatch(f"Operands have differing dimensions: {sorted(dims)}")
    return dims.pop()


def _frozen(matrix: np.ndarray) -> np.ndarray:
    matrix.setflags(write=False)
    return matrix


@dataclass(frozen=True, eq=False)
class HermitianOperator:
    """Hermitian matrix together with the defect measured before symmetrization."""

    matrix: np.ndarray
    hermiticity_defect: float = 0.0

    def __post_init__(self):
        _frozen(self.matrix)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @classmethod
    def trusted(cls, matrix: np.ndarray) -> "HermitianOperator":
        """Wrap a matrix that is Hermitian by construction."""
        return cls(symmetrize(np.asarray(matrix, dtype=complex)))


@dataclass(frozen=True, eq=False)
class Projector:
    operator: HermitianOperator
    rank: int

    @property
    def matrix(self) -> np.ndarray:
        return self.operator.matrix

    @property
    def dim(self) -> int:
        return self.operator.dim

    def complement(self) -> "Projector":
        """Projector onto the orthogonal complement of the range, I - P."""
        matrix = np.eye(self.dim, dtype=complex) - self.matrix
        return Projector(
            HermitianOperator(matrix, self.operator.hermiticity_defect),
            self.dim - self.rank,
        )

    def commutes_with(self, other, tol: float = DEFAULT_TOLERANCES.herm) -> bool:
        return operator_norm(commutator(self, other)) <= tol

    @classmethod
    def from_basis(cls, basis: np.ndarray, dim: Optional[int] = None) -> "Projector":
        """Projector V V^dagger onto the span of orthonormal columns of ``basis``."""
        basis = np.asarray(basis, dtype=complex)
        if dim is None:
            dim = basis.shape[0]
        if basis.size == 0:
            return zero_projector(dim)
        return cls(HermitianOperator.trusted(basis @ basis.conj().T), basis.shape[1])


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    operator: HermitianOperator

    @property
    def matrix(self) -> np.ndarray:
        return self.operator.matrix

    @property
    def dim(self) -> int:
        return self.operator.dim

    def expectation(self, observable) -> float:
        """tr(rho X), real part."""
        return float(np.real(np.trace(self.matrix @ matrix_of(observable))))

    @classmethod
    def pure(cls, vector) -> "DensityMatrix":
        vector = np.asarray(vector, dtype=complex).ravel()
        vector = vector / np.linalg.norm(vector)
        return cls(HermitianOperator.trusted(np.outer(vector, vector.conj())))

    @classmethod
    def maximally_mixed(cls, dim: int) -> "DensityMatrix":
        return cls(HermitianOperator.trusted(np.eye(dim, dtype=complex) / dim))


@dataclass(frozen=True, eq=False)
class SpectralDecomposition:
    """H = V diag(eigenvalues) V^dagger with ascending eigenvalues."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        return (self.eigenvectors * self.eigenvalues) @ self.eigenvectors.conj().T

    def band_basis(self, target: float, band: float) -> np.ndarray:
        """
        Eigenvectors with |lambda - target| <= band.

        Raises:
            BandAmbiguity: if an eigenvalue sits just outside the band, within
                2*band of its edge
        """
        distance = np.abs(self.eigenvalues - target)

        ambiguous = (distance > band) & (distance <= 3 * band)
        if np.any(ambiguous):
            offending = float(self.eigenvalues[ambiguous][0])
            raise BandAmbiguity(
                f"Eigenvalue {offending!r} lies within {2 * band:.1e} of the band edge "
                f"around {target} (band {band:.1e})"
            )

        return self.eigenvectors[:, distance <= band]


@dataclass(frozen=True)
class PSDVerdict:
    holds: bool
    min_eigenvalue: float

    def __bool__(self) -> bool:
        return self.holds

    def to_dict(self) -> dict:
        return {'holds': self.holds, 'min_eigenvalue': self.min_eigenvalue}


def identity_projector(dim: int) -> Projector:
    return Projector(HermitianOperator(np.eye(dim, dtype=complex)), dim)


def zero_projector(dim: int) -> Projector:
    return Projector(HermitianOperator(np.zeros((dim, dim), dtype=complex)), 0)


def make_hermitian(data, tol: Tolerances = DEFAULT_TOLERANCES) -> HermitianOperator:
    """Validate and symmetrize a Hermitian matrix."""
    matrix = as_complex_matrix(data)
    defect = operator_norm(matrix - matrix.conj().T)
    if defect > tol.herm:
        raise NotHermitian(f"Hermiticity defect {defect:.3e} exceeds {tol.herm:.1e}")
    return HermitianOperator(symmetrize(matrix), defect)


def eigvalsh(operator) -> np.ndarray:
    """Ascending eigenvalues only."""
    try:
        values = scipy.linalg.eigvalsh(matrix_of(operator))
    except (scipy.linalg.LinAlgError, ValueError) as e:
        raise ConvergenceFailure(f"Hermitian eigensolver failed: {e}") from e
    if not np.all(np.isfinite(values)):
        raise ConvergenceFailure("Hermitian eigensolver returned non-finite eigenvalues")
    return values


def _normalize_phases(vectors: np.ndarray) -> np.ndarray:
    # first component of largest modulus made real positive
    if vectors.size == 0:
        return vectors
    columns = np.arange(vectors.shape[1])
    pivots = vectors[np.argmax(np.abs(vectors), axis=0), columns]
    return vectors * (np.abs(pivots) / pivots)


def eigh(operator) -> SpectralDecomposition:
    """
    Spectral decomposition of a Hermitian operator.

    Args:
        operator: HermitianOperator, Projector, DensityMatrix or ndarray

    Returns:
        SpectralDecomposition with ascending eigenvalues and phase-normalized
        orthonormal eigenvectors

    Raises:
        ConvergenceFailure: if the backend fails or returns non-finite values
    """
    matrix = matrix_of(operator)
    try:
        values, vectors = scipy.linalg.eigh(matrix)
    except (scipy.linalg.LinAlgError, ValueError) as e:
        raise ConvergenceFailure(f"Hermitian eigensolver failed: {e}") from e

    if not (np.all(np.isfinite(values)) and np.all(np.isfinite(vectors))):
        raise ConvergenceFailure("Hermitian eigensolver returned non-finite output")

    return SpectralDecomposition(_frozen(values), _frozen(_normalize_phases(vectors)))


def validate_projector(data, tol: Tolerances = DEFAULT_TOLERANCES) -> Projector:
    """
    Validate a Hermitian idempotent and count its rank.

    Raises:
        NotHermitian, NotIdempotent, SpectrumOutOfBand
    """
    operator = make_hermitian(data, tol)
    matrix = operator.matrix

    idempotency = operator_norm(matrix @ matrix - matrix)
    if idempotency > tol.proj:
        raise NotIdempotent(f"||M^2 - M|| = {idempotency:.3e} exceeds {tol.proj:.1e}")

    values = eigvalsh(matrix)
    distance = np.minimum(np.abs(values), np.abs(values - 1))
    if np.any(distance > tol.proj):
        worst = float(values[np.argmax(distance)])
        raise SpectrumOutOfBand(f"Eigenvalue {worst:.6g} is not within {tol.proj:.1e} of 0 or 1")

    rank = int(np.count_nonzero(np.abs(values - 1) <= tol.proj))
    return Projector(operator, rank)


def validate_density(data, tol: Tolerances = DEFAULT_TOLERANCES) -> DensityMatrix:
    """Validate a Hermitian PSD unit-trace matrix."""
    operator = make_hermitian(data, tol)

    smallest = float(eigvalsh(operator)[0])
    if smallest < -tol.psd:
        raise NotPositive(f"Minimum eigenvalue {smallest:.3e} is below -{tol.psd:.1e}")

    trace = float(np.real(np.trace(operator.matrix)))
    if abs(trace - 1) > tol.trace:
        raise TraceNotUnit(f"Trace {trace:.12g} differs from 1 by more than {tol.trace:.1e}")

    return DensityMatrix(operator)


def pseudo_inverse(operator, rank_tol: Optional[float] = None) -> HermitianOperator:
    """
    Moore-Penrose pseudo-inverse of a Hermitian operator.

    Eigenvalues with |lambda| <= rank_tol * max|lambda| are mapped to 0, the
    others to 1/lambda. The zero matrix maps to the zero matrix.
    """
    spectrum = eigh(operator)
    values = spectrum.eigenvalues
    dim = values.shape[0]

    scale = float(np.max(np.abs(values))) if dim else 0.0
    if scale == 0.0:
        return HermitianOperator(np.zeros((dim, dim), dtype=complex))

    relative = rank_tol if rank_tol is not None else dim * MACHINE_EPS
    keep = np.abs(values) > relative * scale
    inverted = np.zeros_like(values)
    inverted[keep] = 1.0 / values[keep]

    vectors = spectrum.eigenvectors
    return HermitianOperator.trusted((vectors * inverted) @ vectors.conj().T)


def psd_order(y, z, tol: float = DEFAULT_TOLERANCES.psd) -> PSDVerdict:
    """Y >= Z in the operator order: min eigenvalue of Y - Z is at least -tol."""
    require_same_dim(y, z)
    difference = symmetrize(matrix_of(y) - matrix_of(z))
    smallest = float(eigvalsh(difference)[0])
    return PSDVerdict(holds=smallest >= -tol, min_eigenvalue=smallest)


def spectral_basis(operator, target: float, band: float = DEFAULT_TOLERANCES.band) -> np.ndarray:
    """Orthonormal basis of the eigenvectors with |lambda - target| <= band."""
    return eigh(operator).band_basis(target, band)


def spectral_projector(operator, target: float, band: float = DEFAULT_TOLERANCES.band) -> Projector:
    """Projector onto the eigenspace of eigenvalues within ``band`` of ``target``."""
    dim = matrix_of(operator).shape[0]
    return Projector.from_basis(spectral_basis(operator, target, band), dim)

"""
Geometry of a pair of projectors.
CS decomposition into the five-block canonical form, the intersection
projector g(p, q) by four independent algorithms, the range-sum projector,
principal angles and the eigenvalue pairing between p - q and pq.
"""

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Dict, List, Tuple

import numpy as np
import scipy.linalg

from src.errors import DecompositionInconsistent, LimitNotConverged
from src.hermitian_core import (
    DEFAULT_TOLERANCES,
    HermitianOperator,
    Projector,
    Tolerances,
    eigh,
    eigvalsh,
    identity_projector,
    operator_norm,
    pseudo_inverse,
    require_same_dim,
    spectral_projector,
    symmetrize,
    zero_projector,
)
from src.matrix_io import matrix_to_document

logger = logging.getLogger(__name__)

ITERATION_CAP = 100_000
LIMIT_TOLERANCE = 1e-12
RECONSTRUCTION_GUARD = 1e-8

BLOCK_LABELS = ('11', '10', '01', '00')


class IntersectionMethod(Enum):
    SPECTRAL = 'spectral'
    HARMONIC_MEAN = 'harmonic-mean'
    ITERATED_LIMIT = 'iterated-limit'
    SCHUR_BLOCK = 'schur-block'

    @classmethod
    def parse(cls, name) -> "IntersectionMethod":
        """Accepts 'HarmonicMean', 'harmonic-mean', 'harmonic_mean', ..."""
        if isinstance(name, cls):
            return name
        key = str(name).replace('-', '').replace('_', '').lower()
        for method in cls:
            if method.value.replace('-', '') == key:
                return method
        choices = ', '.join(method.value for method in cls)
        raise ValueError(f"Unknown intersection method '{name}' (choose from {choices})")


@dataclass(frozen=True, eq=False)
class TwoProjectorDecomposition:
    """
    Five-block CS data of a projector pair.

    Columns of ``unitary`` are ordered [H' first half | H' second half | H11 |
    H10 | H01 | H00]. Block label ``ab`` means p-eigenvalue a, q-eigenvalue b.
    In this basis q = diag(I, 0) (+) I11 (+) 0 (+) I01 (+) 0 and
    p = [[C^2, CS], [CS, S^2]] (+) I11 (+) I10 (+) 0 (+) 0.
    """

    unitary: np.ndarray
    m: int
    m11: int
    m10: int
    m01: int
    m00: int
    cos_matrix: np.ndarray
    sin_matrix: np.ndarray
    block_projectors: Dict[str, Projector]
    principal_angles: np.ndarray

    @property
    def dim(self) -> int:
        return self.unitary.shape[0]

    @property
    def block_dims(self) -> Dict[str, int]:
        return {'11': self.m11, '10': self.m10, '01': self.m01, '00': self.m00}

    def _canonical(self, generic: np.ndarray, flags: Tuple[int, int, int, int]) -> np.ndarray:
        blocks = [generic] if self.m else []
        for label, flag in zip(BLOCK_LABELS, flags):
            size = self.block_dims[label]
            if size:
                blocks.append(flag * np.eye(size))
        return scipy.linalg.block_diag(*blocks).astype(complex) if blocks else np.zeros((0, 0))

    def canonical_p(self) -> np.ndarray:
        c, s = self.cos_matrix, self.sin_matrix
        generic = np.block([[c @ c, c @ s], [c @ s, s @ s]]) if self.m else np.zeros((0, 0))
        return self._canonical(generic, (1, 1, 0, 0))

    def canonical_q(self) -> np.ndarray:
        generic = scipy.linalg.block_diag(np.eye(self.m), np.zeros((self.m, self.m)))
        return self._canonical(generic, (1, 0, 1, 0))

    def generic_basis(self) -> np.ndarray:
        return self.unitary[:, :2 * self.m]

    def reconstruction_errors(self, p, q) -> Tuple[float, float]:
        u = self.unitary
        error_p = operator_norm(u @ self.canonical_p() @ u.conj().T - p.matrix)
        error_q = operator_norm(u @ self.canonical_q() @ u.conj().T - q.matrix)
        return error_p, error_q

    def to_dict(self) -> dict:
        return {
            'dim': self.dim,
            'm': self.m,
            'block_dims': self.block_dims,
            'principal_angles': self.principal_angles.tolist(),
            'cos_squared': (np.cos(self.principal_angles) ** 2).tolist(),
            'unitary': matrix_to_document(self.unitary) if self.dim else None,
            'block_projectors': {
                label: matrix_to_document(proj.matrix) for label, proj in self.block_projectors.items()
            },
        }


@dataclass(frozen=True)
class PairedEigenvalue:
    eigenvalue: float
    paired_value: float
    residual: float
    mirror_defect: float

    def to_dict(self) -> dict:
        return {
            'eigenvalue': self.eigenvalue,
            'paired_value': self.paired_value,
            'residual': self.residual,
            'mirror_defect': self.mirror_defect,
        }


@dataclass(frozen=True)
class SpectrumPairing:
    pairs: List[PairedEigenvalue] = field(default_factory=list)

    @property
    def max_residual(self) -> float:
        return max((pair.residual for pair in self.pairs), default=0.0)

    @property
    def max_mirror_defect(self) -> float:
        return max((pair.mirror_defect for pair in self.pairs), default=0.0)

    def to_dict(self) -> dict:
        return {
            'pairs': [pair.to_dict() for pair in self.pairs],
            'max_residual': self.max_residual,
            'max_mirror_defect': self.max_mirror_defect,
        }


def cs_decompose(p: Projector, q: Projector,
                 tol: Tolerances = DEFAULT_TOLERANCES) -> TwoProjectorDecomposition:
    """
    CS decomposition of a projector pair.

    Common-eigenvector blocks come from the eigenvalue-2 and -0 subspaces of
    p + q and the +1/-1 subspaces of p - q. On the remaining generic block q
    is rotated to diag(I, 0); the polar decomposition of the off-diagonal
    block of p and a simultaneous diagonalization of C^2 give the canonical
    form, with principal angles ascending.

    Raises:
        BandAmbiguity: propagated from the spectral band classification
        DecompositionInconsistent: if the generic block is odd-dimensional,
            degenerate, or the reconstruction error exceeds 1e-8
    """
    dim = require_same_dim(p, q)
    band = tol.band

    plus = eigh(p.matrix + q.matrix)
    minus = eigh(p.matrix - q.matrix)
    bases = {
        '11': plus.band_basis(2.0, band),
        '10': minus.band_basis(1.0, band),
        '01': minus.band_basis(-1.0, band),
        '00': plus.band_basis(0.0, band),
    }

    common = np.hstack([bases[label] for label in BLOCK_LABELS])
    remainder = np.eye(dim, dtype=complex) - common @ common.conj().T
    generic = eigh(symmetrize(remainder)).band_basis(1.0, band)

    if generic.shape[1] % 2:
        raise DecompositionInconsistent(
            f"Generic block has odd dimension {generic.shape[1]}"
        )
    m = generic.shape[1] // 2

    if m:
        first, second, cosines = _generic_block(p.matrix, q.matrix, generic, m, band)
    else:
        first = second = np.zeros((dim, 0), dtype=complex)
        cosines = np.zeros(0)

    sines = np.sqrt(np.clip(1.0 - cosines ** 2, 0.0, 1.0))
    unitary = np.hstack([first, second] + [bases[label] for label in BLOCK_LABELS])

    decomposition = TwoProjectorDecomposition(
        unitary=unitary,
        m=m,
        m11=bases['11'].shape[1],
        m10=bases['10'].shape[1],
        m01=bases['01'].shape[1],
        m00=bases['00'].shape[1],
        cos_matrix=np.diag(cosines),
        sin_matrix=np.diag(sines),
        block_projectors={label: Projector.from_basis(bases[label], dim) for label in BLOCK_LABELS},
        principal_angles=np.arccos(np.clip(cosines, -1.0, 1.0)),
    )

    error_p, error_q = decomposition.reconstruction_errors(p, q)
    if max(error_p, error_q) > RECONSTRUCTION_GUARD:
        raise DecompositionInconsistent(
            f"Reconstruction error too large (p: {error_p:.3e}, q: {error_q:.3e})"
        )

    logger.debug(f"CS decomposition: dim={dim}, m={m}, blocks={decomposition.block_dims}")
    return decomposition


def _generic_block(p: np.ndarray, q: np.ndarray, generic: np.ndarray,
                   m: int, band: float) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    p_restricted = symmetrize(generic.conj().T @ p @ generic)
    q_restricted = symmetrize(generic.conj().T @ q @ generic)

    # rotate q to diag(I, 0)
    q_spectrum = eigh(q_restricted)
    range_q = q_spectrum.band_basis(1.0, band)
    kernel_q = q_spectrum.band_basis(0.0, band)
    if range_q.shape[1] != m or kernel_q.shape[1] != m:
        raise DecompositionInconsistent(
            f"q restricted to the generic block has rank {range_q.shape[1]}, expected {m}"
        )

    off_diagonal = range_q.conj().T @ p_restricted @ kernel_q
    polar_unitary, _ = scipy.linalg.polar(off_diagonal, side='right')
    first_half = range_q @ polar_unitary

    # C^2 block; descending so that the angles come out ascending
    cos_squared = symmetrize(first_half.conj().T @ p_restricted @ first_half)
    spectrum = eigh(cos_squared)
    order = np.argsort(-spectrum.eigenvalues, kind='stable')
    rotation = spectrum.eigenvectors[:, order]
    cosines = np.sqrt(np.clip(spectrum.eigenvalues[order], 0.0, 1.0))

    if np.any(cosines <= band) or np.any(cosines >= 1.0 - band):
        raise DecompositionInconsistent("Generic block has a principal angle at 0 or pi/2")

    first = generic @ first_half @ rotation
    second = generic @ kernel_q @ rotation
    return first, second, cosines


def principal_angles(p: Projector, q: Projector,
                     tol: Tolerances = DEFAULT_TOLERANCES) -> np.ndarray:
    """Ascending principal angles of the generic block; empty when m = 0."""
    return cs_decompose(p, q, tol).principal_angles


def joint_commutant_lift(decomposition: TwoProjectorDecomposition,
                         function: Callable[[np.ndarray], np.ndarray] = np.square) -> np.ndarray:
    """f(C) (+) f(C) on the generic block, zero elsewhere; commutes with p and q."""
    generic = decomposition.generic_basis()
    values = function(np.diag(decomposition.cos_matrix))
    lifted = np.concatenate([values, values])
    return (generic * lifted) @ generic.conj().T


def intersection_projector(p: Projector, q: Projector,
                           method: IntersectionMethod = IntersectionMethod.SPECTRAL,
                           tol: Tolerances = DEFAULT_TOLERANCES) -> Projector:
    """
    Projector onto ran(p) & ran(q).

    Args:
        p, q: projectors of the same dimension
        method: SPECTRAL (eigenvalue-2 subspace of p + q), HARMONIC_MEAN
            (2 p (p+q)^- q), ITERATED_LIMIT (lim q (pq)^n) or SCHUR_BLOCK
            (shorted operator of p onto ran q)
        tol: tolerance bundle

    Raises:
        LimitNotConverged: if ITERATED_LIMIT hits the iteration cap
    """
    dim = require_same_dim(p, q)
    method = IntersectionMethod.parse(method)

    if method is IntersectionMethod.SPECTRAL:
        return spectral_projector(p.matrix + q.matrix, 2.0, tol.band)
    if method is IntersectionMethod.HARMONIC_MEAN:
        matrix = _harmonic_mean(p.matrix, q.matrix, tol)
    elif method is IntersectionMethod.ITERATED_LIMIT:
        matrix = _iterated_limit(p.matrix, q.matrix)
    else:
        return _snap_to_unit_band(_schur_block(p.matrix, q, dim, tol), dim)

    return _as_projector(matrix)


def _as_projector(matrix: np.ndarray) -> Projector:
    operator = HermitianOperator.trusted(matrix)
    rank = int(np.count_nonzero(eigvalsh(operator) > 0.5))
    return Projector(operator, rank)


def _harmonic_mean(p: np.ndarray, q: np.ndarray, tol: Tolerances) -> np.ndarray:
    inverse = pseudo_inverse(HermitianOperator.trusted(p + q), tol.rank).matrix
    return 2 * p @ inverse @ q


def _snap_to_unit_band(matrix: np.ndarray, dim: int) -> Projector:
    spectrum = eigh(HermitianOperator.trusted(symmetrize(matrix)))
    return Projector.from_basis(spectrum.eigenvectors[:, spectrum.eigenvalues > 0.5], dim)


def _iterated_limit(p: np.ndarray, q: np.ndarray) -> np.ndarray:
    # X_k = (qpq)^(2^k) = q(pq)^(2^k)
    current = symmetrize(q @ p @ q)
    for iteration in range(1, ITERATION_CAP + 1):
        following = symmetrize(current @ current)
        if np.linalg.norm(following - current, 'fro') < LIMIT_TOLERANCE:
            logger.debug(f"Iterated limit converged after {iteration} squarings")
            return following
        current = following

    raise LimitNotConverged(
        f"q(pq)^n did not converge to {LIMIT_TOLERANCE:.0e} within {ITERATION_CAP} squarings"
    )


def _schur_block(p: np.ndarray, q: Projector, dim: int, tol: Tolerances) -> np.ndarray:
    spectrum = eigh(q)
    range_q = spectrum.band_basis(1.0, tol.band)
    kernel_q = spectrum.band_basis(0.0, tol.band)
    if range_q.shape[1] == 0:
        return np.zeros((dim, dim), dtype=complex)

    p11 = range_q.conj().T @ p @ range_q
    if kernel_q.shape[1]:
        p12 = range_q.conj().T @ p @ kernel_q
        p22 = HermitianOperator.trusted(kernel_q.conj().T @ p @ kernel_q)
        # p22 has eigenvalues in [0, 1]; rounding noise must not be inverted
        cutoff = max(tol.rank_cutoff(dim), tol.proj)
        p11 = p11 - p12 @ pseudo_inverse(p22, cutoff).matrix @ p12.conj().T

    return range_q @ p11 @ range_q.conj().T


def span_sum_projector(p: Projector, q: Projector,
                       tol: Tolerances = DEFAULT_TOLERANCES) -> Projector:
    """
    Projector onto ran(p) + ran(q), i.e. (p+q)(p+q)^- = I - g(I-p, I-q).
    Realized as the complement of the kernel of p + q.
    """
    dim = require_same_dim(p, q)
    kernel = spectral_projector(p.matrix + q.matrix, 0.0, tol.band)
    if kernel.rank == 0:
        return identity_projector(dim)
    if kernel.rank == dim:
        return zero_projector(dim)
    return kernel.complement()


def difference_spectrum_pairing(p: Projector, q: Projector,
                                tol: Tolerances = DEFAULT_TOLERANCES) -> SpectrumPairing:
    """
    For each eigenpair (lambda, x) of p - q with 0 < |lambda| < 1, check that
    px is an eigenvector of pq with eigenvalue 1 - lambda^2 and that -lambda
    is also in the spectrum. Residuals are reported, never raised.
    """
    require_same_dim(p, q)
    spectrum = eigh(p.matrix - q.matrix)
    values = spectrum.eigenvalues
    product = p.matrix @ q.matrix

    pairs = []
    for index, value in enumerate(values):
        if not tol.band < abs(value) < 1.0 - tol.band:
            continue
        image = p.matrix @ spectrum.eigenvectors[:, index]
        image = image / np.linalg.norm(image)
        paired = 1.0 - value ** 2
        residual = float(np.linalg.norm(product @ image - paired * image))
        mirror = float(np.min(np.abs(values + value)))
        pairs.append(PairedEigenvalue(float(value), float(paired), residual, mirror))

    return SpectrumPairing(pairs)

"""
Seeded random generators for suites and searches.

Random projectors are a Haar-random unitary applied to diag(1..1, 0..0); pairs
draw each rank uniformly from 0..dim. All generators take an explicit
``numpy.random.Generator`` so runs are reproducible.
"""

from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.stats import unitary_group

from src.hermitian_core import (
    DensityMatrix,
    HermitianOperator,
    Projector,
    spectral_basis,
)


def haar_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    if dim == 1:
        return np.exp(2j * np.pi * rng.random()) * np.ones((1, 1), dtype=complex)
    return np.asarray(unitary_group.rvs(dim, random_state=rng), dtype=complex)


def random_projector(dim: int, rank: int, rng: np.random.Generator) -> Projector:
    unitary = haar_unitary(dim, rng)
    return Projector.from_basis(unitary[:, :rank], dim)


def random_projector_pair(dim: int, rng: np.random.Generator,
                          ranks: Optional[Tuple[int, int]] = None) -> Tuple[Projector, Projector]:
    if ranks is None:
        ranks = (int(rng.integers(0, dim + 1)), int(rng.integers(0, dim + 1)))
    return random_projector(dim, ranks[0], rng), random_projector(dim, ranks[1], rng)


def random_pure_state(dim: int, rng: np.random.Generator) -> np.ndarray:
    vector = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return vector / np.linalg.norm(vector)


def random_density(dim: int, rng: np.random.Generator, rank: Optional[int] = None) -> DensityMatrix:
    """Wishart-distributed density matrix of the given rank (full rank by default)."""
    rank = dim if rank is None else rank
    ginibre = rng.standard_normal((dim, rank)) + 1j * rng.standard_normal((dim, rank))
    matrix = ginibre @ ginibre.conj().T
    return DensityMatrix(HermitianOperator.trusted(matrix / np.real(np.trace(matrix))))


def commuting_density(projector: Projector, rng: np.random.Generator) -> DensityMatrix:
    """
    Random state commuting with ``projector``: diagonal in a randomly rotated
    eigenbasis of the projector, with Dirichlet weights.
    """
    dim = projector.dim
    blocks = []
    for target in (1.0, 0.0):
        basis = spectral_basis(projector, target)
        if basis.shape[1]:
            blocks.append(basis @ haar_unitary(basis.shape[1], rng))
    basis = np.hstack(blocks)

    weights = rng.dirichlet(np.ones(dim))
    return DensityMatrix(HermitianOperator.trusted((basis * weights) @ basis.conj().T))


def random_resolution(dim: int, rng: np.random.Generator,
                      sizes: Optional[Sequence[int]] = None,
                      basis: Optional[np.ndarray] = None) -> List[Projector]:
    """
    Random projective resolution of the identity.

    ``sizes`` are the ranks of the parts (random composition of dim when
    omitted); ``basis`` is an orthonormal basis to split (Haar when omitted).
    """
    if basis is None:
        basis = haar_unitary(dim, rng)
    if sizes is None and dim == 1:
        sizes = [1]
    elif sizes is None:
        cuts = np.sort(rng.choice(np.arange(1, dim), size=int(rng.integers(1, dim)), replace=False))
        sizes = np.diff(np.concatenate(([0], cuts, [dim])))
    if sum(sizes) != basis.shape[1]:
        raise ValueError(f"Part sizes {list(sizes)} do not add up to {basis.shape[1]}")

    parts = []
    start = 0
    for size in sizes:
        parts.append(Projector.from_basis(basis[:, start:start + size], basis.shape[0]))
        start += size
    return parts

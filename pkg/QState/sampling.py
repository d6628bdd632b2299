import math
from enum import Enum
from typing import Optional, Sequence, Tuple

import numpy as np

from Core.logger import call_log, get_logger
from QState.exception import QStateArgumentError
from QState.types import (
    DensityMatrix,
    Ensemble,
    Ket,
    LocalBasisPair,
    check_size,
)
from utils.types import SeedLike, seedlike_2_generator

logger = get_logger(__name__)


class SampleKind(str, Enum):
    HAAR_KET = "haar_ket"
    GINIBRE_MIXED = "ginibre_mixed"
    RANDOM_PRODUCT_BASIS = "random_product_basis"
    RANDOM_SEPARABLE = "random_separable"
    HAAR_UNITARY = "haar_unitary"


def _gaussian(rng: np.random.Generator, shape) -> np.ndarray:
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def haar_unitary(d: int, seed: SeedLike = None) -> np.ndarray:
    """Haar-distributed ``d x d`` unitary (QR of a Ginibre matrix)."""
    rng = seedlike_2_generator(seed)
    q_, r_ = np.linalg.qr(_gaussian(rng, (d, d)))
    diag_ = np.diag(r_)
    return q_ * (diag_ / np.abs(diag_))[None, :]


def haar_vector(d: int, seed: SeedLike = None) -> np.ndarray:
    rng = seedlike_2_generator(seed)
    vec_ = _gaussian(rng, d)
    return vec_ / np.linalg.norm(vec_)


def haar_ket(dims: Sequence[int], seed: SeedLike = None) -> Ket:
    check_size(dims)
    return Ket(amplitudes=haar_vector(math.prod(dims), seed), dims=dims)


def ginibre_mixed(
    dims: Sequence[int], seed: SeedLike = None, rank: Optional[int] = None
) -> DensityMatrix:
    check_size(dims)
    rng = seedlike_2_generator(seed)
    d_ = math.prod(dims)
    g_ = _gaussian(rng, (d_, rank or d_))
    rho_ = g_ @ g_.conj().T
    return DensityMatrix(data=rho_ / np.trace(rho_).real, dims=dims)


def random_product_basis(
    dims: Sequence[int], seed: SeedLike = None
) -> LocalBasisPair:
    check_size(dims)
    if len(dims) != 2:
        raise QStateArgumentError(f"bipartite dims required, got {dims}")
    rng = seedlike_2_generator(seed)
    return LocalBasisPair(
        basis_A=haar_unitary(dims[0], rng), basis_B=haar_unitary(dims[1], rng)
    )


def product_ket(a: np.ndarray, b: np.ndarray) -> Ket:
    return Ket.normalized(np.kron(a, b), (a.shape[0], b.shape[0]))


def random_separable(
    dims: Sequence[int], seed: SeedLike = None, n_terms: Optional[int] = None
) -> Tuple[Ensemble, DensityMatrix]:
    """Mixture of ``n_terms`` random product pure states and its ensemble."""
    check_size(dims)
    if len(dims) != 2:
        raise QStateArgumentError(f"bipartite dims required, got {dims}")
    rng = seedlike_2_generator(seed)
    n_terms = n_terms or math.prod(dims)
    weights_ = rng.dirichlet(np.ones(n_terms))
    members_ = [
        product_ket(haar_vector(dims[0], rng), haar_vector(dims[1], rng))
        for _ in range(n_terms)
    ]
    ensemble_ = Ensemble(weights=weights_, states=members_)
    return ensemble_, ensemble_.mixture()


@call_log(logger)
def sample(kind, dims: Sequence[int], seed: SeedLike = None, **kwargs):
    kind = SampleKind(kind)
    dims = tuple(int(d) for d in dims)
    if kind == SampleKind.HAAR_KET:
        return haar_ket(dims, seed)
    if kind == SampleKind.GINIBRE_MIXED:
        return ginibre_mixed(dims, seed, **kwargs)
    if kind == SampleKind.RANDOM_PRODUCT_BASIS:
        return random_product_basis(dims, seed)
    if kind == SampleKind.RANDOM_SEPARABLE:
        return random_separable(dims, seed, **kwargs)
    check_size(dims)
    rng = seedlike_2_generator(seed)
    return [haar_unitary(d_, rng) for d_ in dims]

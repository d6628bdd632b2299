from typing import Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel
from scipy.optimize import least_squares

from Core.logger import call_log, get_logger
from QState.sampling import haar_unitary, haar_vector, product_ket
from QState.types import DensityMatrix, Ensemble, Ket, check_size
from Testbench.exception import FamilyArgumentError
from Testbench.majorization import t_transform
from Testbench.types import MajorizationPair
from utils.types import SeedLike, seedlike_2_generator

logger = get_logger(__name__)

DECOMPOSITION_TOL = 1e-7
MAX_NIELSEN_DIM = 4
WERNER_SEPARABLE = 1 / 3

_S = 1 / np.sqrt(2)
# single-qubit stabiliser states paired with their complex conjugates
STABILISER_PAIRS = [
    (np.array([1, 0]), np.array([1, 0])),
    (np.array([0, 1]), np.array([0, 1])),
    (np.array([_S, _S]), np.array([_S, _S])),
    (np.array([_S, -_S]), np.array([_S, -_S])),
    (np.array([_S, 1j * _S]), np.array([_S, -1j * _S])),
    (np.array([_S, -1j * _S]), np.array([_S, 1j * _S])),
]


class DecompositionFit(BaseModel):
    ensemble: Ensemble
    residual: float
    method: str

    class Config:
        allow_mutation = False


# ===========================================================
# pure families
def schmidt_ket(
    coefficients: Sequence[float],
    basis_a: Optional[np.ndarray] = None,
    basis_b: Optional[np.ndarray] = None,
) -> Ket:
    """``sum_i sqrt(lambda_i) |a_i>|b_i>``; computational bases by default."""
    lam_ = np.asarray(coefficients, dtype=float)
    r_ = lam_.shape[0]
    basis_a = np.eye(r_) if basis_a is None else np.asarray(basis_a)
    basis_b = np.eye(r_) if basis_b is None else np.asarray(basis_b)
    mat_ = (basis_a[:, :r_] * np.sqrt(lam_)[None, :]) @ basis_b[:, :r_].T
    return Ket.normalized(
        mat_.reshape(-1), (basis_a.shape[0], basis_b.shape[0])
    )


def maximally_entangled(d: int) -> Ket:
    return schmidt_ket(np.full(d, 1 / d))


def bell_state() -> Ket:
    return maximally_entangled(2)


def rotated_schmidt_ket(
    coefficients: Sequence[float], dims: Tuple[int, int], seed: SeedLike
) -> Ket:
    """Schmidt coefficients in Haar-random local bases."""
    rng = seedlike_2_generator(seed)
    return schmidt_ket(
        coefficients, haar_unitary(dims[0], rng), haar_unitary(dims[1], rng)
    )


def perturbed_spectrum(coefficients: Sequence[float], eps: float, tol=1e-12):
    """Split every degenerate group of ``coefficients`` by ``eps``.

    Inside a group of size ``m`` the shifts are ``eps * linspace(1, -1, m)``
    so the sum and the ordering are preserved.
    """
    lam_ = np.sort(np.asarray(coefficients, dtype=float))[::-1]
    out_ = lam_.copy()
    start_ = 0
    for i_ in range(1, lam_.shape[0] + 1):
        if i_ == lam_.shape[0] or lam_[i_ - 1] - lam_[i_] > tol:
            m_ = i_ - start_
            if m_ > 1:
                out_[start_:i_] += eps * np.linspace(1, -1, m_)
            start_ = i_
    return out_


@call_log(logger)
def nielsen_pair_sampler(
    dims: Sequence[int], seed: SeedLike = None
) -> MajorizationPair:
    """Random pair of Schmidt spectra connected by LOCC.

    The target is Dirichlet-distributed; the source follows from random
    T-transforms of it, each of which only moves down the majorization
    order.
    """
    dims = tuple(dims)
    if len(dims) != 2 or dims[0] != dims[1] or dims[0] > MAX_NIELSEN_DIM:
        raise FamilyArgumentError(
            "nielsen_pair_sampler",
            f"dims (d, d) with d <= {MAX_NIELSEN_DIM} required, got {dims}",
        )
    d_ = dims[0]
    rng = seedlike_2_generator(seed)
    target_ = np.sort(rng.dirichlet(np.ones(d_)))[::-1]
    source_ = target_
    if d_ > 1:
        for _ in range(d_):
            i_, j_ = sorted(rng.choice(d_, size=2, replace=False))
            source_ = t_transform(source_, i_, j_, rng.uniform())
    return MajorizationPair(source=source_, target=target_)


# ===========================================================
# mixed families
@call_log(logger)
def werner_state(p: float) -> DensityMatrix:
    """``p |Phi+><Phi+| + (1 - p) I / 4``."""
    if not 0 <= p <= 1:
        raise FamilyArgumentError("werner_state", f"p={p} outside [0, 1]")
    bell_ = bell_state().density().data
    return DensityMatrix(
        data=p * bell_ + (1 - p) * np.eye(4) / 4, dims=(2, 2)
    )


@call_log(logger)
def werner_decomposition(p: float) -> Ensemble:
    """Product-state decomposition of the Werner state for ``p <= 1/3``.

    At ``p = 1/3`` the state is the uniform mixture of ``|u>|u*>`` over
    the six stabiliser states; below it, white noise in the computational
    basis is mixed in.
    """
    if not 0 <= p <= WERNER_SEPARABLE + 1e-12:
        raise FamilyArgumentError(
            "werner_decomposition", f"p={p} is not in [0, 1/3]"
        )
    noise_ = max(1 - 3 * p, 0.0) / 4
    weights_ = [p / 2 + noise_, p / 2 + noise_] + [p / 2] * 4
    members_ = [product_ket(a_, b_) for a_, b_ in STABILISER_PAIRS]
    weights_ += [noise_, noise_]
    members_ += [
        product_ket(np.array([1, 0]), np.array([0, 1])),
        product_ket(np.array([0, 1]), np.array([1, 0])),
    ]
    keep_ = [i_ for i_, w_ in enumerate(weights_) if w_ > 0]
    total_ = sum(weights_[i_] for i_ in keep_)
    return Ensemble(
        weights=[weights_[i_] / total_ for i_ in keep_],
        states=[members_[i_] for i_ in keep_],
    )


def _unpack(x: np.ndarray, n: int, d_a: int, d_b: int):
    a_len, b_len = n * d_a, n * d_b
    a_ = x[:a_len] + 1j * x[a_len : 2 * a_len]
    b_ = x[2 * a_len : 2 * a_len + b_len] + 1j * x[2 * a_len + b_len :]
    a_, b_ = a_.reshape(n, d_a), b_.reshape(n, d_b)
    return (a_[:, :, None] * b_[:, None, :]).reshape(n, d_a * d_b)


@call_log(logger)
def find_product_decomposition(
    rho: DensityMatrix,
    n_members: Optional[int] = None,
    seed: SeedLike = None,
    restarts: int = 3,
    max_nfev: int = 2000,
) -> DecompositionFit:
    """Least-squares fit of ``sum_i |a_i b_i><a_i b_i|`` to ``rho``.

    Unnormalised product vectors absorb the weights; the fit with the
    smallest max-entry residual over ``restarts`` random starts is
    returned whether or not it reaches ``DECOMPOSITION_TOL``.
    """
    d_a, d_b = rho.dims
    n_ = n_members or d_a * d_b + 2
    rng = seedlike_2_generator(seed)
    target_ = rho.data

    def residuals_(x):
        v_ = _unpack(x, n_, d_a, d_b)
        diff_ = v_.T @ v_.conj() - target_
        return np.concatenate([diff_.real.ravel(), diff_.imag.ravel()])

    best_x, best_res = None, np.inf
    for _ in range(restarts):
        x0_ = rng.standard_normal(2 * n_ * (d_a + d_b)) / np.sqrt(2 * n_)
        fit_ = least_squares(
            residuals_,
            x0_,
            method="trf",
            ftol=1e-15,
            xtol=1e-15,
            gtol=1e-15,
            max_nfev=max_nfev,
        )
        res_ = float(np.max(np.abs(fit_.fun)))
        if res_ < best_res:
            best_x, best_res = fit_.x, res_
        if best_res <= DECOMPOSITION_TOL:
            break
    v_ = _unpack(best_x, n_, d_a, d_b)
    weights_ = np.sum(np.abs(v_) ** 2, axis=1)
    keep_ = weights_ > 1e-14
    ensemble_ = Ensemble(
        weights=weights_[keep_] / weights_[keep_].sum(),
        states=[Ket.normalized(row_, (d_a, d_b)) for row_ in v_[keep_]],
    )
    residual_ = float(np.max(np.abs(ensemble_.mixture().data - target_)))
    return DecompositionFit(
        ensemble=ensemble_, residual=residual_, method="numerical"
    )


@call_log(logger)
def werner_product_decomposition(
    p: float, seed: SeedLike = None, n_members: int = 6
) -> DecompositionFit:
    """Numerical product decomposition, closed form if the fit misses."""
    rho_ = werner_state(p)
    fit_ = find_product_decomposition(rho_, n_members, seed)
    if fit_.residual <= DECOMPOSITION_TOL:
        return fit_
    logger.warning(
        f"numerical decomposition of Werner p={p} stopped at residual "
        f"{fit_.residual:.3g}, using the stabiliser construction"
    )
    ensemble_ = werner_decomposition(p)
    residual_ = float(np.max(np.abs(ensemble_.mixture().data - rho_.data)))
    return DecompositionFit(
        ensemble=ensemble_, residual=residual_, method="closed_form"
    )


def cc_state(
    dims: Tuple[int, int], seed: SeedLike = None
) -> Tuple[DensityMatrix, Ensemble]:
    """Random classical-classical state in a Haar-random product basis."""
    check_size(dims)
    rng = seedlike_2_generator(seed)
    u_a, u_b = haar_unitary(dims[0], rng), haar_unitary(dims[1], rng)
    weights_ = rng.dirichlet(np.ones(dims[0] * dims[1]))
    members_ = [
        product_ket(u_a[:, i_], u_b[:, j_])
        for i_ in range(dims[0])
        for j_ in range(dims[1])
    ]
    ensemble_ = Ensemble(weights=weights_, states=members_)
    return ensemble_.mixture(), ensemble_


def cq_state(
    dims: Tuple[int, int], seed: SeedLike = None
) -> Tuple[DensityMatrix, Ensemble]:
    """``sum_i p_i |a_i><a_i| ⊗ |b_i><b_i|`` with orthonormal ``a_i`` and
    Haar-random, hence generically non-orthogonal, ``b_i``."""
    check_size(dims)
    rng = seedlike_2_generator(seed)
    u_a = haar_unitary(dims[0], rng)
    weights_ = rng.dirichlet(np.ones(dims[0]))
    members_ = [
        product_ket(u_a[:, i_], haar_vector(dims[1], rng))
        for i_ in range(dims[0])
    ]
    ensemble_ = Ensemble(weights=weights_, states=members_)
    return ensemble_.mixture(), ensemble_

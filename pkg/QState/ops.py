import math
from typing import Iterable, List, Sequence, Tuple, Union

import numpy as np

from Core.config import Settings
from Core.logger import call_log, get_logger
from QState.exception import QStateArgumentError
from QState.types import (
    ALICE,
    BOB,
    BasisLike,
    DensityMatrix,
    Ket,
    SchmidtForm,
    basis_matrix,
    check_size,
    default_labels,
    fix_phases,
    unitarity_residual,
)

logger = get_logger(__name__)

StateLike = Union[DensityMatrix, Ket]
_TIE_DECIMALS = 12


# ===========================================================
# raw kernels (plain arrays, no validation)
def trace_out(mat: np.ndarray, dims: Sequence[int], keep: Sequence[int]):
    n_ = len(dims)
    keep = sorted(keep)
    drop = [i for i in range(n_) if i not in keep]
    t_ = mat.reshape(tuple(dims) * 2)
    perm_ = keep + drop + [n_ + i for i in keep] + [n_ + i for i in drop]
    d_k = math.prod(dims[i] for i in keep)
    d_d = math.prod(dims[i] for i in drop)
    t_ = t_.transpose(perm_).reshape(d_k, d_d, d_k, d_d)
    return np.einsum("ijkj->ik", t_)


def permute(mat: np.ndarray, dims: Sequence[int], order: Sequence[int]):
    n_ = len(dims)
    t_ = mat.reshape(tuple(dims) * 2)
    t_ = t_.transpose(list(order) + [n_ + i for i in order])
    d_ = math.prod(dims)
    return t_.reshape(d_, d_)


def local_rotation(mat: np.ndarray, w_a: np.ndarray, w_b: np.ndarray):
    """``(W_A ⊗ W_B)^† mat (W_A ⊗ W_B)`` without a Kronecker product."""
    d_a, d_b = w_a.shape[0], w_b.shape[0]
    t_ = mat.reshape(d_a, d_b, d_a, d_b)
    t_ = np.tensordot(w_a.conj(), t_, axes=(0, 0))
    t_ = np.tensordot(w_b.conj(), t_, axes=(0, 1))
    t_ = np.tensordot(t_, w_a, axes=(2, 0))
    t_ = np.tensordot(t_, w_b, axes=(2, 0))
    return t_.transpose(1, 0, 2, 3).reshape(d_a * d_b, d_a * d_b)


def party_marginals(mat: np.ndarray, d_a: int, d_b: int):
    t_ = mat.reshape(d_a, d_b, d_a, d_b)
    return np.einsum("ijkj->ik", t_), np.einsum("ijil->jl", t_)


def _first_index(vec: np.ndarray) -> int:
    nz_ = np.flatnonzero(np.abs(vec) > 1e-12)
    return int(nz_[0]) if nz_.size else vec.shape[0]


# ===========================================================
def _labels_for(dims, labels: Iterable[str]) -> Tuple[str, ...]:
    labels = tuple(labels)
    if len(set(labels)) == len(labels):
        return labels
    return default_labels(len(dims))


@call_log(logger)
def tensor(a: DensityMatrix, b: DensityMatrix) -> DensityMatrix:
    dims_ = a.dims + b.dims
    check_size(dims_)
    return DensityMatrix.trusted(
        np.kron(a.data, b.data), dims_, _labels_for(dims_, a.labels + b.labels)
    )


@call_log(logger)
def partial_trace(
    rho: DensityMatrix, keep: Union[str, Sequence[str]]
) -> DensityMatrix:
    keep = [keep] if isinstance(keep, str) else list(keep)
    if not keep:
        raise QStateArgumentError("keep must name at least one subsystem")
    idx_ = sorted({rho.index_of(t_) for t_ in keep})
    return DensityMatrix.trusted(
        trace_out(rho.data, rho.dims, idx_),
        [rho.dims[i] for i in idx_],
        [rho.labels[i] for i in idx_],
    )


def permute_factors(rho: DensityMatrix, order: Sequence[int]) -> DensityMatrix:
    if sorted(order) != list(range(len(rho.dims))):
        raise QStateArgumentError(f"{order} is not a factor permutation")
    return DensityMatrix.trusted(
        permute(rho.data, rho.dims, order),
        [rho.dims[i] for i in order],
        [rho.labels[i] for i in order],
    )


def group_parties(rho: DensityMatrix) -> DensityMatrix:
    """Reorder factors so Alice's form a prefix, keeping relative order."""
    if rho.is_grouped:
        return rho
    order_ = rho.party_indices(ALICE) + rho.party_indices(BOB)
    return permute_factors(rho, order_)


def as_bipartite(rho: DensityMatrix) -> DensityMatrix:
    """Collapse every factor into the Alice : Bob cut, dims ``(d_A, d_B)``."""
    rho = group_parties(rho)
    d_a, d_b = rho.party_dims
    if d_a == 1 or d_b == 1:
        raise QStateArgumentError(
            f"state with labels {rho.labels} has an empty party"
        )
    if len(rho.dims) == 2:
        return rho
    return DensityMatrix.trusted(rho.data, (d_a, d_b), ("A", "B"))


def marginals(rho: DensityMatrix) -> Tuple[DensityMatrix, DensityMatrix]:
    rho = group_parties(rho)
    alice_ = [rho.labels[i] for i in rho.party_indices(ALICE)]
    bob_ = [rho.labels[i] for i in rho.party_indices(BOB)]
    return partial_trace(rho, alice_), partial_trace(rho, bob_)


def _coerce_pure(psi: StateLike) -> np.ndarray:
    if isinstance(psi, Ket):
        return np.asarray(psi.amplitudes)
    if not psi.is_pure():
        raise QStateArgumentError("pure state required")
    return psi.principal_vector()


@call_log(logger)
def schmidt_decompose(psi: StateLike) -> SchmidtForm:
    if len(psi.dims) != 2:
        raise QStateArgumentError(
            f"Schmidt decomposition needs two factors, got dims {psi.dims}"
        )
    d_a, d_b = psi.dims
    amps_ = _coerce_pure(psi).reshape(d_a, d_b)
    u_, s_, vh_ = np.linalg.svd(amps_)
    k_ = min(d_a, d_b)
    lam_ = s_[:k_] ** 2
    lam_ = lam_ / lam_.sum()
    order_ = sorted(
        range(k_),
        key=lambda i: (-round(lam_[i], _TIE_DECIMALS), _first_index(u_[:, i])),
    )
    basis_a = u_.copy()
    basis_b = vh_.T.copy()
    basis_a[:, :k_] = u_[:, order_]
    basis_b[:, :k_] = vh_.T[:, order_]
    lam_ = lam_[order_]
    fixed_a = fix_phases(basis_a)
    # the phase removed from |i>_A moves onto |i>_B so the sum is unchanged
    for c_ in range(k_):
        nz_ = _first_index(basis_a[:, c_])
        if nz_ < d_a:
            phase_ = basis_a[nz_, c_] / abs(basis_a[nz_, c_])
            basis_b[:, c_] = basis_b[:, c_] * phase_
    basis_b[:, k_:] = fix_phases(basis_b[:, k_:])
    return SchmidtForm(
        coefficients=np.clip(lam_, 0.0, None),
        basis_A=fixed_a,
        basis_B=basis_b,
    )


@call_log(logger)
def dephase(rho: DensityMatrix, basis: BasisLike = None) -> DensityMatrix:
    w_ = basis_matrix(basis, rho.dim)
    diag_ = np.real(np.einsum("ij,ik,kj->j", w_.conj(), rho.data, w_))
    return DensityMatrix.trusted(
        (w_ * diag_[None, :]) @ w_.conj().T, rho.dims, rho.labels
    )


def _check_unitary(mat, name) -> np.ndarray:
    mat = np.asarray(mat, dtype=complex)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise QStateArgumentError(f"{name} must be square, got {mat.shape}")
    res_ = unitarity_residual(mat)
    if res_ > Settings.TOL_UNITARY:
        raise QStateArgumentError(
            f"{name} is not unitary (max |U^dagger U - I| = {res_:.3g})"
        )
    return mat


@call_log(logger)
def apply_local_unitary(rho: StateLike, u_a, u_b) -> StateLike:
    u_a = _check_unitary(u_a, "U_A")
    u_b = _check_unitary(u_b, "U_B")
    if not rho.is_grouped:
        raise QStateArgumentError(
            f"labels {rho.labels} do not list Alice's factors first"
        )
    if (u_a.shape[0], u_b.shape[0]) != rho.party_dims:
        raise QStateArgumentError(
            f"unitaries of dims {(u_a.shape[0], u_b.shape[0])} for parties "
            f"{rho.party_dims}"
        )
    u_ = np.kron(u_a, u_b)
    if isinstance(rho, Ket):
        return Ket(
            amplitudes=u_ @ rho.amplitudes, dims=rho.dims, labels=rho.labels
        )
    return DensityMatrix.trusted(
        u_ @ rho.data @ u_.conj().T, rho.dims, rho.labels
    )


@call_log(logger)
def apply_swap(rho: StateLike, pair: Tuple[str, str]) -> StateLike:
    tag_x, tag_y = pair
    i_, j_ = rho.index_of(tag_x), rho.index_of(tag_y)
    if rho.dims[i_] != rho.dims[j_]:
        raise QStateArgumentError(
            f"cannot swap {tag_x} (dim {rho.dims[i_]}) with {tag_y} "
            f"(dim {rho.dims[j_]})"
        )
    order_ = list(range(len(rho.dims)))
    order_[i_], order_[j_] = j_, i_
    if isinstance(rho, Ket):
        t_ = rho.amplitudes.reshape(rho.dims).transpose(order_)
        return Ket(amplitudes=t_.reshape(-1), dims=rho.dims, labels=rho.labels)
    return DensityMatrix.trusted(
        permute(rho.data, rho.dims, order_), rho.dims, rho.labels
    )


def party_swap_pairs(rho: StateLike) -> List[Tuple[str, str]]:
    """Pairs ``(A…, B…)`` matched by label suffix, ``A'`` with ``B'``."""
    pairs_ = []
    for i_ in rho.party_indices(ALICE):
        a_ = rho.labels[i_]
        b_ = BOB + a_[len(ALICE):]
        if b_ not in rho.labels:
            raise QStateArgumentError(f"no Bob partner for factor {a_}")
        pairs_.append((a_, b_))
    if len(pairs_) != len(rho.party_indices(BOB)):
        raise QStateArgumentError(f"unpaired Bob factors in {rho.labels}")
    return pairs_


def swap_parties(rho: StateLike) -> StateLike:
    for pair_ in party_swap_pairs(rho):
        rho = apply_swap(rho, pair_)
    return rho


@call_log(logger)
def partial_transpose(rho: DensityMatrix, tag: str = BOB) -> np.ndarray:
    """Partial transpose on factor ``tag``; the result need not be a state."""
    i_ = rho.index_of(tag)
    n_ = len(rho.dims)
    t_ = rho.data.reshape(rho.dims * 2)
    axes_ = list(range(2 * n_))
    axes_[i_], axes_[n_ + i_] = n_ + i_, i_
    return t_.transpose(axes_).reshape(rho.dim, rho.dim)

import math
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from scipy.linalg import null_space

from Core.logger import call_log, get_logger
from Correlated.search import ClusterSearch
from Correlated.types import AdmissibleBases, Cluster, DegeneracyProfile
from QState.ops import party_marginals, permute
from QState.sampling import haar_unitary
from QState.types import (
    DensityMatrix,
    Ensemble,
    Ket,
    LocalBasisPair,
    check_size,
)
from Quantifiers.exception import QuantifierArgumentError
from Quantifiers.types import (
    AlignmentSide,
    ExtensionCandidate,
    ExtensionFamily,
    SearchOptions,
)
from utils.helpers import derive_seed

logger = get_logger(__name__)

PRODUCT_TOL = 1e-8
WEIGHT_FLOOR = 1e-14


# ===========================================================
# helpers
def flagged_dims(d_a: int, d_b: int, k: int) -> Tuple[int, int]:
    """Ancilla dims with ``k`` flags and ``d_A d_A' = d_B d_B'``."""
    l_ = math.lcm(d_a, d_b)
    return k * l_ // d_a, k * l_ // d_b


def _flag(i: int, dim: int, stride: int) -> np.ndarray:
    vec_ = np.zeros(dim, dtype=complex)
    vec_[i * stride] = 1.0
    return vec_


def _complete(sources: np.ndarray, targets: np.ndarray) -> np.ndarray:
    """Unitary mapping orthonormal columns ``sources`` onto ``targets``."""
    dim_ = sources.shape[0]
    free_ = np.ones(dim_, dtype=bool)
    free_[np.flatnonzero(np.abs(targets).sum(axis=1) > 0)] = False
    rest_src = null_space(sources.conj().T)
    rest_tgt = np.eye(dim_, dtype=complex)[:, free_]
    return targets @ sources.conj().T + rest_tgt @ rest_src.conj().T


def swap_residual(mat: np.ndarray, d: int) -> float:
    """Max-entry distance of a ``d x d`` bipartite matrix to its swap."""
    swapped_ = permute(mat, (d, d), (1, 0))
    return float(np.max(np.abs(swapped_ - mat)))


def aligned(mat: np.ndarray, u_a: np.ndarray, u_b: np.ndarray) -> np.ndarray:
    u_ = np.kron(u_a, u_b)
    return u_ @ mat @ u_.conj().T


def _schmidt_columns(vec: np.ndarray, d_a: int, d_b: int):
    u_, s_, vh_ = np.linalg.svd(vec.reshape(d_a, d_b))
    return u_, s_, vh_.T


def is_product_vector(vec: np.ndarray, d_a: int, d_b: int) -> bool:
    s_ = np.linalg.svd(vec.reshape(d_a, d_b), compute_uv=False)
    return s_.shape[0] < 2 or s_[1] <= PRODUCT_TOL


def _bipartite_dims(ensemble: Ensemble, operation: str) -> Tuple[int, int]:
    if len(ensemble.dims) != 2:
        raise QuantifierArgumentError(
            operation, f"bipartite members required, got dims {ensemble.dims}"
        )
    return ensemble.dims


def _pure_members(ensemble: Ensemble, operation: str) -> List[np.ndarray]:
    vecs_ = ensemble.pure_vectors()
    if vecs_ is None:
        raise QuantifierArgumentError(operation, "ensemble has mixed members")
    return vecs_


# ===========================================================
# extensions
@call_log(logger)
def extension_from_pure_decomposition(
    ensemble: Ensemble,
) -> ExtensionCandidate:
    """``sum_i p_i |psi_i><psi_i| ⊗ |i><i|_A' ⊗ |i><i|_B'``.

    The flags carry a padding register so that both sides of the
    ``AA' : BB'`` cut have the same dimension. The alignment maps the
    Schmidt vectors of every member, tagged with its flag, onto a common
    computational basis on both sides.
    """
    d_a, d_b = _bipartite_dims(ensemble, "extension_from_pure_decomposition")
    vecs_ = _pure_members(ensemble, "extension_from_pure_decomposition")
    k_ = len(vecs_)
    da_anc, db_anc = flagged_dims(d_a, d_b, k_)
    dims_ = (d_a, da_anc, d_b, db_anc)
    check_size(dims_)
    l_ = math.lcm(d_a, d_b)
    stride_a, stride_b = l_ // d_a, l_ // d_b
    dim_ = d_a * da_anc
    r_ = min(d_a, d_b)

    data_ = np.zeros((dim_ * dim_, dim_ * dim_), dtype=complex)
    src_a, src_b, tgt_ = [], [], []
    for i_, (p_, psi_) in enumerate(zip(ensemble.weights, vecs_)):
        f_a = _flag(i_, da_anc, stride_a)
        f_b = _flag(i_, db_anc, stride_b)
        big_ = np.einsum(
            "ab,c,d->acbd", psi_.reshape(d_a, d_b), f_a, f_b
        ).reshape(-1)
        data_ += p_ * np.outer(big_, big_.conj())
        u_, _, v_ = _schmidt_columns(psi_, d_a, d_b)
        for j_ in range(r_):
            src_a.append(np.kron(u_[:, j_], f_a))
            src_b.append(np.kron(v_[:, j_], f_b))
            tgt_.append(np.eye(dim_, dtype=complex)[:, i_ * l_ + j_])
    src_a = np.stack(src_a, axis=1)
    src_b = np.stack(src_b, axis=1)
    tgt_ = np.stack(tgt_, axis=1)
    align_a = _complete(src_a, tgt_)
    align_b = _complete(src_b, tgt_)
    residual_ = swap_residual(aligned(data_, align_a, align_b), dim_)
    # the alignment inverse is an eigenbasis of both ancilla-extended
    # marginals, and a good first guess for C_min
    return ExtensionCandidate(
        state=DensityMatrix.trusted(data_, dims_),
        ancilla_dims=(da_anc, db_anc),
        family=ExtensionFamily.DECOMPOSITION,
        symmetric=True,
        symmetry_residual=residual_,
        alignment_side=AlignmentSide.BOTH,
        alignment=LocalBasisPair(basis_A=align_a, basis_B=align_b),
        hint=LocalBasisPair(
            basis_A=align_a.conj().T, basis_B=align_b.conj().T
        ),
    )


@call_log(logger)
def extension_from_separable_decomposition(
    ensemble: Ensemble,
) -> ExtensionCandidate:
    d_a, d_b = _bipartite_dims(
        ensemble, "extension_from_separable_decomposition"
    )
    vecs_ = _pure_members(ensemble, "extension_from_separable_decomposition")
    for i_, vec_ in enumerate(vecs_):
        if not is_product_vector(vec_, d_a, d_b):
            raise QuantifierArgumentError(
                "extension_from_separable_decomposition",
                f"member {i_} is not a product state",
            )
    return extension_from_pure_decomposition(ensemble)


def _alice_groups(alice: Sequence[np.ndarray]) -> List[int]:
    """Group index per member; Alice vectors must be equal or orthogonal."""
    reps_: List[np.ndarray] = []
    groups_ = []
    for m_, a_ in enumerate(alice):
        for g_, rep_ in enumerate(reps_):
            overlap_ = abs(np.vdot(rep_, a_))
            if overlap_ > 1 - PRODUCT_TOL:
                groups_.append(g_)
                break
            if overlap_ > PRODUCT_TOL:
                raise QuantifierArgumentError(
                    "extension_from_cq_decomposition",
                    f"Alice vector of member {m_} is neither equal nor "
                    f"orthogonal to an earlier one (overlap {overlap_:.3g})",
                )
        else:
            groups_.append(len(reps_))
            reps_.append(a_)
    return groups_


@call_log(logger)
def extension_from_cq_decomposition(
    ensemble: Ensemble,
) -> ExtensionCandidate:
    """``sum_m w_m |a_m><a_m| ⊗ |b_m><b_m| ⊗ |m><m|_B'`` on ``A B B'``.

    Members are product states whose Alice vectors are pairwise equal or
    orthogonal, i.e. a classical-quantum decomposition.
    """
    d_a, d_b = _bipartite_dims(ensemble, "extension_from_cq_decomposition")
    vecs_ = _pure_members(ensemble, "extension_from_cq_decomposition")
    k_ = len(vecs_)
    dims_ = (d_a, d_b, k_)
    check_size(dims_)
    alice_, bob_ = [], []
    for m_, vec_ in enumerate(vecs_):
        if not is_product_vector(vec_, d_a, d_b):
            raise QuantifierArgumentError(
                "extension_from_cq_decomposition",
                f"member {m_} is not a product state",
            )
        u_, s_, v_ = _schmidt_columns(vec_, d_a, d_b)
        alice_.append(u_[:, 0])
        bob_.append(v_[:, 0] * s_[0])
    groups_ = _alice_groups(alice_)

    data_ = np.zeros((d_a * d_b * k_,) * 2, dtype=complex)
    for m_, (w_, a_, b_) in enumerate(zip(ensemble.weights, alice_, bob_)):
        big_ = np.kron(np.kron(a_, b_), np.eye(k_)[:, m_])
        data_ += w_ * np.outer(big_, big_.conj())

    reps_ = np.stack(
        [alice_[groups_.index(g_)] for g_ in range(max(groups_) + 1)], axis=1
    )
    basis_a = np.hstack([reps_, null_space(reps_.conj().T)])
    src_b = np.stack(
        [np.kron(b_, np.eye(k_)[:, m_]) for m_, b_ in enumerate(bob_)], axis=1
    )
    basis_b = np.hstack([src_b, null_space(src_b.conj().T)])
    return ExtensionCandidate(
        state=DensityMatrix.trusted(data_, dims_, ("A", "B", "B'")),
        ancilla_dims=(1, k_),
        family=ExtensionFamily.CQ,
        symmetric=False,
        hint=LocalBasisPair(basis_A=basis_a, basis_B=basis_b),
    )


@call_log(logger)
def extension_from_bob_decomposition(
    ensemble: Ensemble,
) -> ExtensionCandidate:
    """``sum_i p_i |psi_i><psi_i| ⊗ |i><i|_B'`` for any pure ensemble."""
    d_a, d_b = _bipartite_dims(ensemble, "extension_from_bob_decomposition")
    vecs_ = _pure_members(ensemble, "extension_from_bob_decomposition")
    k_ = len(vecs_)
    dims_ = (d_a, d_b, k_)
    check_size(dims_)
    data_ = np.zeros((d_a * d_b * k_,) * 2, dtype=complex)
    for i_, (p_, psi_) in enumerate(zip(ensemble.weights, vecs_)):
        big_ = np.kron(psi_, np.eye(k_)[:, i_])
        data_ += p_ * np.outer(big_, big_.conj())
    mat_a = sum(
        p_ * psi_.reshape(d_a, d_b) @ psi_.reshape(d_a, d_b).conj().T
        for p_, psi_ in zip(ensemble.weights, vecs_)
    )
    _, vecs_a = np.linalg.eigh(mat_a)
    return ExtensionCandidate(
        state=DensityMatrix.trusted(data_, dims_, ("A", "B", "B'")),
        ancilla_dims=(1, k_),
        family=ExtensionFamily.FLAGGED,
        symmetric=False,
        hint=LocalBasisPair(
            basis_A=vecs_a[:, ::-1],
            basis_B=bob_flag_basis(vecs_, d_a, d_b),
        ),
    )


def bob_flag_basis(vecs: Sequence[np.ndarray], d_a: int, d_b: int):
    """Block basis of ``B B'``: eigenbasis of each member's Bob marginal."""
    k_ = len(vecs)
    basis_ = np.zeros((d_b * k_, d_b * k_), dtype=complex)
    for i_, psi_ in enumerate(vecs):
        m_ = psi_.reshape(d_a, d_b)
        _, v_ = np.linalg.eigh(m_.T @ m_.conj())
        basis_ += np.kron(v_[:, ::-1], np.diag(np.eye(k_)[i_]))
    return basis_


def trivial_alignments(
    mat: np.ndarray, d: int, options: SearchOptions
) -> List[Tuple[str, np.ndarray, np.ndarray]]:
    """Local unitaries tried to make a state with ``d_A = d_B`` swap-symmetric.

    Identity, the marginal eigenbases, then Haar pairs ``(U, U*)``.
    """
    mat_a, mat_b = party_marginals(mat, d, d)
    _, vecs_a = np.linalg.eigh(mat_a)
    _, vecs_b = np.linalg.eigh(mat_b)
    out_ = [
        ("identity", np.eye(d, dtype=complex), np.eye(d, dtype=complex)),
        ("eigen", vecs_a.conj().T, vecs_b.conj().T),
    ]
    for h_ in range(options.haar_alignments):
        u_ = haar_unitary(d, derive_seed(options.seed, 0, h_))
        out_.append((f"haar{h_}", u_, u_.conj()))
    return out_


@call_log(logger)
def trivial_extension(
    rho: DensityMatrix, options: Optional[SearchOptions] = None
) -> Optional[ExtensionCandidate]:
    """The state itself, if symmetric under one of the tried alignments."""
    options = options or SearchOptions()
    d_a, d_b = rho.dims
    if d_a != d_b:
        return None
    for name_, u_a, u_b in trivial_alignments(rho.data, d_a, options):
        residual_ = swap_residual(aligned(rho.data, u_a, u_b), d_a)
        if residual_ <= options.symmetry_tol:
            logger.debug(f"state is swap-symmetric under {name_} alignment")
            side_ = AlignmentSide.BOTH
            if name_ == "identity":
                side_ = AlignmentSide.NONE
            return ExtensionCandidate(
                state=DensityMatrix.trusted(rho.data, (d_a, 1, d_b, 1)),
                ancilla_dims=(1, 1),
                family=ExtensionFamily.TRIVIAL,
                symmetric=True,
                symmetry_residual=residual_,
                alignment_side=side_,
                alignment=LocalBasisPair(basis_A=u_a, basis_B=u_b),
            )
    return None


def factor_swap(d_1: int, d_2: int) -> np.ndarray:
    """Permutation ``|x, y> -> |y, x>`` from ``d_1 ⊗ d_2`` to ``d_2 ⊗ d_1``."""
    order_ = np.arange(d_1 * d_2).reshape(d_1, d_2).T.reshape(-1)
    return np.eye(d_1 * d_2)[order_]


@call_log(logger)
def extension_from_swapped_copy(rho: DensityMatrix) -> ExtensionCandidate:
    """``rho_AB ⊗ (S rho S)_A'B'`` with ``d_A' = d_B`` and ``d_B' = d_A``.

    Swapping the factors of ``BB'`` makes it swap-symmetric, so it exists
    for every state whose squared dimension fits the size limit.
    """
    d_a, d_b = rho.dims
    dims_ = (d_a, d_b, d_b, d_a)
    check_size(dims_)
    swapped_ = permute(rho.data, (d_a, d_b), (1, 0))
    data_ = permute(np.kron(rho.data, swapped_), dims_, (0, 2, 1, 3))
    align_a = np.eye(d_a * d_b, dtype=complex)
    align_b = factor_swap(d_b, d_a).astype(complex)
    return ExtensionCandidate(
        state=DensityMatrix.trusted(data_, dims_),
        ancilla_dims=(d_b, d_a),
        family=ExtensionFamily.SWAPPED_COPY,
        symmetric=True,
        symmetry_residual=swap_residual(
            aligned(data_, align_a, align_b), d_a * d_b
        ),
        alignment_side=AlignmentSide.BOB,
        alignment=LocalBasisPair(basis_A=align_a, basis_B=align_b),
    )


# ===========================================================
# pure-state decompositions of a mixed state
def free_unitary_side(k: int) -> AdmissibleBases:
    """A single searchable ``k x k`` block, i.e. the whole unitary group."""
    return AdmissibleBases(
        eigenvalues=np.ones(k),
        eigenvectors=np.eye(k, dtype=complex),
        profile=DegeneracyProfile(
            clusters=[Cluster(value=1.0, indices=tuple(range(k)))],
            eps_deg=0.0,
            scale=1.0,
        ),
    )


def ensemble_from_isometry(
    eigvals: np.ndarray, eigvecs: np.ndarray, w: np.ndarray
):
    """Members ``sum_j W_ij sqrt(mu_j) |e_j>``; returns weights and vectors."""
    tilde_ = (w * np.sqrt(eigvals)[None, :]) @ eigvecs.T
    weights_ = np.sum(np.abs(tilde_) ** 2, axis=1)
    keep_ = weights_ > WEIGHT_FLOOR
    vecs_ = tilde_[keep_] / np.sqrt(weights_[keep_])[:, None]
    return weights_[keep_] / weights_[keep_].sum(), list(vecs_)


def spectral_decomposition(mat: np.ndarray, tol: float = 1e-12):
    eig_, vecs_ = np.linalg.eigh(mat)
    keep_ = eig_ > tol
    eig_, vecs_ = eig_[keep_][::-1], vecs_[:, keep_][:, ::-1]
    return eig_ / eig_.sum(), vecs_


def as_ensemble(weights, vecs, dims) -> Ensemble:
    return Ensemble(
        weights=weights,
        states=[Ket.normalized(v_, dims) for v_ in vecs],
    )


EnsembleObjective = Callable[[np.ndarray, List[np.ndarray]], float]


@call_log(logger)
def search_decomposition(
    mat: np.ndarray,
    dims: Tuple[int, int],
    k: int,
    objective: EnsembleObjective,
    options: SearchOptions,
) -> Tuple[float, Ensemble, bool]:
    """Minimise ``objective(weights, vectors)`` over ``k``-member pure
    decompositions of ``mat``.

    Decompositions are ``k x rank`` isometries applied to the spectral
    decomposition; the first start is the spectral decomposition itself.
    """
    eig_, vecs_ = spectral_decomposition(mat)
    rank_ = eig_.shape[0]
    if k < rank_:
        raise QuantifierArgumentError(
            "search_decomposition", f"{k} members cannot reach rank {rank_}"
        )

    def members_(bases):
        return ensemble_from_isometry(eig_, vecs_, bases[0][:, :rank_])

    def f_(bases):
        return objective(*members_(bases))

    search_ = ClusterSearch(
        [free_unitary_side(k)], f_, options.max_iters, options.tol
    )
    starts_ = [("spectral", search_.identity_start())]
    for r_ in range(1, options.restarts):
        rng_ = np.random.default_rng(derive_seed(options.seed, k, r_))
        starts_.append((f"haar{r_}", search_.haar_start(rng_)))
    best_, _ = search_.run_all(starts_, options.cmin.workers)
    weights_, members_vecs = members_(best_.bases)
    ensemble_ = as_ensemble(weights_, members_vecs, dims)
    return best_.value, ensemble_, best_.converged

from typing import List, Optional, Union

import numpy as np

from Coherence.measures import CoherenceMeasure, MeasureLike, get_measure
from Core.logger import call_log, get_logger
from Correlated.search import ClusterSearch, Start
from Correlated.types import (
    AdmissibleBases,
    Cluster,
    CminOptions,
    CminResult,
    DegeneracyProfile,
    KERNEL_TOL,
)
from QState.exception import QStateArgumentError
from QState.ops import (
    StateLike,
    as_bipartite,
    local_rotation,
    party_marginals,
)
from QState.types import DensityMatrix, Ket, LocalBasisPair, fix_phases
from utils.helpers import derive_seed

logger = get_logger(__name__)


def correlated_raw(
    measure: CoherenceMeasure,
    mat: np.ndarray,
    mat_a: np.ndarray,
    mat_b: np.ndarray,
    w_a: np.ndarray,
    w_b: np.ndarray,
) -> float:
    total_ = measure.evaluate_rotated(local_rotation(mat, w_a, w_b))
    local_a = measure.evaluate_rotated(w_a.conj().T @ mat_a @ w_a)
    local_b = measure.evaluate_rotated(w_b.conj().T @ mat_b @ w_b)
    return total_ - local_a - local_b


@call_log(logger)
def correlated_coherence(
    measure: MeasureLike, rho: StateLike, basis: LocalBasisPair
) -> float:
    """``C(rho_AB) - C(rho_A) - C(rho_B)`` in the given product basis."""
    measure = get_measure(measure)
    bi_ = as_bipartite(_as_density(rho))
    d_a, d_b = bi_.dims
    if basis.dims != (d_a, d_b):
        raise QStateArgumentError(
            f"basis dims {basis.dims} do not match state parties {(d_a, d_b)}"
        )
    mat_a, mat_b = party_marginals(bi_.data, d_a, d_b)
    return correlated_raw(
        measure, bi_.data, mat_a, mat_b, basis.basis_A, basis.basis_B
    )


def degeneracy_profile(eigenvalues: np.ndarray, eps_deg: float):
    """Group descending eigenvalues; a gap above ``eps_deg * max`` splits.

    Eigenvalues at most ``KERNEL_TOL`` form the kernel cluster on their own.
    """
    eig_ = np.asarray(eigenvalues, dtype=float)
    scale_ = max(float(eig_[0]), np.finfo(float).tiny)
    groups_: List[List[int]] = [[0]]
    for i_ in range(1, eig_.shape[0]):
        kernel_ = eig_[i_] <= KERNEL_TOL < eig_[i_ - 1]
        if kernel_ or eig_[i_ - 1] - eig_[i_] > eps_deg * scale_:
            groups_.append([])
        groups_[-1].append(i_)
    return DegeneracyProfile(
        clusters=[
            Cluster(value=float(np.mean(eig_[g_])), indices=tuple(g_))
            for g_ in groups_
        ],
        eps_deg=eps_deg,
        scale=scale_,
    )


def _admissible(mat: np.ndarray, eps_deg: float) -> AdmissibleBases:
    eig_, vecs_ = np.linalg.eigh(mat)
    eig_ = np.clip(eig_[::-1], 0.0, None)
    return AdmissibleBases(
        eigenvalues=eig_,
        eigenvectors=fix_phases(vecs_[:, ::-1]),
        profile=degeneracy_profile(eig_, eps_deg),
    )


@call_log(logger)
def admissible_bases(
    rho_marginal: Union[DensityMatrix, np.ndarray],
    eps_deg: Optional[float] = None,
) -> AdmissibleBases:
    if eps_deg is None:
        eps_deg = CminOptions().eps_deg
    if isinstance(rho_marginal, DensityMatrix):
        rho_marginal = rho_marginal.data
    return _admissible(np.asarray(rho_marginal, dtype=complex), eps_deg)


def _as_density(rho: StateLike) -> DensityMatrix:
    return rho.density() if isinstance(rho, Ket) else rho


def _principal_targets(mat: np.ndarray, d_a: int, d_b: int):
    _, vecs_ = np.linalg.eigh(mat)
    u_, _, vh_ = np.linalg.svd(vecs_[:, -1].reshape(d_a, d_b))
    return [u_, vh_.T]


def _options(options: Optional[CminOptions], overrides) -> CminOptions:
    if options is None:
        return CminOptions(**overrides)
    return options.copy(update=overrides) if overrides else options


def _starts(
    search: ClusterSearch,
    mat: np.ndarray,
    d_a: int,
    d_b: int,
    options: CminOptions,
) -> List[Start]:
    starts_: List[Start] = [
        ("principal", search.project_start(_principal_targets(mat, d_a, d_b)))
    ]
    for h_, hint_ in enumerate(options.hints):
        if hint_.dims != (d_a, d_b):
            raise QStateArgumentError(
                f"hint basis dims {hint_.dims} do not match {(d_a, d_b)}"
            )
        starts_.append(
            (f"hint{h_}", search.project_start([hint_.basis_A, hint_.basis_B]))
        )
    starts_.append(("eigen", search.identity_start()))
    for r_ in range(len(starts_), max(options.restarts, len(starts_))):
        rng_ = np.random.default_rng(derive_seed(options.seed, r_))
        starts_.append((f"haar{r_}", search.haar_start(rng_)))
    return starts_


@call_log(logger)
def c_min(
    measure: MeasureLike,
    rho: StateLike,
    options: Optional[CminOptions] = None,
    **overrides,
) -> CminResult:
    """Minimal correlated coherence over bases that leave both marginals
    incoherent.

    Those bases are the marginal eigenbases, so only the unitaries inside
    degenerate eigenvalue clusters are searched; with nondegenerate
    marginals a single evaluation is exact.
    """
    options = _options(options, overrides)
    measure = get_measure(measure)
    bi_ = as_bipartite(_as_density(rho))
    d_a, d_b = bi_.dims
    mat_ = bi_.data
    mat_a, mat_b = party_marginals(mat_, d_a, d_b)
    side_a = _admissible(mat_a, options.eps_deg)
    side_b = _admissible(mat_b, options.eps_deg)

    def objective_(bases):
        return correlated_raw(measure, mat_, mat_a, mat_b, *bases)

    search_ = ClusterSearch(
        [side_a, side_b], objective_, options.max_iters, options.tol
    )
    if search_.n_params == 0:
        starts_ = [("eigen", search_.identity_start())]
    else:
        starts_ = _starts(search_, mat_, d_a, d_b, options)
    best_, outcomes_ = search_.run_all(starts_, options.workers)
    basis_ = LocalBasisPair(
        basis_A=fix_phases(best_.bases[0]), basis_B=fix_phases(best_.bases[1])
    )
    value_ = correlated_raw(
        measure, mat_, mat_a, mat_b, basis_.basis_A, basis_.basis_B
    )
    return CminResult(
        value=max(value_, 0.0),
        argmin_basis=basis_,
        restarts_used=len(outcomes_),
        converged=best_.converged,
        evaluations=sum(o_.evaluations for o_ in outcomes_),
        start=best_.name,
    )

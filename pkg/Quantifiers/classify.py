from typing import Optional

import numpy as np

from Core.logger import call_log, get_logger
from Correlated.correlated import admissible_bases, c_min
from Correlated.search import ClusterSearch
from QState.ops import StateLike, as_bipartite, local_rotation, party_marginals
from QState.types import DensityMatrix, fix_phases
from Quantifiers.types import (
    CCResult,
    Classification,
    ClassifyOptions,
    ClassifyResult,
    CQResult,
)
from utils.helpers import derive_seed

logger = get_logger(__name__)


def _options(options: Optional[ClassifyOptions], tol: Optional[float]):
    options = options or ClassifyOptions()
    if tol is not None:
        options = options.copy(update={"tol": tol})
    return options


def _bipartite(rho: StateLike) -> DensityMatrix:
    if not isinstance(rho, DensityMatrix):
        rho = rho.density()
    return as_bipartite(rho)


def off_diagonal_blocks(mat: np.ndarray, w_a: np.ndarray, d_b: int):
    """Blocks ``<i|_A rho |j>_A``, ``i != j``, in the Alice basis ``w_a``."""
    d_a = w_a.shape[0]
    t_ = local_rotation(mat, w_a, np.eye(d_b)).reshape(d_a, d_b, d_a, d_b)
    return t_ * (1 - np.eye(d_a))[:, None, :, None]


@call_log(logger)
def is_classical_quantum(
    rho: StateLike,
    tol: Optional[float] = None,
    options: Optional[ClassifyOptions] = None,
) -> CQResult:
    """Search for an Alice basis whose dephasing leaves ``rho`` unchanged.

    Such a basis diagonalises ``rho_A``, so the search runs over the
    degenerate clusters of its spectrum and minimises the weight of the
    off-diagonal Alice blocks.
    """
    options = _options(options, tol)
    bi_ = _bipartite(rho)
    d_a, d_b = bi_.dims
    mat_ = bi_.data
    mat_a, _ = party_marginals(mat_, d_a, d_b)
    side_ = admissible_bases(mat_a, options.cmin.eps_deg)

    def objective_(bases):
        return float(np.linalg.norm(off_diagonal_blocks(mat_, bases[0], d_b)))

    search_ = ClusterSearch(
        [side_], objective_, options.cmin.max_iters, options.tol
    )
    starts_ = [("eigen", search_.identity_start())]
    if search_.n_params:
        for r_ in range(1, options.cmin.restarts):
            rng_ = np.random.default_rng(derive_seed(options.cmin.seed, r_))
            starts_.append((f"haar{r_}", search_.haar_start(rng_)))
    best_, _ = search_.run_all(starts_, options.cmin.workers)
    basis_ = fix_phases(best_.bases[0])
    residual_ = float(np.max(np.abs(off_diagonal_blocks(mat_, basis_, d_b))))
    return CQResult(
        classical=residual_ <= options.tol,
        basis_A=basis_,
        residual=residual_,
        converged=best_.converged,
    )


@call_log(logger)
def is_classical_classical(
    rho: StateLike,
    tol: Optional[float] = None,
    options: Optional[ClassifyOptions] = None,
) -> CCResult:
    options = _options(options, tol)
    return CCResult.from_cmin(c_min("l1", rho, options.cmin), options.tol)


@call_log(logger)
def classify(
    rho: StateLike,
    tol: Optional[float] = None,
    options: Optional[ClassifyOptions] = None,
) -> ClassifyResult:
    options = _options(options, tol)
    bi_ = _bipartite(rho)
    cc_ = is_classical_classical(bi_, options=options)
    cq_ = is_classical_quantum(bi_, options=options)
    if cc_ and not cq_:
        # the CC witness is a CQ witness too
        basis_ = cc_.witness.basis_A
        residual_ = float(
            np.max(np.abs(off_diagonal_blocks(bi_.data, basis_, bi_.dims[1])))
        )
        cq_ = CQResult(
            classical=residual_ <= options.tol,
            basis_A=basis_,
            residual=residual_,
            converged=cc_.converged,
        )
    if cc_:
        label_ = Classification.CC
    elif cq_:
        label_ = Classification.CQ
    else:
        label_ = Classification.NEITHER
    logger.info(f"classified as {label_.value}")
    return ClassifyResult(label=label_, cc=cc_, cq=cq_)

from typing import List, Optional, Tuple

import numpy as np

from Coherence.measures import (
    CoherenceMeasure,
    MeasureLike,
    get_measure,
    shannon_entropy,
)
from Core.logger import call_log, get_logger
from Correlated.correlated import c_min
from Correlated.types import CminResult
from QState.exception import QStateSizeError
from QState.ops import StateLike, as_bipartite, schmidt_decompose
from QState.types import DensityMatrix, Ensemble, Ket, SchmidtForm, check_size
from Quantifiers.exception import ExtensionSearchError, QuantifierArgumentError
from Quantifiers.extensions import (
    extension_from_pure_decomposition,
    extension_from_swapped_copy,
    flagged_dims,
    search_decomposition,
    spectral_decomposition,
    trivial_extension,
)
from Quantifiers.types import (
    BoundKind,
    BoundReport,
    ExtensionCandidate,
    ExtensionFamily,
    SearchOptions,
)

logger = get_logger(__name__)

MIXTURE_TOL = 1e-7


def search_options(
    options: Optional[SearchOptions], overrides
) -> SearchOptions:
    if options is None:
        return SearchOptions(**overrides)
    return options.copy(update=overrides) if overrides else options


def is_pure_input(rho: StateLike) -> bool:
    return isinstance(rho, Ket) or rho.is_pure()


def pure_vector(psi: StateLike, operation: str) -> Tuple[np.ndarray, int, int]:
    """State vector and party dims of a ket or rank-one density matrix."""
    if isinstance(psi, DensityMatrix):
        if not psi.is_pure():
            raise QuantifierArgumentError(
                operation, "mixed input, use e_upper_bound for mixed states"
            )
        bi_ = as_bipartite(psi)
        return bi_.principal_vector(), bi_.dims[0], bi_.dims[1]
    if len(psi.dims) != 2:
        raise QuantifierArgumentError(
            operation, f"bipartite ket required, got dims {psi.dims}"
        )
    return np.asarray(psi.amplitudes), psi.dims[0], psi.dims[1]


def pure_value(
    measure: CoherenceMeasure, vec: np.ndarray, d_a: int, d_b: int
) -> float:
    """``measure`` of a pure state written in its own Schmidt basis."""
    s_ = np.linalg.svd(vec.reshape(d_a, d_b), compute_uv=False)
    diag_ = np.zeros((d_a, d_b))
    diag_[np.arange(s_.shape[0]), np.arange(s_.shape[0])] = s_
    flat_ = diag_.reshape(-1)
    return measure.evaluate_rotated(np.outer(flat_, flat_))


def ensemble_value(measure: CoherenceMeasure, d_a: int, d_b: int):
    def f_(weights: np.ndarray, vecs: List[np.ndarray]) -> float:
        return float(
            sum(
                w_ * pure_value(measure, v_, d_a, d_b)
                for w_, v_ in zip(weights, vecs)
            )
        )

    return f_


@call_log(logger)
def e_pure(measure: MeasureLike, psi: StateLike) -> BoundReport:
    """Exact ``E_C`` of a pure state: the measure in its Schmidt basis."""
    measure = get_measure(measure)
    vec_, d_a, d_b = pure_vector(psi, "e_pure")
    ket_ = Ket(amplitudes=vec_, dims=(d_a, d_b))
    schmidt_ = schmidt_decompose(ket_)
    value_ = measure.evaluate(ket_.density(), schmidt_.product_basis())
    return BoundReport(
        value=max(value_, 0.0),
        kind=BoundKind.EXACT,
        measure=measure.id,
        witness=schmidt_,
        diagnostics={"path": "pure", "schmidt_rank": schmidt_.rank()},
    )


def e_l1_pure_closed_form(schmidt: SchmidtForm) -> float:
    roots_ = np.sqrt(schmidt.coefficients)
    return float(roots_.sum() ** 2 - np.sum(roots_ ** 2))


@call_log(logger)
def entropy_of_entanglement(psi: StateLike) -> float:
    vec_, d_a, d_b = pure_vector(psi, "entropy_of_entanglement")
    s_ = np.linalg.svd(vec_.reshape(d_a, d_b), compute_uv=False)
    return shannon_entropy(s_ ** 2)


def check_decomposition(
    decomposition: Ensemble, mat: np.ndarray, operation: str
):
    diff_ = float(np.max(np.abs(decomposition.mixture().data - mat)))
    if diff_ > MIXTURE_TOL:
        raise QuantifierArgumentError(
            operation,
            f"decomposition does not reproduce the state (max deviation "
            f"{diff_:.3g})",
        )


def evaluate_candidate(
    measure: CoherenceMeasure,
    candidate: ExtensionCandidate,
    options: SearchOptions,
) -> CminResult:
    hints_ = [candidate.hint] if candidate.hint is not None else []
    cmin_options = options.cmin.copy(
        update={"hints": hints_, "seed": options.seed}
    )
    return c_min(measure, candidate.state, cmin_options)


class CandidateLog:
    """Evaluated candidates in the order they were tried."""

    def __init__(self):
        self.entries: List[Tuple[ExtensionCandidate, CminResult]] = []
        self.tried: List[Tuple[int, int]] = []

    def add(self, candidate: ExtensionCandidate, result: CminResult):
        logger.info(
            f"{candidate.family.value} extension with ancilla dims "
            f"{candidate.ancilla_dims}: {result.value:.6g}"
        )
        self.entries.append((candidate, result))

    def best(self) -> Tuple[ExtensionCandidate, CminResult]:
        return min(self.entries, key=lambda e_: e_[1].value)

    def diagnostics(self) -> dict:
        return {
            "candidates": [
                {
                    "family": c_.family.value,
                    "ancilla_dims": list(c_.ancilla_dims),
                    "value": r_.value,
                    "converged": r_.converged,
                    "restarts_used": r_.restarts_used,
                    "symmetry_residual": c_.symmetry_residual,
                    "alignment_side": c_.alignment_side.value,
                }
                for c_, r_ in self.entries
            ]
        }

    def report(
        self,
        measure: CoherenceMeasure,
        exact: bool,
        options: SearchOptions,
        base_dims: Tuple[int, int],
    ) -> BoundReport:
        if not self.entries:
            raise ExtensionSearchError(base_dims, self.tried)
        candidate_, result_ = self.best()
        return BoundReport(
            value=result_.value,
            kind=BoundKind.EXACT if exact else BoundKind.UPPER_BOUND,
            measure=measure.id,
            witness=candidate_,
            ancilla_dims=candidate_.ancilla_dims,
            ancilla_dims_tried=self.tried,
            restarts=options.restarts,
            seed=options.seed,
            diagnostics=self.diagnostics(),
        )


def _pure_report(report: BoundReport, options: SearchOptions) -> BoundReport:
    return report.copy(update={"restarts": 0, "seed": options.seed})


@call_log(logger)
def e_upper_bound(
    measure: MeasureLike,
    rho: StateLike,
    options: Optional[SearchOptions] = None,
    decomposition: Optional[Ensemble] = None,
    **overrides,
) -> BoundReport:
    """Upper bound on ``E_C`` from explicitly constructed symmetric
    extensions.

    Candidates: the state itself when it is swap-symmetric up to local
    unitaries, the flagged extension of a supplied pure-state
    decomposition, the state tensored with its swapped copy, and flagged
    extensions of decompositions found by minimising the average pure-state
    value over ``k`` members for every ``k`` from the rank up to
    ``max_ancilla_dim``.
    """
    options = search_options(options, overrides)
    measure = get_measure(measure)
    if is_pure_input(rho):
        return _pure_report(e_pure(measure, rho), options)
    bi_ = as_bipartite(rho)
    d_a, d_b = bi_.dims
    log_ = CandidateLog()

    trivial_ = trivial_extension(bi_, options)
    if trivial_ is not None:
        log_.tried.append((1, 1))
        log_.add(trivial_, evaluate_candidate(measure, trivial_, options))

    if decomposition is not None:
        check_decomposition(decomposition, bi_.data, "e_upper_bound")
        candidate_ = extension_from_pure_decomposition(decomposition)
        result_ = evaluate_candidate(measure, candidate_, options)
        log_.tried.append(candidate_.ancilla_dims)
        log_.add(candidate_, result_)
        if result_.value <= options.tol:
            return log_.report(measure, True, options, (d_a, d_b))

    try:
        copy_ = extension_from_swapped_copy(bi_)
    except QStateSizeError as e:
        logger.warning(f"skipping the swapped copy: {e}")
    else:
        log_.tried.append(copy_.ancilla_dims)
        log_.add(copy_, evaluate_candidate(measure, copy_, options))

    eig_, _ = spectral_decomposition(bi_.data)
    objective_ = ensemble_value(measure, d_a, d_b)
    for k_ in range(eig_.shape[0], options.max_ancilla_dim + 1):
        anc_ = flagged_dims(d_a, d_b, k_)
        log_.tried.append(anc_)
        try:
            check_size((d_a, anc_[0], d_b, anc_[1]))
        except QStateSizeError as e:
            logger.warning(f"skipping ancilla dims {anc_}: {e}")
            continue
        _, ensemble_, _ = search_decomposition(
            bi_.data, (d_a, d_b), k_, objective_, options
        )
        candidate_ = extension_from_pure_decomposition(ensemble_)
        result_ = evaluate_candidate(measure, candidate_, options)
        candidate_ = candidate_.copy(
            update={"family": ExtensionFamily.FLAGGED}
        )
        log_.add(candidate_, result_)
        if result_.value <= options.tol:
            break
    return log_.report(measure, False, options, (d_a, d_b))


@call_log(logger)
def e_convex_roof_estimate(
    measure: MeasureLike,
    rho: StateLike,
    options: Optional[SearchOptions] = None,
    **overrides,
) -> BoundReport:
    options = search_options(options, overrides)
    measure = get_measure(measure)
    if is_pure_input(rho):
        return _pure_report(e_pure(measure, rho), options)
    bi_ = as_bipartite(rho)
    d_a, d_b = bi_.dims
    rank_ = spectral_decomposition(bi_.data)[0].shape[0]
    size_ = max(options.ensemble_size or rank_ ** 2, rank_)
    objective_ = ensemble_value(measure, d_a, d_b)
    runs_: List[Tuple[float, Ensemble, bool, int]] = []
    for k_ in sorted({rank_, size_}):
        value_, ensemble_, converged_ = search_decomposition(
            bi_.data, (d_a, d_b), k_, objective_, options
        )
        runs_.append((value_, ensemble_, converged_, k_))
        if value_ <= options.tol:
            break
    value_, ensemble_, converged_, k_ = min(runs_, key=lambda r_: r_[0])
    return BoundReport(
        value=max(value_, 0.0),
        kind=BoundKind.UPPER_BOUND,
        measure=measure.id,
        witness=ensemble_,
        restarts=options.restarts,
        seed=options.seed,
        diagnostics={
            "ensemble_sizes": [r_[3] for r_ in runs_],
            "ensemble_size": k_,
            "converged": converged_,
        },
    )


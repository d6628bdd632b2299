from typing import List, Optional

import numpy as np

from Coherence.measures import CoherenceMeasure, MeasureLike, get_measure
from Core.logger import call_log, get_logger
from Correlated.correlated import correlated_raw
from QState.exception import QStateSizeError
from QState.ops import StateLike, as_bipartite, party_marginals
from QState.types import DensityMatrix, Ensemble, check_size
from Quantifiers.entanglement import (
    CandidateLog,
    check_decomposition,
    evaluate_candidate,
    is_pure_input,
    search_options,
)
from Quantifiers.exception import QuantifierArgumentError
from Quantifiers.extensions import (
    as_ensemble,
    bob_flag_basis,
    extension_from_bob_decomposition,
    extension_from_cq_decomposition,
    search_decomposition,
    spectral_decomposition,
)
from Quantifiers.types import (
    BoundReport,
    ExtensionCandidate,
    ExtensionFamily,
    SearchOptions,
)

logger = get_logger(__name__)


def _bob_only(rho: DensityMatrix) -> ExtensionCandidate:
    d_a, d_b = rho.dims
    return ExtensionCandidate(
        state=DensityMatrix.trusted(
            rho.data, (d_a, d_b, 1), ("A", "B", "B'")
        ),
        ancilla_dims=(1, 1),
        family=ExtensionFamily.TRIVIAL,
        symmetric=False,
    )


def flag_value(
    measure: CoherenceMeasure, w_a: np.ndarray, d_a: int, d_b: int
):
    """Correlated coherence of ``sum_i p_i psi_i ⊗ |i><i|_B'`` in the Alice
    eigenbasis and the per-flag Bob eigenbases."""

    def f_(weights: np.ndarray, vecs: List[np.ndarray]) -> float:
        k_ = len(vecs)
        d_bb = d_b * k_
        data_ = np.zeros((d_a * d_bb, d_a * d_bb), dtype=complex)
        for i_, (p_, psi_) in enumerate(zip(weights, vecs)):
            big_ = np.kron(psi_, np.eye(k_)[:, i_])
            data_ += p_ * np.outer(big_, big_.conj())
        mat_a, mat_bb = party_marginals(data_, d_a, d_bb)
        return correlated_raw(
            measure,
            data_,
            mat_a,
            mat_bb,
            w_a,
            bob_flag_basis(vecs, d_a, d_b),
        )

    return f_


def _decomposition_candidate(decomposition: Ensemble) -> ExtensionCandidate:
    try:
        return extension_from_cq_decomposition(decomposition)
    except QuantifierArgumentError as e:
        logger.info(f"not a classical-quantum decomposition ({e}), flagging")
    return extension_from_bob_decomposition(decomposition)


@call_log(logger)
def d_c_upper_bound(
    measure: MeasureLike,
    rho: StateLike,
    options: Optional[SearchOptions] = None,
    decomposition: Optional[Ensemble] = None,
    **overrides,
) -> BoundReport:
    """Upper bound on ``D_C`` from extensions on Bob's side only.

    Candidates: no extension, the flag construction of a supplied
    decomposition, flagged extensions of searched decompositions with up
    to ``max_ancilla_dim`` members, and the flagged spectral decomposition
    when the rank exceeds that bound. Pure states only have the trivial
    extension, so their value is exact.
    """
    options = search_options(options, overrides)
    measure = get_measure(measure)
    if not isinstance(rho, DensityMatrix):
        rho = rho.density()
    bi_ = as_bipartite(rho)
    d_a, d_b = bi_.dims
    log_ = CandidateLog()

    log_.tried.append((1, 1))
    trivial_ = _bob_only(bi_)
    log_.add(trivial_, evaluate_candidate(measure, trivial_, options))
    if is_pure_input(bi_):
        report_ = log_.report(measure, True, options, (d_a, d_b))
        return report_.copy(update={"restarts": 0})

    if decomposition is not None:
        check_decomposition(decomposition, bi_.data, "d_c_upper_bound")
        candidate_ = _decomposition_candidate(decomposition)
        result_ = evaluate_candidate(measure, candidate_, options)
        log_.tried.append(candidate_.ancilla_dims)
        log_.add(candidate_, result_)
        if result_.value <= options.tol:
            return log_.report(measure, True, options, (d_a, d_b))

    eig_, vecs_ = spectral_decomposition(bi_.data)
    if eig_.shape[0] > options.max_ancilla_dim:
        log_.tried.append((1, eig_.shape[0]))
        try:
            candidate_ = extension_from_bob_decomposition(
                as_ensemble(eig_, list(vecs_.T), (d_a, d_b))
            )
        except QStateSizeError as e:
            logger.warning(f"skipping the spectral flags: {e}")
        else:
            log_.add(
                candidate_, evaluate_candidate(measure, candidate_, options)
            )

    mat_a, _ = party_marginals(bi_.data, d_a, d_b)
    _, w_a = np.linalg.eigh(mat_a)
    objective_ = flag_value(measure, w_a[:, ::-1], d_a, d_b)
    for k_ in range(eig_.shape[0], options.max_ancilla_dim + 1):
        log_.tried.append((1, k_))
        try:
            check_size((d_a, d_b, k_))
        except QStateSizeError as e:
            logger.warning(f"skipping Bob ancilla dim {k_}: {e}")
            continue
        _, ensemble_, _ = search_decomposition(
            bi_.data, (d_a, d_b), k_, objective_, options
        )
        candidate_ = extension_from_bob_decomposition(ensemble_)
        log_.add(candidate_, evaluate_candidate(measure, candidate_, options))
        if log_.entries[-1][1].value <= options.tol:
            break
    return log_.report(measure, False, options, (d_a, d_b))


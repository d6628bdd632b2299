import time
from typing import Callable, Dict, Iterable, List, NamedTuple, Optional

import numpy as np

from Coherence.measures import CoherenceMeasure, MeasureLike, get_measure
from Core.config import Settings
from Core.logger import call_log, get_logger
from Correlated.correlated import c_min, correlated_coherence
from Correlated.types import CminOptions
from QState.ops import apply_local_unitary, schmidt_decompose
from QState.sampling import (
    ginibre_mixed,
    haar_ket,
    haar_unitary,
    random_separable,
)
from QState.types import DensityMatrix, Ensemble
from Quantifiers.classify import classify, off_diagonal_blocks
from Quantifiers.discord import d_c_upper_bound
from Quantifiers.entanglement import (
    e_l1_pure_closed_form,
    e_pure,
    e_upper_bound,
    entropy_of_entanglement,
)
from Quantifiers.oracles import concurrence_2q, is_separable_ppt
from Quantifiers.types import Classification, ClassifyOptions, SearchOptions
from Testbench.exception import UnknownSuiteError, UnknownToleranceError
from Testbench.families import (
    WERNER_SEPARABLE,
    bell_state,
    cc_state,
    cq_state,
    nielsen_pair_sampler,
    perturbed_spectrum,
    rotated_schmidt_ket,
    werner_product_decomposition,
    werner_state,
)
from Testbench.types import FailureRecord, PropertySuiteReport, TrialOutcome
from utils.helpers import Singleton, derive_seed

logger = get_logger(__name__)

TrialFn = Callable[
    [CoherenceMeasure, int, int, Dict[str, float]], TrialOutcome
]

EPSILONS = (1e-2, 1e-3, 1e-4)
DEGENERATE_SPECTRA = (
    (2, (0.5, 0.5)),
    (3, (1 / 3, 1 / 3, 1 / 3)),
    (3, (0.5, 0.25, 0.25)),
)
WERNER_GRID = np.round(np.linspace(0, 1, 21), 10)
MONOTONE_SLACK = 1e-9


class Suite(NamedTuple):
    id: str
    trial: TrialFn
    tolerances: Dict[str, float]


class SuiteRegistry(metaclass=Singleton):
    def __init__(self):
        self._suites: Dict[str, Suite] = {}

    def register(self, suite: Suite):
        self._suites[suite.id] = suite
        return suite

    def get(self, suite_id: str) -> Suite:
        try:
            return self._suites[suite_id]
        except KeyError:
            raise UnknownSuiteError(suite_id, self._suites) from None

    def ids(self) -> List[str]:
        return list(self._suites)


def register_suite(suite_id: str, **tolerances: float):
    def _decorator(func: TrialFn):
        SuiteRegistry().register(Suite(suite_id, func, tolerances))
        return func

    return _decorator


def _outcome(passed: bool, required: str, inputs=None, **observed):
    return TrialOutcome(
        passed=bool(passed),
        observed={k_: float(v_) for k_, v_ in observed.items()},
        required=required,
        inputs=inputs or {},
    )


def fast_cmin() -> CminOptions:
    return CminOptions(restarts=4, max_iters=500)


def fast_search(max_ancilla_dim: int) -> SearchOptions:
    return SearchOptions(
        max_ancilla_dim=max_ancilla_dim,
        restarts=1,
        max_iters=200,
        cmin=fast_cmin(),
    )


# ===========================================================
# trials
@register_suite(
    "convexity", ensemble=Settings.SUITE_TOL, measure=Settings.SUITE_TOL
)
def _convexity(measure, seed, trial, tol):
    rng = np.random.default_rng(seed)
    k_ = int(rng.integers(2, 4))
    if trial == 0:
        kets_ = [haar_ket((2, 2), rng)] * k_
    else:
        kets_ = [haar_ket((2, 2), rng) for _ in range(k_)]
    ensemble_ = Ensemble(weights=rng.dirichlet(np.ones(k_)), states=kets_)
    average_ = sum(
        w_ * e_pure(measure, s_).value
        for w_, s_ in zip(ensemble_.weights, kets_)
    )
    bound_ = e_upper_bound(
        measure,
        ensemble_.mixture(),
        fast_search(k_),
        decomposition=ensemble_,
    ).value

    rho_ = ginibre_mixed((2, 2), rng)
    sigma_ = ginibre_mixed((2, 2), rng)
    lam_ = float(rng.uniform())
    mixed_ = DensityMatrix.trusted(
        lam_ * rho_.data + (1 - lam_) * sigma_.data, (2, 2)
    )
    lhs_ = measure.evaluate(mixed_)
    rhs_ = lam_ * measure.evaluate(rho_) + (1 - lam_) * measure.evaluate(
        sigma_
    )
    return _outcome(
        bound_ <= average_ + tol["ensemble"] and lhs_ <= rhs_ + tol["measure"],
        "bound <= average; mixture_value <= combination",
        {"members": k_, "lambda": lam_},
        average=average_,
        bound=bound_,
        mixture_value=lhs_,
        combination=rhs_,
    )


@register_suite("monotonicity", locc=1e-8)
def _monotonicity(measure, seed, trial, tol):
    d_ = 2 if trial % 2 == 0 else 3
    pair_ = nielsen_pair_sampler((d_, d_), seed)
    source_ = rotated_schmidt_ket(pair_.source, (d_, d_), derive_seed(seed, 1))
    target_ = rotated_schmidt_ket(pair_.target, (d_, d_), derive_seed(seed, 2))
    e_source = e_pure(measure, source_).value
    e_target = e_pure(measure, target_).value
    return _outcome(
        e_source >= e_target - tol["locc"],
        "source >= target",
        pair_.to_json_dict(),
        source=e_source,
        target=e_target,
    )


@register_suite("local_unitary", invariance=1e-5)
def _local_unitary(measure, seed, trial, tol):
    rng = np.random.default_rng(seed)
    d_ = 2 if trial % 2 == 0 else 3
    psi_ = haar_ket((d_, d_), rng)
    rotated_ = apply_local_unitary(
        psi_, haar_unitary(d_, rng), haar_unitary(d_, rng)
    )
    c_before = c_min(measure, psi_, fast_cmin()).value
    c_after = c_min(measure, rotated_, fast_cmin()).value
    e_before = e_pure(measure, psi_).value
    e_after = e_pure(measure, rotated_).value
    return _outcome(
        abs(c_before - c_after) <= tol["invariance"]
        and abs(e_before - e_after) <= tol["invariance"],
        "|before - after| <= tol",
        {"dims": [d_, d_]},
        cmin_before=c_before,
        cmin_after=c_after,
        e_before=e_before,
        e_after=e_after,
    )


@register_suite("degenerate_schmidt", closed_form=1e-5)
def _degenerate_schmidt(measure, seed, trial, tol):
    d_, spectrum_ = DEGENERATE_SPECTRA[trial % len(DEGENERATE_SPECTRA)]
    psi_ = rotated_schmidt_ket(spectrum_, (d_, d_), seed)
    target_ = e_pure(measure, psi_).value
    found_ = c_min(measure, psi_, fast_cmin()).value
    perturbed_ = [
        c_min(
            measure,
            rotated_schmidt_ket(
                perturbed_spectrum(spectrum_, eps_), (d_, d_), seed
            ),
            fast_cmin(),
        ).value
        for eps_ in EPSILONS
    ]
    chain_ = perturbed_ + [target_]
    monotone_ = all(
        a_ <= b_ + MONOTONE_SLACK for a_, b_ in zip(chain_, chain_[1:])
    )
    observed_ = {
        f"eps_{eps_:.0e}": v_ for eps_, v_ in zip(EPSILONS, perturbed_)
    }
    return _outcome(
        abs(found_ - target_) <= tol["closed_form"] and monotone_,
        "|cmin - schmidt| <= tol; perturbed values rise to the limit",
        {"spectrum": list(spectrum_)},
        cmin=found_,
        schmidt=target_,
        **observed_,
    )


def _werner_trial(measure, seed, index, tol):
    p_ = float(WERNER_GRID[index % WERNER_GRID.shape[0]])
    rho_ = werner_state(p_)
    ppt_ = is_separable_ppt(rho_)
    separable_ = p_ <= WERNER_SEPARABLE
    observed_ = {"p": p_, "ppt": ppt_}
    passed_ = ppt_ == separable_
    inputs_ = {"family": "werner", "p": p_}
    if separable_:
        fit_ = werner_product_decomposition(p_, seed)
        bound_ = e_upper_bound(
            measure, rho_, fast_search(2), decomposition=fit_.ensemble
        ).value
        observed_.update(residual=fit_.residual, bound=bound_)
        inputs_["method"] = fit_.method
        passed_ = (
            passed_ and fit_.residual <= 1e-7 and bound_ <= tol["separable"]
        )
    elif p_ == 1.0:
        value_ = e_pure(measure, rho_).value
        observed_["e_pure"] = value_
        passed_ = passed_ and abs(
            value_ - e_pure(measure, bell_state()).value
        ) <= tol["separable"]
    return _outcome(
        passed_, "ppt iff p <= 1/3; separable bound == 0", inputs_, **observed_
    )


@register_suite("faithfulness", separable=1e-8, entangled=1e-3)
def _faithfulness(measure, seed, trial, tol):
    rng = np.random.default_rng(seed)
    branch_ = trial % 4
    if branch_ == 0:
        n_terms = int(rng.integers(1, 5))
        ensemble_, rho_ = random_separable((2, 2), rng, n_terms)
        bound_ = e_upper_bound(
            measure, rho_, fast_search(n_terms), decomposition=ensemble_
        ).value
        ppt_ = is_separable_ppt(rho_)
        return _outcome(
            bound_ <= tol["separable"] and ppt_,
            "separable bound == 0 and PPT",
            {"family": "random_separable", "terms": n_terms},
            bound=bound_,
            ppt=ppt_,
        )
    if branch_ == 1:
        psi_ = haar_ket((2, 2), rng)
        while concurrence_2q(psi_) <= 0.05:
            psi_ = haar_ket((2, 2), rng)
        value_ = e_pure(measure, psi_).value
        return _outcome(
            value_ > tol["entangled"],
            "entangled e_pure > tol",
            {"family": "entangled_pure"},
            e_pure=value_,
            concurrence=concurrence_2q(psi_),
        )
    if branch_ == 2:
        return _werner_trial(measure, seed, trial // 4, tol)
    ensemble_, _ = random_separable((2, 2), rng, 1)
    value_ = e_pure(measure, ensemble_.states[0]).value
    return _outcome(
        value_ <= tol["separable"],
        "product e_pure == 0",
        {"family": "product"},
        e_pure=value_,
    )


@register_suite("oracles", oracle=1e-8)
def _oracles(measure, seed, trial, tol):
    psi_ = haar_ket((2, 2), seed)
    closed_ = e_l1_pure_closed_form(schmidt_decompose(psi_))
    concurrence_ = concurrence_2q(psi_)
    relent_ = e_pure("relent", psi_).value
    entropy_ = entropy_of_entanglement(psi_)
    return _outcome(
        abs(closed_ - concurrence_) <= tol["oracle"]
        and abs(relent_ - entropy_) <= tol["oracle"],
        "closed form == concurrence; relent == entanglement entropy",
        closed_form=closed_,
        concurrence=concurrence_,
        relent=relent_,
        entropy=entropy_,
    )


@register_suite("classifier", witness=1e-8)
def _classifier(measure, seed, trial, tol):
    kind_ = trial % 3
    if kind_ == 0:
        rho_, _ = cc_state((2, 2), seed)
        expected_ = Classification.CC
    elif kind_ == 1:
        rho_, _ = cq_state((2, 2), seed)
        expected_ = Classification.CQ
    else:
        rho_ = haar_ket((2, 2), seed).density()
        expected_ = Classification.NEITHER
    result_ = classify(rho_, options=ClassifyOptions(cmin=fast_cmin()))
    cq_replay = float(
        np.max(np.abs(off_diagonal_blocks(rho_.data, result_.cq.basis_A, 2)))
    )
    cc_replay = correlated_coherence("l1", rho_, result_.cc.witness)
    replays_ = (
        abs(cq_replay - result_.cq.residual) <= tol["witness"]
        and abs(cc_replay - result_.cc.value) <= tol["witness"]
    )
    return _outcome(
        result_.label == expected_ and replays_,
        f"label {expected_.value}; witnesses replay",
        {"expected": expected_.value, "label": result_.label.value},
        cc_value=result_.cc.value,
        cq_residual=result_.cq.residual,
        cc_replay=cc_replay,
        cq_replay=cq_replay,
    )


@register_suite("pure_convergence", agreement=1e-8)
def _pure_convergence(measure, seed, trial, tol):
    dims_ = [(2, 2), (2, 3), (3, 3)][trial % 3]
    psi_ = haar_ket(dims_, seed)
    e_ = e_pure(measure, psi_).value
    d_ = d_c_upper_bound(measure, psi_).value
    c_ = c_min(measure, psi_, fast_cmin()).value
    spread_ = max(e_, d_, c_) - min(e_, d_, c_)
    return _outcome(
        spread_ <= tol["agreement"],
        "e_pure == d_c == c_min",
        {"dims": list(dims_)},
        e_pure=e_,
        d_c=d_,
        c_min=c_,
    )


# ===========================================================
# running
def merge_tolerances(
    suite: Suite, overrides: Optional[Dict[str, float]] = None
) -> Dict[str, float]:
    tolerances_ = dict(suite.tolerances)
    for name_, value_ in (overrides or {}).items():
        if name_ not in tolerances_:
            raise UnknownToleranceError(suite.id, name_, tolerances_)
        tolerances_[name_] = float(value_)
    return tolerances_


@call_log(logger)
def run_suite(
    suite_id: str,
    measure: MeasureLike = "l1",
    n: Optional[int] = None,
    seed: Optional[int] = None,
    tolerances: Optional[Dict[str, float]] = None,
) -> PropertySuiteReport:
    suite_ = SuiteRegistry().get(suite_id)
    tolerances_ = merge_tolerances(suite_, tolerances)
    measure = get_measure(measure)
    n = n if n is not None else Settings.SUITE_TRIALS
    seed = seed if seed is not None else Settings.SEED
    logger.info(f"suite {suite_id} ({measure.id}): {n} trials, seed {seed}")
    start_ = time.perf_counter()
    failures_ = []
    for t_ in range(n):
        trial_seed = derive_seed(seed, t_)
        outcome_ = suite_.trial(measure, trial_seed, t_, tolerances_)
        if not outcome_.passed:
            logger.warning(f"suite {suite_id} trial {t_} failed")
            failures_.append(
                FailureRecord(
                    trial=t_,
                    seed=trial_seed,
                    observed=outcome_.observed,
                    required=outcome_.required,
                    inputs=outcome_.inputs,
                )
            )
    report_ = PropertySuiteReport(
        suite=suite_id,
        measure=measure.id,
        seed=seed,
        trials=n,
        failures=failures_,
        tolerances=tolerances_,
        wall_time=time.perf_counter() - start_,
    )
    logger.info(
        f"suite {suite_id}: {len(failures_)} failures in {n} trials "
        f"({report_.wall_time:.2f}s)"
    )
    return report_


def run_suites(
    suite_ids: Optional[Iterable[str]] = None,
    measure: MeasureLike = "l1",
    n: Optional[int] = None,
    seed: Optional[int] = None,
    tolerances: Optional[Dict[str, float]] = None,
) -> List[PropertySuiteReport]:
    """Run several suites; each override applies to every selected suite
    that declares the name, and a name none of them declares is an error.
    """
    registry_ = SuiteRegistry()
    suite_ids = list(suite_ids) if suite_ids else registry_.ids()
    suites_ = [registry_.get(s_) for s_ in suite_ids]
    known_ = {k_ for s_ in suites_ for k_ in s_.tolerances}
    for name_ in tolerances or {}:
        if name_ not in known_:
            raise UnknownToleranceError(",".join(suite_ids), name_, known_)
    measure = get_measure(measure)
    return [
        run_suite(
            s_.id,
            measure,
            n,
            seed,
            {
                k_: v_
                for k_, v_ in (tolerances or {}).items()
                if k_ in s_.tolerances
            },
        )
        for s_ in suites_
    ]


@call_log(logger)
def replay_failure(
    report: PropertySuiteReport, failure: FailureRecord
) -> TrialOutcome:
    """Re-run one recorded trial from its seed."""
    suite_ = SuiteRegistry().get(report.suite)
    return suite_.trial(
        get_measure(report.measure),
        failure.seed,
        failure.trial,
        report.tolerances or suite_.tolerances,
    )


def suite_convexity(measure: MeasureLike = "l1", n=None, seed=None):
    return run_suite("convexity", measure, n, seed)


def suite_monotonicity_pure(measure: MeasureLike = "l1", n=None, seed=None):
    return run_suite("monotonicity", measure, n, seed)


def suite_local_unitary_invariance(
    measure: MeasureLike = "l1", n=None, seed=None
):
    return run_suite("local_unitary", measure, n, seed)


def suite_degenerate_schmidt(measure: MeasureLike = "l1", n=None, seed=None):
    return run_suite("degenerate_schmidt", measure, n, seed)


def suite_faithfulness(measure: MeasureLike = "l1", n=None, seed=None):
    return run_suite("faithfulness", measure, n, seed)


def suite_oracles(measure: MeasureLike = "l1", n=None, seed=None):
    return run_suite("oracles", measure, n, seed)


def suite_classifier(measure: MeasureLike = "l1", n=None, seed=None):
    return run_suite("classifier", measure, n, seed)


def suite_pure_convergence(measure: MeasureLike = "l1", n=None, seed=None):
    return run_suite("pure_convergence", measure, n, seed)

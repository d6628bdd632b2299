import argparse
import sys
from typing import List, Optional, Tuple

from pydantic import ValidationError

from Coherence.exception import BaseCoherenceException, UnknownMeasureError
from Coherence.measures import MeasureRegistry, get_measure
from Core.config import Settings
from Core.logger import get_logger, set_level
from Correlated.correlated import c_min, correlated_coherence
from Correlated.types import CminOptions
from QState.codec import dumps, load_basis, load_ensemble, load_state
from QState.exception import BaseQStateException
from QState.ops import as_bipartite, marginals
from QState.sampling import SampleKind, sample
from QState.types import DensityMatrix, Ensemble, LocalBasisPair
from Quantifiers.classify import classify
from Quantifiers.discord import d_c_upper_bound
from Quantifiers.entanglement import e_convex_roof_estimate, e_upper_bound
from Quantifiers.exception import BaseQuantifierException
from Quantifiers.types import ClassifyOptions, SearchOptions
from Testbench.exception import UnknownSuiteError, UnknownToleranceError
from Testbench.report import reports_to_csv, reports_to_json, reports_to_table
from Testbench.suites import SuiteRegistry, run_suites
from utils.helpers import complex_2_pairs, dump_json

logger = get_logger(__name__)

EXIT_OK = 0
EXIT_FAILURES = 1
EXIT_USAGE = 2
EXIT_INPUT = 3


class UsageError(Exception):
    pass


def _density(path) -> DensityMatrix:
    state_ = load_state(path)
    if not isinstance(state_, DensityMatrix):
        state_ = state_.density()
    return as_bipartite(state_)


def _cmin_options(args) -> CminOptions:
    overrides_ = {
        "eps_deg": args.eps_deg,
        "restarts": args.restarts,
        "max_iters": args.max_iters,
        "tol": args.tol,
        "seed": args.seed,
    }
    return CminOptions(
        **{k: v for k, v in overrides_.items() if v is not None}
    )


def _search_options(args) -> SearchOptions:
    overrides_ = {
        "max_ancilla_dim": args.max_ancilla_dim,
        "restarts": args.search_restarts,
        "tol": args.tol,
        "seed": args.seed,
        "ensemble_size": args.ensemble_size,
    }
    return SearchOptions(
        cmin=_cmin_options(args),
        **{k: v for k, v in overrides_.items() if v is not None},
    )


def _decomposition(args) -> Optional[Ensemble]:
    return load_ensemble(args.decomposition) if args.decomposition else None


def _basis(args, rho: DensityMatrix) -> LocalBasisPair:
    if args.basis:
        return load_basis(args.basis)
    return LocalBasisPair.computational(*rho.dims)


# ===========================================================
# commands
def cmd_coherence(args) -> dict:
    measure_ = get_measure(args.measure)
    rho_ = _density(args.state)
    basis_ = load_basis(args.basis) if args.basis else None
    rho_a, rho_b = marginals(rho_)
    return {
        "measure": measure_.id,
        "C": measure_.evaluate(rho_, basis_),
        "C_A": measure_.evaluate(
            rho_a, basis_.basis_A if basis_ is not None else None
        ),
        "C_B": measure_.evaluate(
            rho_b, basis_.basis_B if basis_ is not None else None
        ),
    }


def cmd_corrcoh(args) -> dict:
    measure_ = get_measure(args.measure)
    rho_ = _density(args.state)
    return {
        "measure": measure_.id,
        "value": correlated_coherence(measure_, rho_, _basis(args, rho_)),
    }


def cmd_cmin(args):
    return c_min(args.measure, _density(args.state), _cmin_options(args))


def cmd_entanglement(args):
    rho_ = _density(args.state)
    if args.convex_roof:
        return e_convex_roof_estimate(
            args.measure, rho_, _search_options(args)
        )
    return e_upper_bound(
        args.measure,
        rho_,
        _search_options(args),
        decomposition=_decomposition(args),
    )


def cmd_discord(args):
    return d_c_upper_bound(
        args.measure,
        _density(args.state),
        _search_options(args),
        decomposition=_decomposition(args),
    )


def cmd_classify(args):
    options_ = ClassifyOptions(cmin=_cmin_options(args))
    if args.classify_tol is not None:
        options_ = options_.copy(update={"tol": args.classify_tol})
    return classify(_density(args.state), options=options_)


def cmd_sample(args):
    seed_ = args.seed if args.seed is not None else Settings.SEED
    res_ = sample(args.kind, args.dims, seed_)
    if args.kind == SampleKind.RANDOM_SEPARABLE:
        ensemble_, rho_ = res_
        return {
            "ensemble": ensemble_.to_json_dict(),
            "state": rho_.to_json_dict(),
        }
    if args.kind == SampleKind.HAAR_UNITARY:
        return {"unitaries": [complex_2_pairs(u_) for u_ in res_]}
    return res_


def cmd_validate(args):
    suites_ = args.suites.split(",") if args.suites else None
    return run_suites(
        suites_, args.measure, args.n, args.seed, dict(args.suite_tol or [])
    )


COMMANDS = {
    "coherence": cmd_coherence,
    "corrcoh": cmd_corrcoh,
    "cmin": cmd_cmin,
    "entanglement": cmd_entanglement,
    "discord": cmd_discord,
    "classify": cmd_classify,
    "sample": cmd_sample,
    "validate": cmd_validate,
}


# ===========================================================
# parser
def _dims(text: str) -> List[int]:
    try:
        dims_ = [int(x_) for x_ in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"dims must be comma separated integers, got {text!r}"
        ) from None
    if any(d_ < 1 for d_ in dims_):
        raise argparse.ArgumentTypeError(f"dims must be positive: {text!r}")
    return dims_


def _tolerance(text: str) -> Tuple[str, float]:
    name_, sep_, value_ = text.partition("=")
    try:
        tol_ = float(value_)
    except ValueError:
        tol_ = None
    if not (name_ and sep_ and tol_ is not None and tol_ > 0):
        raise argparse.ArgumentTypeError(
            f"expected NAME=VALUE with a positive VALUE, got {text!r}"
        )
    return name_, tol_


def _suite_defaults() -> str:
    return "; ".join(
        f"{s_}: " + ", ".join(
            f"{k_}={v_:g}"
            for k_, v_ in SuiteRegistry().get(s_).tolerances.items()
        )
        for s_ in SuiteRegistry().ids()
    )


def _add_cmin_flags(parser: argparse.ArgumentParser):
    group_ = parser.add_argument_group("c_min options")
    group_.add_argument(
        "--eps-deg",
        type=float,
        help=f"degeneracy threshold (default {Settings.EPS_DEG})",
    )
    group_.add_argument(
        "--restarts",
        type=int,
        help=f"optimizer starts (default {Settings.CMIN_RESTARTS})",
    )
    group_.add_argument(
        "--max-iters",
        type=int,
        help=f"iterations per start (default {Settings.CMIN_MAX_ITERS})",
    )
    group_.add_argument(
        "--tol",
        type=float,
        help=f"optimizer tolerance (default {Settings.CMIN_TOL})",
    )


def _add_search_flags(parser: argparse.ArgumentParser):
    group_ = parser.add_argument_group("extension search options")
    group_.add_argument(
        "--max-ancilla-dim",
        type=int,
        help=f"largest flag dimension (default {Settings.MAX_ANCILLA_DIM})",
    )
    group_.add_argument(
        "--search-restarts",
        type=int,
        help=f"decomposition starts (default {Settings.SEARCH_RESTARTS})",
    )
    group_.add_argument(
        "--decomposition", help="ensemble JSON reproducing the state"
    )


def build_parser() -> argparse.ArgumentParser:
    common_ = argparse.ArgumentParser(add_help=False)
    common_.add_argument(
        "--measure",
        default="l1",
        help=f"coherence measure, one of {MeasureRegistry().ids()}",
    )
    common_.add_argument(
        "--seed", type=int, help=f"random seed (default {Settings.SEED})"
    )
    common_.add_argument("--out", help="write the report here, not stdout")
    common_.add_argument(
        "--format", choices=["json", "csv"], default="json", dest="fmt"
    )
    common_.add_argument(
        "--log-level", help=f"logging level (default {Settings.LOG_LEVEL})"
    )

    parser_ = argparse.ArgumentParser(
        prog="corrcoh",
        description="Entanglement and discord from correlated coherence.",
    )
    sub_ = parser_.add_subparsers(dest="command", required=True)

    p_ = sub_.add_parser(
        "coherence", parents=[common_], help="C, C_A and C_B of a state"
    )
    p_.add_argument("state")
    p_.add_argument("--basis", help="local basis pair JSON")

    p_ = sub_.add_parser(
        "corrcoh", parents=[common_], help="correlated coherence in a basis"
    )
    p_.add_argument("state")
    p_.add_argument("--basis", help="local basis pair JSON")

    p_ = sub_.add_parser(
        "cmin", parents=[common_], help="minimal correlated coherence"
    )
    p_.add_argument("state")
    _add_cmin_flags(p_)

    p_ = sub_.add_parser(
        "entanglement", parents=[common_], help="E_C, exact or upper bound"
    )
    p_.add_argument("state")
    _add_cmin_flags(p_)
    _add_search_flags(p_)
    p_.add_argument(
        "--convex-roof",
        action="store_true",
        help="direct search over pure-state decompositions",
    )
    p_.add_argument("--ensemble-size", type=int)

    p_ = sub_.add_parser(
        "discord", parents=[common_], help="D_C upper bound"
    )
    p_.add_argument("state")
    _add_cmin_flags(p_)
    _add_search_flags(p_)
    p_.set_defaults(ensemble_size=None)

    p_ = sub_.add_parser(
        "classify", parents=[common_], help="CC, CQ or neither"
    )
    p_.add_argument("state")
    _add_cmin_flags(p_)
    p_.add_argument(
        "--classify-tol",
        type=float,
        help=f"classical residual threshold (default {Settings.CLASSIFY_TOL})",
    )

    p_ = sub_.add_parser(
        "validate", parents=[common_], help="run property suites"
    )
    p_.add_argument(
        "--suites", help=f"comma separated, from {SuiteRegistry().ids()}"
    )
    p_.add_argument(
        "--n",
        type=int,
        help=f"trials per suite (default {Settings.SUITE_TRIALS})",
    )
    p_.add_argument(
        "--suite-tol",
        type=_tolerance,
        action="append",
        metavar="NAME=VALUE",
        help=f"override a suite tolerance, repeatable ({_suite_defaults()})",
    )

    p_ = sub_.add_parser("sample", parents=[common_], help="random states")
    p_.add_argument(
        "--kind",
        type=SampleKind,
        default=SampleKind.HAAR_KET,
        choices=list(SampleKind),
    )
    p_.add_argument("--dims", type=_dims, default=[2, 2])
    return parser_


def _render(args, res_) -> str:
    if args.command == "validate":
        if args.fmt == "csv":
            return reports_to_csv(res_)
        return reports_to_json(res_)
    if args.fmt == "csv":
        raise UsageError("csv output is only available for validate")
    return dumps(res_) if hasattr(res_, "to_json_dict") else dump_json(res_)


def _emit(args, text: str):
    if args.out:
        with open(args.out, "w") as f_:
            f_.write(text if text.endswith("\n") else text + "\n")
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


def run(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    if args.log_level:
        set_level(args.log_level)
    try:
        get_measure(args.measure)
        if args.command == "validate" and args.suites:
            for suite_id in args.suites.split(","):
                SuiteRegistry().get(suite_id)
        res_ = COMMANDS[args.command](args)
        _emit(args, _render(args, res_))
    except (
        UnknownMeasureError,
        UnknownSuiteError,
        UnknownToleranceError,
        UsageError,
    ) as e:
        sys.stderr.write(f"corrcoh: {e}\n")
        return EXIT_USAGE
    except (
        BaseQStateException,
        BaseCoherenceException,
        BaseQuantifierException,
        ValidationError,
    ) as e:
        sys.stderr.write(f"corrcoh: {e}\n")
        return EXIT_INPUT
    if args.command == "validate":
        sys.stderr.write(reports_to_table(res_) + "\n")
        if not all(r_.passed for r_ in res_):
            return EXIT_FAILURES
    return EXIT_OK

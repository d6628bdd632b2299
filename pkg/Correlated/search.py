from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Dict, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np
from scipy.linalg import expm
from scipy.optimize import minimize

from Core.logger import get_logger
from Correlated.types import AdmissibleBases
from QState.sampling import haar_unitary

logger = get_logger(__name__)

Blocks = Dict[int, np.ndarray]
Start = Tuple[str, List[Blocks]]
Objective = Callable[[List[np.ndarray]], float]

SIMPLEX_STEP = 0.5
XATOL = 1e-8


def hermitian_generator(x: np.ndarray, m: int) -> np.ndarray:
    """Hermitian ``m x m`` matrix from ``m**2`` real parameters."""
    h_ = np.diag(np.asarray(x[:m], dtype=complex))
    iu_ = np.triu_indices(m, 1)
    t_ = len(iu_[0])
    upper_ = x[m : m + t_] + 1j * x[m + t_ : m + 2 * t_]
    h_[iu_] = upper_
    h_[(iu_[1], iu_[0])] = np.conj(upper_)
    return h_


def generator_unitary(x: np.ndarray, m: int) -> np.ndarray:
    return expm(1j * hermitian_generator(x, m))


class SearchOutcome(NamedTuple):
    name: str
    value: float
    bases: List[np.ndarray]
    converged: bool
    evaluations: int


class ClusterSearch:
    """Nelder-Mead over the free cluster unitaries of one or more sides.

    Each side is a set of admissible bases; a point of the search is
    ``start_block_k @ exp(i H(x_k))`` for every searchable cluster ``k``.
    The objective receives the full basis matrix of every side.
    """

    def __init__(
        self,
        sides: Sequence[AdmissibleBases],
        objective: Objective,
        max_iters: int,
        tol: float,
        floor: float = 0.0,
    ):
        self.sides = list(sides)
        self.objective = objective
        self.max_iters = max_iters
        self.tol = tol
        self.floor = floor
        self.slots = [
            (s_, c_, side_.profile.clusters[c_].multiplicity)
            for s_, side_ in enumerate(self.sides)
            for c_ in side_.searchable()
        ]

    @property
    def n_params(self) -> int:
        return sum(m_ ** 2 for _, _, m_ in self.slots)

    def identity_start(self) -> List[Blocks]:
        return [side_.identity_blocks() for side_ in self.sides]

    def haar_start(self, rng: np.random.Generator) -> List[Blocks]:
        start_ = self.identity_start()
        for s_, c_, m_ in self.slots:
            start_[s_][c_] = haar_unitary(m_, rng)
        return start_

    def project_start(self, targets: Sequence[Optional[np.ndarray]]):
        start_ = self.identity_start()
        for s_, target_ in enumerate(targets):
            if target_ is not None:
                start_[s_] = self.sides[s_].project(target_)
        return start_

    def bases(self, start: List[Blocks], x: Optional[np.ndarray] = None):
        blocks_ = [dict(b_) for b_ in start]
        if x is not None:
            pos_ = 0
            for s_, c_, m_ in self.slots:
                u_ = generator_unitary(x[pos_ : pos_ + m_ ** 2], m_)
                blocks_[s_][c_] = blocks_[s_][c_] @ u_
                pos_ += m_ ** 2
        return [side_.basis(b_) for side_, b_ in zip(self.sides, blocks_)]

    def _done(self, value: float) -> bool:
        return value <= self.floor + self.tol

    def run(self, name: str, start: List[Blocks]) -> SearchOutcome:
        calls_ = [0]

        def f_(x):
            calls_[0] += 1
            return self.objective(self.bases(start, x))

        x0_ = np.zeros(self.n_params)
        value_ = f_(x0_)
        if not self.slots or self._done(value_):
            return SearchOutcome(
                name, value_, self.bases(start), True, calls_[0]
            )
        simplex_ = np.vstack([x0_, SIMPLEX_STEP * np.eye(self.n_params)])
        res_ = minimize(
            f_,
            x0_,
            method="Nelder-Mead",
            options={
                "maxiter": self.max_iters,
                "maxfev": 2 * self.max_iters,
                "xatol": XATOL,
                "fatol": self.tol,
                "initial_simplex": simplex_,
            },
        )
        converged_ = bool(res_.status == 0) or self._done(float(res_.fun))
        if not converged_:
            logger.warning(
                f"start {name} stopped at the iteration limit "
                f"({self.max_iters}) with value {res_.fun:.3g}"
            )
        if res_.fun > value_:
            return SearchOutcome(
                name, value_, self.bases(start), converged_, calls_[0]
            )
        return SearchOutcome(
            name,
            float(res_.fun),
            self.bases(start, res_.x),
            converged_,
            calls_[0],
        )

    def run_all(self, starts: Sequence[Start], workers: int = 1):
        """Run every start and min-reduce, lowest index winning ties.

        Outcomes after the first start that reaches the floor are dropped,
        so the result does not depend on ``workers``.
        """
        if workers > 1 and len(starts) > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool_:
                outcomes_ = list(pool_.map(lambda s_: self.run(*s_), starts))
            for i_, outcome_ in enumerate(outcomes_):
                if self._done(outcome_.value):
                    outcomes_ = outcomes_[: i_ + 1]
                    break
        else:
            outcomes_ = []
            for start_ in starts:
                outcomes_.append(self.run(*start_))
                if self._done(outcomes_[-1].value):
                    break
        best_ = min(
            range(len(outcomes_)), key=lambda i: (outcomes_[i].value, i)
        )
        logger.info(
            f"{len(outcomes_)} of {len(starts)} starts run, best "
            f"{outcomes_[best_].value:.6g} from {outcomes_[best_].name}"
        )
        return outcomes_[best_], outcomes_

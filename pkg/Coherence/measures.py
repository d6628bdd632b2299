from abc import ABCMeta, abstractmethod
from typing import ClassVar, Dict, List, Union

import numpy as np

from Coherence.exception import MeasureArgumentError, UnknownMeasureError
from Core.logger import get_logger
from QState.exception import QStateArgumentError
from QState.types import BasisLike, DensityMatrix, basis_matrix
from utils.helpers import Singleton

logger = get_logger(__name__)


def shannon_entropy(probs: np.ndarray) -> float:
    """Entropy in bits with ``0 log 0 = 0``."""
    p_ = np.clip(np.real(np.asarray(probs, dtype=complex)), 0.0, None)
    p_ = p_[p_ > 0]
    return float(-np.sum(p_ * np.log2(p_)))


def spectrum_entropy(mat: np.ndarray) -> float:
    return shannon_entropy(np.linalg.eigvalsh(mat))


def von_neumann_entropy(rho: DensityMatrix) -> float:
    return shannon_entropy(rho.spectrum())


class CoherenceMeasure(metaclass=ABCMeta):
    """Basis-dependent functional that vanishes exactly on incoherent states.

    Subclasses implement :meth:`evaluate_rotated`, which receives the state
    already written in the reference basis (``W^† rho W``), so that the
    optimizers can rotate once and evaluate without re-validation.
    """

    id: ClassVar[str]

    def evaluate(self, rho: DensityMatrix, basis: BasisLike = None) -> float:
        try:
            w_ = basis_matrix(basis, rho.dim)
        except QStateArgumentError as e:
            raise MeasureArgumentError(self.id, e.msg) from None
        return self.evaluate_rotated(w_.conj().T @ rho.data @ w_)

    __call__ = evaluate

    @abstractmethod
    def evaluate_rotated(self, sigma: np.ndarray) -> float:
        raise NotImplementedError

    def __repr__(self):
        return f"{type(self).__name__}(id={self.id!r})"


class MeasureRegistry(metaclass=Singleton):
    def __init__(self):
        self._measures: Dict[str, CoherenceMeasure] = {}

    def register(self, measure_cls):
        self._measures[measure_cls.id] = measure_cls()
        logger.debug(f"registered coherence measure {measure_cls.id}")
        return measure_cls

    def get(self, measure_id: str) -> CoherenceMeasure:
        try:
            return self._measures[measure_id]
        except KeyError:
            raise UnknownMeasureError(measure_id, self._measures) from None

    def ids(self) -> List[str]:
        return sorted(self._measures)


def register_measure(measure_cls):
    return MeasureRegistry().register(measure_cls)


MeasureLike = Union[str, CoherenceMeasure]


def get_measure(measure: MeasureLike) -> CoherenceMeasure:
    if isinstance(measure, CoherenceMeasure):
        return measure
    return MeasureRegistry().get(measure)


@register_measure
class L1Coherence(CoherenceMeasure):
    id = "l1"

    def evaluate_rotated(self, sigma: np.ndarray) -> float:
        abs_ = np.abs(sigma)
        return float(abs_.sum() - np.trace(abs_))


@register_measure
class RelativeEntropyCoherence(CoherenceMeasure):
    id = "relent"

    def evaluate_rotated(self, sigma: np.ndarray) -> float:
        value_ = shannon_entropy(np.diag(sigma)) - spectrum_entropy(sigma)
        return max(value_, 0.0)


def c_l1(rho: DensityMatrix, basis: BasisLike = None) -> float:
    return MeasureRegistry().get(L1Coherence.id).evaluate(rho, basis)


def c_relent(rho: DensityMatrix, basis: BasisLike = None) -> float:
    return MeasureRegistry().get(RelativeEntropyCoherence.id).evaluate(
        rho, basis
    )

from typing import Any, Dict, List

import numpy as np
from pydantic import BaseModel, root_validator, validator

from QState.exception import QStateValidationError
from Testbench.majorization import is_majorized


class TrialOutcome(BaseModel):
    passed: bool
    observed: Dict[str, float]
    required: str
    inputs: Dict[str, Any] = {}


class FailureRecord(BaseModel):
    trial: int
    seed: int
    observed: Dict[str, float]
    required: str
    inputs: Dict[str, Any] = {}

    def to_json_dict(self) -> dict:
        return self.dict()


class PropertySuiteReport(BaseModel):
    suite: str
    measure: str
    seed: int
    trials: int
    failures: List[FailureRecord] = []
    tolerances: Dict[str, float] = {}
    wall_time: float = 0.0

    # noinspection PyMethodParameters
    @validator("failures")
    def process__failures(cls, v):
        return sorted(v, key=lambda f_: f_.trial)

    @property
    def passed(self) -> bool:
        return not self.failures

    def to_json_dict(self, include_wall_time: bool = False) -> dict:
        out_ = {
            "suite": self.suite,
            "measure": self.measure,
            "seed": self.seed,
            "trials": self.trials,
            "passed": self.passed,
            "failures": [f_.to_json_dict() for f_ in self.failures],
            "tolerances": self.tolerances,
        }
        if include_wall_time:
            out_["wall_time"] = self.wall_time
        return out_


class MajorizationPair(BaseModel):
    """``source`` is majorized by ``target``; LOCC maps source to target."""

    source: np.ndarray
    target: np.ndarray

    class Config:
        arbitrary_types_allowed = True
        allow_mutation = False

    # noinspection PyMethodParameters
    @validator("source", "target", pre=True)
    def process__spectrum(cls, v):
        arr = np.sort(np.asarray(v, dtype=float).reshape(-1))[::-1]
        if np.any(arr < -1e-12) or abs(arr.sum() - 1) > 1e-10:
            raise QStateValidationError(
                "probability vector", f"got {arr.tolist()}"
            )
        return np.clip(arr, 0.0, None)

    # noinspection PyMethodParameters
    @root_validator(skip_on_failure=True)
    def check__majorization(cls, values):
        source_, target_ = values["source"], values["target"]
        if source_.shape != target_.shape:
            raise QStateValidationError(
                "equal spectrum lengths",
                f"{source_.shape[0]} vs {target_.shape[0]}",
            )
        if not is_majorized(source_, target_):
            raise QStateValidationError(
                "source majorized by target",
                f"{source_.tolist()} is not majorized by {target_.tolist()}",
            )
        return values

    def to_json_dict(self) -> dict:
        return {"source": self.source.tolist(), "target": self.target.tolist()}

from __future__ import annotations

from enum import Enum
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, Field, validator

from Core.config import Settings
from Correlated.types import CminOptions, CminResult
from QState.ops import partial_trace
from QState.types import DensityMatrix, LocalBasisPair
from utils.helpers import complex_2_pairs


class BoundKind(str, Enum):
    EXACT = "exact"
    UPPER_BOUND = "upper_bound"


class AlignmentSide(str, Enum):
    BOTH = "both"
    BOB = "bob"
    NONE = "none"


class ExtensionFamily(str, Enum):
    TRIVIAL = "trivial"
    DECOMPOSITION = "decomposition"
    FLAGGED = "flagged"
    SWAPPED_COPY = "swapped_copy"
    CQ = "cq"


class ExtensionCandidate(BaseModel):
    """An extension of a bipartite state by ancillas ``A'`` and/or ``B'``.

    ``alignment`` holds the local unitaries on ``AA'`` and ``BB'`` after
    which the state is invariant under the ``AA' <-> BB'`` swap, up to
    ``symmetry_residual``. Bob-only extensions are not symmetric and carry
    no alignment.
    """

    state: DensityMatrix
    ancilla_dims: Tuple[int, int]
    family: ExtensionFamily
    symmetric: bool = True
    symmetry_residual: float = 0.0
    alignment_side: AlignmentSide = AlignmentSide.NONE
    alignment: Optional[LocalBasisPair] = None
    hint: Optional[LocalBasisPair] = None

    class Config:
        arbitrary_types_allowed = True
        allow_mutation = False

    def base_state(self) -> DensityMatrix:
        return partial_trace(self.state, ["A", "B"])

    def to_json_dict(self) -> dict:
        return {
            "family": self.family.value,
            "ancilla_dims": list(self.ancilla_dims),
            "symmetric": self.symmetric,
            "symmetry_residual": self.symmetry_residual,
            "alignment_side": self.alignment_side.value,
            "state": self.state.to_json_dict(),
        }


class BoundReport(BaseModel):
    value: float
    kind: BoundKind
    measure: str
    witness: Any = None
    ancilla_dims: Optional[Tuple[int, int]] = None
    ancilla_dims_tried: List[Tuple[int, int]] = []
    restarts: int = 0
    seed: Optional[int] = None
    diagnostics: Dict[str, Any] = {}

    class Config:
        arbitrary_types_allowed = True
        allow_mutation = False

    # noinspection PyMethodParameters
    @validator("value")
    def check__value(cls, v):
        if v < 0:
            raise ValueError(f"negative bound {v}")
        return v

    def to_json_dict(self) -> dict:
        witness_ = self.witness
        if hasattr(witness_, "to_json_dict"):
            witness_ = witness_.to_json_dict()
        return {
            "value": self.value,
            "kind": self.kind.value,
            "measure": self.measure,
            "ancilla_dims": (
                list(self.ancilla_dims) if self.ancilla_dims else None
            ),
            "ancilla_dims_tried": [list(t_) for t_ in self.ancilla_dims_tried],
            "restarts": self.restarts,
            "seed": self.seed,
            "diagnostics": self.diagnostics,
            "witness": witness_,
        }


def _settings_default(name):
    return Field(default_factory=lambda: getattr(Settings, name))


class SearchOptions(BaseModel):
    max_ancilla_dim: int = _settings_default("MAX_ANCILLA_DIM")
    restarts: int = _settings_default("SEARCH_RESTARTS")
    max_iters: int = _settings_default("SEARCH_MAX_ITERS")
    tol: float = _settings_default("CMIN_TOL")
    seed: int = _settings_default("SEED")
    ensemble_size: Optional[int] = None
    haar_alignments: int = 2
    symmetry_tol: float = 1e-8
    cmin: CminOptions = Field(default_factory=CminOptions)

    # noinspection PyMethodParameters
    @validator("max_ancilla_dim", "restarts", "max_iters")
    def check__count(cls, v):
        if v < 1:
            raise ValueError("must be at least 1")
        return v


class ClassifyOptions(BaseModel):
    tol: float = _settings_default("CLASSIFY_TOL")
    cmin: CminOptions = Field(default_factory=CminOptions)


class CQResult(BaseModel):
    """Alice basis in which dephasing ``A`` leaves the state unchanged."""

    classical: bool
    basis_A: np.ndarray
    residual: float
    converged: bool

    class Config:
        arbitrary_types_allowed = True
        allow_mutation = False

    def __bool__(self):
        return self.classical

    def to_json_dict(self) -> dict:
        return {
            "classical": self.classical,
            "residual": self.residual,
            "converged": self.converged,
            "basis_A": complex_2_pairs(self.basis_A),
        }


class CCResult(BaseModel):
    classical: bool
    witness: LocalBasisPair
    value: float
    converged: bool

    class Config:
        arbitrary_types_allowed = True
        allow_mutation = False

    def __bool__(self):
        return self.classical

    @classmethod
    def from_cmin(cls, result: CminResult, tol: float) -> CCResult:
        return cls(
            classical=result.value <= tol,
            witness=result.argmin_basis,
            value=result.value,
            converged=result.converged,
        )

    def to_json_dict(self) -> dict:
        return {
            "classical": self.classical,
            "value": self.value,
            "converged": self.converged,
            "witness": self.witness.to_json_dict(),
        }


class Classification(str, Enum):
    CC = "CC"
    CQ = "CQ"
    NEITHER = "neither"


class ClassifyResult(BaseModel):
    label: Classification
    cc: CCResult
    cq: CQResult

    class Config:
        allow_mutation = False

    def to_json_dict(self) -> dict:
        return {
            "label": self.label.value,
            "cc": self.cc.to_json_dict(),
            "cq": self.cq.to_json_dict(),
        }


from __future__ import annotations

from typing import Dict, List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, Field, root_validator, validator
from scipy.linalg import polar

from Core.config import Settings
from QState.exception import QStateValidationError
from QState.types import LocalBasisPair

KERNEL_TOL = 1e-12


class Cluster(BaseModel):
    value: float
    indices: Tuple[int, ...]

    class Config:
        allow_mutation = False

    @property
    def multiplicity(self) -> int:
        return len(self.indices)


class DegeneracyProfile(BaseModel):
    clusters: List[Cluster]
    eps_deg: float
    scale: float
    kernel_tol: float = KERNEL_TOL

    class Config:
        allow_mutation = False

    # noinspection PyMethodParameters
    @root_validator(skip_on_failure=True)
    def check__clusters(cls, values):
        idx_ = sorted(i for c_ in values["clusters"] for i in c_.indices)
        if idx_ != list(range(len(idx_))):
            raise QStateValidationError(
                "multiplicities sum to dimension", f"indices {idx_}"
            )
        return values

    @property
    def dimension(self) -> int:
        return sum(c_.multiplicity for c_ in self.clusters)

    @property
    def multiplicities(self) -> List[int]:
        return [c_.multiplicity for c_ in self.clusters]

    def is_kernel(self, cluster: Cluster) -> bool:
        return cluster.value <= self.kernel_tol


class AdmissibleBases(BaseModel):
    """Eigenbases of a marginal: ``eigenvectors @ blockdiag(U_k)``.

    One free unitary ``U_k`` per eigenvalue cluster; for singleton clusters
    it is a phase and cannot change a conforming measure.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    profile: DegeneracyProfile

    class Config:
        arbitrary_types_allowed = True
        allow_mutation = False

    @property
    def dim(self) -> int:
        return self.eigenvectors.shape[0]

    def searchable(self) -> List[int]:
        """Clusters whose rotation can change the objective."""
        return [
            c_
            for c_, cl_ in enumerate(self.profile.clusters)
            if cl_.multiplicity > 1 and not self.profile.is_kernel(cl_)
        ]

    @property
    def free_parameters(self) -> int:
        clusters_ = self.profile.clusters
        return sum(clusters_[c_].multiplicity ** 2 for c_ in self.searchable())

    def identity_blocks(self) -> Dict[int, np.ndarray]:
        return {
            c_: np.eye(cl_.multiplicity, dtype=complex)
            for c_, cl_ in enumerate(self.profile.clusters)
        }

    def basis(self, blocks: Dict[int, np.ndarray]) -> np.ndarray:
        out_ = np.array(self.eigenvectors, dtype=complex)
        for c_, block_ in blocks.items():
            idx_ = list(self.profile.clusters[c_].indices)
            out_[:, idx_] = self.eigenvectors[:, idx_] @ block_
        return out_

    def project(self, target: np.ndarray) -> Dict[int, np.ndarray]:
        """Blocks of the admissible basis closest to the columns of ``target``.

        Each target column is assigned to the cluster it overlaps most; a
        cluster that receives exactly its multiplicity of columns gets the
        unitary polar factor of their overlap matrix.
        """
        target = np.asarray(target, dtype=complex)
        clusters_ = self.profile.clusters
        vecs_ = self.eigenvectors
        weights_ = np.stack(
            [
                np.sum(
                    np.abs(vecs_[:, list(cl_.indices)].conj().T @ target) ** 2,
                    axis=0,
                )
                for cl_ in clusters_
            ]
        )
        owner_ = np.argmax(weights_, axis=0)
        blocks_ = {}
        for c_, cl_ in enumerate(clusters_):
            cols_ = np.flatnonzero(owner_ == c_)
            if cols_.size != cl_.multiplicity:
                cols_ = np.sort(np.argsort(-weights_[c_])[: cl_.multiplicity])
            overlap_ = self.eigenvectors[:, list(cl_.indices)].conj().T @ (
                target[:, cols_]
            )
            blocks_[c_] = polar(overlap_)[0]
        return blocks_


def _settings_default(name):
    return Field(default_factory=lambda: getattr(Settings, name))


class CminOptions(BaseModel):
    eps_deg: float = _settings_default("EPS_DEG")
    restarts: int = _settings_default("CMIN_RESTARTS")
    max_iters: int = _settings_default("CMIN_MAX_ITERS")
    tol: float = _settings_default("CMIN_TOL")
    seed: int = _settings_default("SEED")
    workers: int = _settings_default("CMIN_WORKERS")
    hints: List[LocalBasisPair] = []

    class Config:
        arbitrary_types_allowed = True

    # noinspection PyMethodParameters
    @validator("eps_deg", "tol")
    def check__positive(cls, v):
        if v <= 0:
            raise ValueError("must be positive")
        return v

    # noinspection PyMethodParameters
    @validator("restarts", "max_iters", "workers")
    def check__count(cls, v):
        if v < 1:
            raise ValueError("must be at least 1")
        return v


class CminResult(BaseModel):
    value: float
    argmin_basis: LocalBasisPair
    restarts_used: int
    converged: bool
    evaluations: int = 0
    start: Optional[str] = None

    class Config:
        arbitrary_types_allowed = True
        allow_mutation = False

    def to_json_dict(self) -> dict:
        return {
            "value": self.value,
            "restarts_used": self.restarts_used,
            "converged": self.converged,
            "evaluations": self.evaluations,
            "start": self.start,
            "argmin_basis": self.argmin_basis.to_json_dict(),
        }

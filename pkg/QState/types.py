from __future__ import annotations

import math
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
from pydantic import BaseModel, root_validator, validator

from Core.config import Settings
from QState.exception import (
    QStateArgumentError,
    QStateSizeError,
    QStateValidationError,
)
from utils.helpers import complex_2_pairs

ALICE = "A"
BOB = "B"
_DEFAULT_LABELS = {
    1: ("A",),
    2: ("A", "B"),
    3: ("A", "B", "B'"),
    4: ("A", "A'", "B", "B'"),
}
PHASE_TOL = 1e-12


def default_labels(n_factors: int) -> Tuple[str, ...]:
    try:
        return _DEFAULT_LABELS[n_factors]
    except KeyError:
        raise QStateArgumentError(
            f"no default labels for {n_factors} factors"
        ) from None


def party_of(label: str) -> str:
    if label.startswith(ALICE):
        return ALICE
    if label.startswith(BOB):
        return BOB
    raise QStateArgumentError(f"label {label!r} names neither A nor B")


def check_size(dims: Sequence[int]):
    if any(d > Settings.MAX_FACTOR_DIM for d in dims):
        raise QStateSizeError(dims, Settings.MAX_FACTOR_DIM)
    if math.prod(dims) > Settings.MAX_TOTAL_DIM:
        raise QStateSizeError(dims, Settings.MAX_TOTAL_DIM)


def fix_phases(mat: np.ndarray) -> np.ndarray:
    """Make the first nonzero entry of every column real nonnegative."""
    mat = np.array(mat, dtype=complex)
    for c_ in range(mat.shape[1]):
        col_ = mat[:, c_]
        nz_ = np.flatnonzero(np.abs(col_) > PHASE_TOL)
        if nz_.size:
            lead_ = col_[nz_[0]]
            mat[:, c_] = col_ * (np.conj(lead_) / abs(lead_))
    return mat


def unitarity_residual(mat: np.ndarray) -> float:
    mat = np.asarray(mat)
    eye_ = np.eye(mat.shape[1])
    return float(np.max(np.abs(mat.conj().T @ mat - eye_)))


def _readonly(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


def _coerce_dims(v) -> Tuple[int, ...]:
    dims_ = tuple(int(d) for d in v)
    if not dims_ or any(d < 1 for d in dims_):
        raise QStateValidationError("positive dims", f"got {dims_}")
    return dims_


def _check_labels(labels, dims) -> Tuple[str, ...]:
    labels = tuple(labels) if labels else default_labels(len(dims))
    if len(labels) != len(dims):
        raise QStateValidationError(
            "one label per factor", f"labels {labels} for dims {dims}"
        )
    if len(set(labels)) != len(labels):
        raise QStateValidationError("unique labels", f"got {labels}")
    for l_ in labels:
        party_of(l_)
    return labels


class _PartyMixin:
    dims: Tuple[int, ...]
    labels: Tuple[str, ...]

    @property
    def dim(self) -> int:
        return math.prod(self.dims)

    def index_of(self, tag: str) -> int:
        try:
            return self.labels.index(tag)
        except ValueError:
            raise QStateArgumentError(
                f"unknown subsystem tag {tag!r}, have {self.labels}"
            ) from None

    def party_indices(self, party: str) -> List[int]:
        return [
            c_ for c_, l_ in enumerate(self.labels) if party_of(l_) == party
        ]

    @property
    def party_dims(self) -> Tuple[int, int]:
        d_a = math.prod(self.dims[i] for i in self.party_indices(ALICE))
        d_b = math.prod(self.dims[i] for i in self.party_indices(BOB))
        return d_a, d_b

    @property
    def is_grouped(self) -> bool:
        """Alice's factors form a prefix of the factor list."""
        alice_ = self.party_indices(ALICE)
        return alice_ == list(range(len(alice_)))


class DensityMatrix(_PartyMixin, BaseModel):
    data: np.ndarray
    dims: Tuple[int, ...]
    labels: Tuple[str, ...] = ()

    class Config:
        arbitrary_types_allowed = True
        allow_mutation = False

    # noinspection PyMethodParameters
    @validator("data", pre=True)
    def process__data(cls, v):
        arr = np.array(v, dtype=complex)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise QStateValidationError(
                "square matrix", f"shape {arr.shape}"
            )
        return arr

    # noinspection PyMethodParameters
    @validator("dims", pre=True)
    def process__dims(cls, v):
        return _coerce_dims(v)

    # noinspection PyMethodParameters
    @validator("labels", pre=True)
    def process__labels(cls, v):
        return tuple(v) if v else ()

    # noinspection PyMethodParameters
    @root_validator(skip_on_failure=True)
    def check__invariants(cls, values):
        arr, dims = values["data"], values["dims"]
        values["labels"] = _check_labels(values.get("labels"), dims)
        if math.prod(dims) != arr.shape[0]:
            raise QStateValidationError(
                "product of dims equals matrix dimension",
                f"dims {dims} vs matrix {arr.shape[0]}",
            )
        check_size(dims)
        herm_ = float(np.max(np.abs(arr - arr.conj().T)))
        if herm_ > Settings.TOL_HERMITIAN:
            raise QStateValidationError(
                "Hermiticity", f"max |rho - rho^dagger| = {herm_:.3g}"
            )
        arr = (arr + arr.conj().T) / 2
        trace_ = complex(np.trace(arr))
        if abs(trace_ - 1) > Settings.TOL_TRACE:
            raise QStateValidationError(
                "unit trace", f"trace {trace_.real:.12g}"
            )
        min_eig = float(np.linalg.eigvalsh(arr)[0])
        if min_eig < -Settings.TOL_PSD:
            raise QStateValidationError(
                "positive semidefinite",
                f"min eigenvalue {min_eig:.3g} below {-Settings.TOL_PSD:.0e}",
            )
        values["data"] = _readonly(arr)
        return values

    @classmethod
    def trusted(cls, data, dims, labels=None) -> DensityMatrix:
        """Wrap the output of an operation on already validated states."""
        arr = np.array(data, dtype=complex)
        arr = _readonly((arr + arr.conj().T) / 2)
        dims = _coerce_dims(dims)
        return cls.construct(
            data=arr, dims=dims, labels=_check_labels(labels, dims)
        )

    def spectrum(self) -> np.ndarray:
        """Eigenvalues, descending, with PSD drift clipped to zero."""
        eig_ = np.linalg.eigvalsh(self.data)[::-1]
        return np.clip(eig_, 0.0, None)

    @property
    def purity(self) -> float:
        return float(np.real(np.trace(self.data @ self.data)))

    def is_pure(self, tol: float = 1e-10) -> bool:
        return self.purity >= 1 - tol

    def principal_vector(self) -> np.ndarray:
        _, vecs = np.linalg.eigh(self.data)
        return vecs[:, -1]

    def to_json_dict(self) -> dict:
        return {
            "dims": list(self.dims),
            "labels": list(self.labels),
            "matrix": complex_2_pairs(self.data),
        }


class Ket(_PartyMixin, BaseModel):
    amplitudes: np.ndarray
    dims: Tuple[int, ...]
    labels: Tuple[str, ...] = ()

    class Config:
        arbitrary_types_allowed = True
        allow_mutation = False

    # noinspection PyMethodParameters
    @validator("amplitudes", pre=True)
    def process__amplitudes(cls, v):
        arr = np.array(v, dtype=complex).reshape(-1)
        return arr

    # noinspection PyMethodParameters
    @validator("dims", pre=True)
    def process__dims(cls, v):
        return _coerce_dims(v)

    # noinspection PyMethodParameters
    @validator("labels", pre=True)
    def process__labels(cls, v):
        return tuple(v) if v else ()

    # noinspection PyMethodParameters
    @root_validator(skip_on_failure=True)
    def check__invariants(cls, values):
        arr, dims = values["amplitudes"], values["dims"]
        values["labels"] = _check_labels(values.get("labels"), dims)
        if math.prod(dims) != arr.shape[0]:
            raise QStateValidationError(
                "product of dims equals vector length",
                f"dims {dims} vs length {arr.shape[0]}",
            )
        check_size(dims)
        norm_ = float(np.linalg.norm(arr))
        if abs(norm_ - 1) > Settings.TOL_NORM:
            raise QStateValidationError("unit norm", f"norm {norm_:.12g}")
        values["amplitudes"] = _readonly(arr)
        return values

    @classmethod
    def normalized(cls, amplitudes, dims, labels=None) -> Ket:
        arr = np.array(amplitudes, dtype=complex).reshape(-1)
        return cls(
            amplitudes=arr / np.linalg.norm(arr), dims=dims, labels=labels
        )

    def density(self) -> DensityMatrix:
        return DensityMatrix.trusted(
            np.outer(self.amplitudes, self.amplitudes.conj()),
            self.dims,
            self.labels,
        )

    def coefficient_matrix(self) -> np.ndarray:
        if len(self.dims) != 2:
            raise QStateArgumentError(
                f"bipartite ket required, got dims {self.dims}"
            )
        return self.amplitudes.reshape(self.dims)

    def to_json_dict(self) -> dict:
        return {
            "dims": list(self.dims),
            "labels": list(self.labels),
            "vector": complex_2_pairs(self.amplitudes),
        }


class LocalBasisPair(BaseModel):
    """Columns of ``basis_A``/``basis_B`` are the local basis vectors."""

    basis_A: np.ndarray
    basis_B: np.ndarray

    class Config:
        arbitrary_types_allowed = True
        allow_mutation = False

    # noinspection PyMethodParameters
    @validator("basis_A", "basis_B", pre=True)
    def process__basis(cls, v):
        arr = np.array(v, dtype=complex)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise QStateValidationError("square basis", f"shape {arr.shape}")
        res_ = unitarity_residual(arr)
        if res_ > Settings.TOL_UNITARY:
            raise QStateValidationError(
                "orthonormal basis", f"max |B^dagger B - I| = {res_:.3g}"
            )
        return _readonly(arr)

    @classmethod
    def computational(cls, d_a: int, d_b: int) -> LocalBasisPair:
        return cls(basis_A=np.eye(d_a), basis_B=np.eye(d_b))

    @property
    def dims(self) -> Tuple[int, int]:
        return self.basis_A.shape[0], self.basis_B.shape[0]

    def product(self) -> np.ndarray:
        return np.kron(self.basis_A, self.basis_B)

    def to_json_dict(self) -> dict:
        return {
            "basis_A": complex_2_pairs(self.basis_A),
            "basis_B": complex_2_pairs(self.basis_B),
        }


class SchmidtForm(BaseModel):
    coefficients: np.ndarray
    basis_A: np.ndarray
    basis_B: np.ndarray

    class Config:
        arbitrary_types_allowed = True
        allow_mutation = False

    # noinspection PyMethodParameters
    @validator("coefficients", pre=True)
    def process__coefficients(cls, v):
        arr = np.array(v, dtype=float).reshape(-1)
        if np.any(arr < 0):
            raise QStateValidationError(
                "nonnegative Schmidt coefficients", f"got {arr}"
            )
        if abs(arr.sum() - 1) > Settings.TOL_TRACE:
            raise QStateValidationError(
                "Schmidt coefficients sum to one", f"sum {arr.sum():.12g}"
            )
        if np.any(np.diff(arr) > 0):
            raise QStateValidationError(
                "descending Schmidt coefficients", f"got {arr}"
            )
        return _readonly(arr)

    # noinspection PyMethodParameters
    @validator("basis_A", "basis_B", pre=True)
    def process__basis(cls, v):
        arr = np.array(v, dtype=complex)
        res_ = unitarity_residual(arr)
        if res_ > Settings.TOL_UNITARY:
            raise QStateValidationError(
                "orthonormal Schmidt basis",
                f"max |B^dagger B - I| = {res_:.3g}",
            )
        return _readonly(arr)

    @property
    def dims(self) -> Tuple[int, int]:
        return self.basis_A.shape[0], self.basis_B.shape[0]

    def rank(self, tol: float = 1e-12) -> int:
        return int(np.sum(self.coefficients > tol))

    def reconstruct(self) -> Ket:
        k_ = self.coefficients.shape[0]
        mat_ = (
            self.basis_A[:, :k_]
            * np.sqrt(self.coefficients)[None, :]
            @ self.basis_B[:, :k_].T
        )
        return Ket(amplitudes=mat_.reshape(-1), dims=self.dims)

    def product_basis(self) -> LocalBasisPair:
        return LocalBasisPair(basis_A=self.basis_A, basis_B=self.basis_B)

    def to_json_dict(self) -> dict:
        return {
            "coefficients": self.coefficients.tolist(),
            "basis_A": complex_2_pairs(self.basis_A),
            "basis_B": complex_2_pairs(self.basis_B),
        }


class Ensemble(BaseModel):
    weights: np.ndarray
    states: List[Union[Ket, DensityMatrix]]

    class Config:
        arbitrary_types_allowed = True
        allow_mutation = False

    # noinspection PyMethodParameters
    @validator("weights", pre=True)
    def process__weights(cls, v):
        arr = np.array(v, dtype=float).reshape(-1)
        if np.any(arr < -Settings.TOL_TRACE):
            raise QStateValidationError("nonnegative weights", f"got {arr}")
        if abs(arr.sum() - 1) > Settings.TOL_TRACE:
            raise QStateValidationError(
                "weights sum to one", f"sum {arr.sum():.12g}"
            )
        return _readonly(np.clip(arr, 0.0, None))

    # noinspection PyMethodParameters
    @root_validator(skip_on_failure=True)
    def check__members(cls, values):
        weights_, states_ = values["weights"], values["states"]
        if len(states_) != weights_.shape[0] or not states_:
            raise QStateValidationError(
                "one weight per member",
                f"{weights_.shape[0]} weights, {len(states_)} states",
            )
        dims_ = {s_.dims for s_ in states_}
        if len(dims_) != 1:
            raise QStateValidationError(
                "members share dims", f"got {sorted(dims_)}"
            )
        return values

    @property
    def dims(self) -> Tuple[int, ...]:
        return self.states[0].dims

    @property
    def labels(self) -> Tuple[str, ...]:
        return self.states[0].labels

    def density_matrices(self) -> List[np.ndarray]:
        return [
            s_.density().data if isinstance(s_, Ket) else s_.data
            for s_ in self.states
        ]

    def mixture(self) -> DensityMatrix:
        mats_ = self.density_matrices()
        data_ = sum(w_ * m_ for w_, m_ in zip(self.weights, mats_))
        return DensityMatrix.trusted(data_, self.dims, self.labels)

    def pure_vectors(self) -> Optional[List[np.ndarray]]:
        """Member state vectors, or ``None`` if any member is mixed."""
        vecs_ = []
        for s_ in self.states:
            if isinstance(s_, Ket):
                vecs_.append(np.asarray(s_.amplitudes))
            elif s_.is_pure():
                vecs_.append(s_.principal_vector())
            else:
                return None
        return vecs_

    def to_json_dict(self) -> dict:
        return {
            "weights": self.weights.tolist(),
            "states": [s_.to_json_dict() for s_ in self.states],
        }


BasisLike = Union[LocalBasisPair, np.ndarray, None]


def basis_matrix(basis: BasisLike, dim: int) -> np.ndarray:
    """Full basis (columns) of dimension ``dim``; ``None`` is computational."""
    if basis is None:
        return np.eye(dim, dtype=complex)
    if isinstance(basis, LocalBasisPair):
        mat_ = basis.product()
    else:
        mat_ = np.asarray(basis, dtype=complex)
        if mat_.ndim != 2 or mat_.shape[0] != mat_.shape[1]:
            raise QStateArgumentError(f"basis of shape {mat_.shape}")
        if unitarity_residual(mat_) > Settings.TOL_UNITARY:
            raise QStateArgumentError("non-orthonormal basis")
    if mat_.shape[0] != dim:
        raise QStateArgumentError(
            f"basis dimension {mat_.shape[0]} does not match state "
            f"dimension {dim}"
        )
    return mat_

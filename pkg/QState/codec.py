import json
from pathlib import Path
from typing import Optional, Union

from QState.exception import QStateParseError
from QState.types import DensityMatrix, Ensemble, Ket, LocalBasisPair
from utils.helpers import dump_json, pairs_2_complex
from utils.types import PathOrStr, pathorstr_2_path


def _read_json(path: Optional[Path], text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise QStateParseError(path, e.msg, e.lineno, e.colno) from None


def _require(doc: dict, key: str, path):
    if not isinstance(doc, dict) or key not in doc:
        raise QStateParseError(path, f"missing field {key!r}")
    return doc[key]


def state_from_json_dict(
    doc: dict, path: Optional[Path] = None
) -> Union[DensityMatrix, Ket]:
    dims_ = _require(doc, "dims", path)
    labels_ = doc.get("labels") if isinstance(doc, dict) else None
    try:
        if "matrix" in doc:
            return DensityMatrix(
                data=pairs_2_complex(doc["matrix"]), dims=dims_, labels=labels_
            )
        vec_ = pairs_2_complex(_require(doc, "vector", path))
    except (ValueError, TypeError) as e:
        raise QStateParseError(path, str(e)) from None
    return Ket(amplitudes=vec_, dims=dims_, labels=labels_)


def ensemble_from_json_dict(
    doc: dict, path: Optional[Path] = None
) -> Ensemble:
    weights_ = _require(doc, "weights", path)
    states_ = [
        state_from_json_dict(s_, path) for s_ in _require(doc, "states", path)
    ]
    return Ensemble(weights=weights_, states=states_)


def basis_from_json_dict(doc: dict, path: Optional[Path] = None):
    try:
        return LocalBasisPair(
            basis_A=pairs_2_complex(_require(doc, "basis_A", path)),
            basis_B=pairs_2_complex(_require(doc, "basis_B", path)),
        )
    except (ValueError, TypeError) as e:
        raise QStateParseError(path, str(e)) from None


def _load(path: PathOrStr, decoder):
    path = pathorstr_2_path(path)
    try:
        text_ = path.read_text()
    except OSError as e:
        raise QStateParseError(path, e.strerror or str(e)) from None
    return decoder(_read_json(path, text_), path)


def load_state(path: PathOrStr) -> Union[DensityMatrix, Ket]:
    return _load(path, state_from_json_dict)


def load_ensemble(path: PathOrStr) -> Ensemble:
    return _load(path, ensemble_from_json_dict)


def load_basis(path: PathOrStr) -> LocalBasisPair:
    return _load(path, basis_from_json_dict)


def loads_state(text: str) -> Union[DensityMatrix, Ket]:
    return state_from_json_dict(_read_json(None, text))


def dumps(obj) -> str:
    if hasattr(obj, "to_json_dict"):
        obj = obj.to_json_dict()
    return dump_json(obj)


def save(obj, path: PathOrStr):
    pathorstr_2_path(path).write_text(dumps(obj) + "\n")


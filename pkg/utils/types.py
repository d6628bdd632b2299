from pathlib import Path
from typing import Union

import numpy as np

PathOrStr = Union[str, Path]
SeedLike = Union[int, np.random.Generator, None]


def pathorstr_2_path(val: PathOrStr):
    if isinstance(val, str):
        val = Path(val)
    return val


def seedlike_2_generator(val: SeedLike) -> np.random.Generator:
    if isinstance(val, np.random.Generator):
        return val
    return np.random.default_rng(val)

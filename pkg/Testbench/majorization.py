import numpy as np


def is_majorized(source, target, tol: float = 1e-12) -> bool:
    """``source ≺ target``: prefix sums of the sorted target dominate."""
    src_ = np.sort(np.asarray(source, dtype=float))[::-1]
    tgt_ = np.sort(np.asarray(target, dtype=float))[::-1]
    if src_.shape != tgt_.shape or abs(src_.sum() - tgt_.sum()) > tol:
        return False
    return bool(np.all(np.cumsum(tgt_) >= np.cumsum(src_) - tol))


def t_transform(
    spectrum: np.ndarray, i: int, j: int, t: float
) -> np.ndarray:
    """Mix entries ``i`` and ``j``; the result is majorized by the input."""
    out_ = np.array(spectrum, dtype=float)
    a_, b_ = spectrum[i], spectrum[j]
    out_[i] = t * a_ + (1 - t) * b_
    out_[j] = (1 - t) * a_ + t * b_
    return out_

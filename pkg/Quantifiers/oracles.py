import numpy as np

from Core.logger import call_log, get_logger
from QState.ops import StateLike, as_bipartite, partial_transpose
from QState.types import Ket
from Quantifiers.exception import QuantifierArgumentError

logger = get_logger(__name__)

PPT_DIMS = {(2, 2), (2, 3), (3, 2)}
PPT_TOL = 1e-10
RANK_TOL = 1e-14
SPIN_FLIP = np.kron(
    np.array([[0, -1j], [1j, 0]]), np.array([[0, -1j], [1j, 0]])
)


@call_log(logger)
def is_separable_ppt(rho: StateLike) -> bool:
    """Peres-Horodecki test; exact for ``2x2`` and ``2x3``."""
    if isinstance(rho, Ket):
        rho = rho.density()
    bi_ = as_bipartite(rho)
    if bi_.dims not in PPT_DIMS:
        raise QuantifierArgumentError(
            "is_separable_ppt",
            f"separability is decided only for dims {sorted(PPT_DIMS)}, "
            f"got {bi_.dims}",
        )
    pt_ = partial_transpose(bi_, "B")
    return bool(np.linalg.eigvalsh((pt_ + pt_.conj().T) / 2)[0] >= -PPT_TOL)


def _two_qubits(rho: StateLike):
    dims_ = rho.dims if isinstance(rho, Ket) else as_bipartite(rho).dims
    if tuple(dims_) != (2, 2):
        raise QuantifierArgumentError(
            "concurrence_2q", f"two qubits required, got dims {dims_}"
        )


@call_log(logger)
def concurrence_2q(rho: StateLike) -> float:
    """Spin-flip concurrence ``max(0, s1 - s2 - s3 - s4)``."""
    _two_qubits(rho)
    if isinstance(rho, Ket):
        vec_ = np.asarray(rho.amplitudes)
        return float(min(abs(vec_ @ SPIN_FLIP @ vec_), 1.0))
    bi_ = as_bipartite(rho)
    if bi_.is_pure():
        vec_ = bi_.principal_vector()
        return float(min(abs(vec_ @ SPIN_FLIP @ vec_), 1.0))
    eig_, vecs_ = np.linalg.eigh(bi_.data)
    keep_ = eig_ > RANK_TOL
    x_ = vecs_[:, keep_] * np.sqrt(eig_[keep_])[None, :]
    # sqrt eigenvalues of rho (sy⊗sy) rho* (sy⊗sy)
    s_ = np.linalg.svd(x_.T @ SPIN_FLIP @ x_, compute_uv=False)
    s_ = np.concatenate([s_, np.zeros(4)])[:4]
    return float(np.clip(s_[0] - s_[1:].sum(), 0.0, 1.0))


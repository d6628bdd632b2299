import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from Coherence.exception import MeasureArgumentError, UnknownMeasureError
from Coherence.measures import (
    MeasureRegistry,
    c_l1,
    c_relent,
    get_measure,
    von_neumann_entropy,
)
from QState.ops import dephase
from QState.sampling import ginibre_mixed, haar_unitary
from QState.types import DensityMatrix, LocalBasisPair

PLUS = DensityMatrix(data=np.full((2, 2), 0.5), dims=(2,))


class TestMeasures:
    def test_registry(self):
        assert MeasureRegistry().ids() == ["l1", "relent"]
        assert get_measure("l1") is MeasureRegistry().get("l1")

    def test_unknown_measure(self):
        with pytest.raises(UnknownMeasureError, match="l2"):
            get_measure("l2")

    def test_plus_state(self):
        assert c_l1(PLUS) == pytest.approx(1, abs=1e-12)
        assert c_relent(PLUS) == pytest.approx(1, abs=1e-9)

    def test_plus_in_its_own_basis(self):
        h_ = np.array([[1, 1], [1, -1]]) / np.sqrt(2)
        assert c_l1(PLUS, h_) == pytest.approx(0, abs=1e-12)

    def test_bell(self, bell):
        rho_ = bell.density()
        assert c_l1(rho_) == pytest.approx(1, abs=1e-12)
        assert c_relent(rho_) == pytest.approx(1, abs=1e-9)

    def test_diagonal_is_incoherent(self):
        rho_ = DensityMatrix(data=np.diag([0.1, 0.2, 0.3, 0.4]), dims=(2, 2))
        assert c_l1(rho_) == pytest.approx(0, abs=1e-12)
        assert c_relent(rho_) == pytest.approx(0, abs=1e-12)

    def test_basis_dimension_mismatch(self, bell):
        with pytest.raises(MeasureArgumentError):
            c_l1(bell.density(), np.eye(3))

    def test_entropy_of_maximally_mixed(self):
        rho_ = DensityMatrix(data=np.eye(4) / 4, dims=(2, 2))
        assert von_neumann_entropy(rho_) == pytest.approx(2, abs=1e-12)


class TestProperties:
    @given(st.integers(min_value=0, max_value=2 ** 32 - 1))
    def test_nonnegative_and_zero_after_dephasing(self, seed):
        rho_ = ginibre_mixed((2, 2), seed)
        basis_ = LocalBasisPair(
            basis_A=haar_unitary(2, seed), basis_B=haar_unitary(2, seed + 1)
        )
        for id_ in MeasureRegistry().ids():
            measure_ = get_measure(id_)
            assert measure_.evaluate(rho_, basis_) >= 0
            assert measure_.evaluate(dephase(rho_, basis_), basis_) == (
                pytest.approx(0, abs=1e-9)
            )

    @given(
        st.integers(min_value=0, max_value=2 ** 32 - 1),
        st.floats(min_value=0, max_value=1),
    )
    def test_convexity(self, seed, lam):
        rho_ = ginibre_mixed((2, 2), seed)
        sigma_ = ginibre_mixed((2, 2), seed + 1)
        mixed_ = DensityMatrix(
            data=lam * rho_.data + (1 - lam) * sigma_.data, dims=(2, 2)
        )
        for id_ in MeasureRegistry().ids():
            measure_ = get_measure(id_)
            assert measure_.evaluate(mixed_) <= (
                lam * measure_.evaluate(rho_)
                + (1 - lam) * measure_.evaluate(sigma_)
                + 1e-9
            )

    @given(st.integers(min_value=0, max_value=2 ** 32 - 1))
    def test_unitary_covariance(self, seed):
        rho_ = ginibre_mixed((2, 2), seed)
        u_ = haar_unitary(4, seed)
        w_ = haar_unitary(4, seed + 1)
        moved_ = DensityMatrix(data=u_ @ rho_.data @ u_.conj().T, dims=(2, 2))
        for id_ in MeasureRegistry().ids():
            measure_ = get_measure(id_)
            assert measure_.evaluate(moved_, u_ @ w_) == pytest.approx(
                measure_.evaluate(rho_, w_), abs=1e-9
            )

    @given(st.integers(min_value=0, max_value=2 ** 32 - 1))
    def test_basis_phases_do_not_matter(self, seed):
        rho_ = ginibre_mixed((2, 3), seed)
        w_ = haar_unitary(6, seed)
        phases_ = np.exp(2j * np.pi * np.linspace(0, 1, 6, endpoint=False))
        for id_ in MeasureRegistry().ids():
            measure_ = get_measure(id_)
            assert measure_.evaluate(rho_, w_ * phases_) == pytest.approx(
                measure_.evaluate(rho_, w_), abs=1e-9
            )

    @given(st.integers(min_value=0, max_value=2 ** 32 - 1))
    def test_relent_at_most_log_dimension(self, seed):
        rho_ = ginibre_mixed((2, 3), seed)
        assert c_relent(rho_) <= np.log2(6) + 1e-9
        assert c_relent(rho_, haar_unitary(6, seed)) <= np.log2(6) + 1e-9

    def test_uniform_superposition_is_maximal(self):
        rho_ = DensityMatrix(data=np.full((4, 4), 0.25), dims=(2, 2))
        assert c_relent(rho_) == pytest.approx(2, abs=1e-9)
        assert c_l1(rho_) == pytest.approx(3, abs=1e-12)

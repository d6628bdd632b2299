import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from QState.codec import dumps, load_state, loads_state
from QState.exception import (
    QStateArgumentError,
    QStateParseError,
    QStateSizeError,
    QStateValidationError,
)
from QState.ops import (
    apply_local_unitary,
    apply_swap,
    dephase,
    partial_trace,
    partial_transpose,
    schmidt_decompose,
    tensor,
)
from QState.sampling import ginibre_mixed, haar_ket, haar_unitary, sample
from QState.types import DensityMatrix, Ensemble, Ket, LocalBasisPair
from Testbench.families import schmidt_ket

H = np.array([[1, 1], [1, -1]]) / np.sqrt(2)


class TestValidation:
    def test_non_psd_names_min_eigenvalue(self):
        with pytest.raises(QStateValidationError, match="eigenvalue -0.02"):
            DensityMatrix(data=np.diag([1.02, -0.02]), dims=(2,))

    def test_trace(self):
        with pytest.raises(QStateValidationError, match="unit trace"):
            DensityMatrix(data=np.eye(2), dims=(2,))

    def test_hermiticity(self):
        with pytest.raises(QStateValidationError, match="Hermiticity"):
            DensityMatrix(data=[[0.5, 0.1], [0.0, 0.5]], dims=(2,))

    def test_dims_product(self):
        with pytest.raises(QStateValidationError):
            DensityMatrix(data=np.eye(4) / 4, dims=(2, 3))

    def test_ket_norm(self):
        with pytest.raises(QStateValidationError, match="unit norm"):
            Ket(amplitudes=[1, 1, 0, 0], dims=(2, 2))

    def test_size_limits(self):
        with pytest.raises(QStateSizeError):
            haar_ket((17, 2), 0)
        with pytest.raises(QStateSizeError):
            haar_ket((16, 16, 2), 0)

    def test_non_orthonormal_basis(self):
        with pytest.raises(QStateValidationError):
            LocalBasisPair(basis_A=[[1, 1], [0, 1]], basis_B=np.eye(2))

    def test_ensemble_members_share_dims(self):
        with pytest.raises(QStateValidationError):
            Ensemble(
                weights=[0.5, 0.5],
                states=[haar_ket((2, 2), 0), haar_ket((2, 3), 1)],
            )


class TestOps:
    def test_partial_trace_keeps_unit_trace(self):
        rho_ = ginibre_mixed((2, 3), 5)
        for tag_ in ("A", "B"):
            assert np.trace(partial_trace(rho_, tag_).data).real == (
                pytest.approx(1, abs=1e-10)
            )

    def test_tensor_then_trace(self):
        a_, b_ = ginibre_mixed((2,), 1), ginibre_mixed((3,), 2)
        rho_ = tensor(a_, b_)
        assert rho_.dims == (2, 3)
        np.testing.assert_allclose(
            partial_trace(rho_, "A").data, a_.data, atol=1e-12
        )

    def test_unknown_tag(self):
        with pytest.raises(QStateArgumentError, match="unknown subsystem"):
            partial_trace(ginibre_mixed((2, 2), 0), "C")

    def test_schmidt_reconstruction(self):
        psi_ = haar_ket((2, 3), 11)
        schmidt_ = schmidt_decompose(psi_)
        rebuilt_ = schmidt_.reconstruct().amplitudes
        overlap_ = abs(np.vdot(psi_.amplitudes, rebuilt_))
        assert overlap_ >= 1 - 1e-8
        assert np.all(np.diff(schmidt_.coefficients) <= 0)

    def test_schmidt_ordering(self):
        psi_ = schmidt_ket([0.75, 0.25], np.eye(2)[:, ::-1], np.eye(2))
        schmidt_ = schmidt_decompose(psi_)
        np.testing.assert_allclose(
            schmidt_.coefficients, [0.75, 0.25], atol=1e-12
        )
        np.testing.assert_allclose(
            np.abs(schmidt_.basis_A[:, 0]), [0, 1], atol=1e-12
        )
        np.testing.assert_allclose(
            np.abs(schmidt_.basis_B[:, 0]), [1, 0], atol=1e-12
        )

    def test_tensor_of_pure_states(self):
        zero_ = DensityMatrix(data=np.diag([1.0, 0.0]), dims=(2,))
        plus_ = DensityMatrix(data=np.full((2, 2), 0.5), dims=(2,))
        rho_ = tensor(zero_, plus_)
        expected_ = np.zeros((4, 4))
        expected_[:2, :2] = 0.5
        assert rho_.dims == (2, 2)
        np.testing.assert_allclose(rho_.data, expected_, atol=1e-12)

    def test_schmidt_of_bell(self, bell):
        np.testing.assert_allclose(
            schmidt_decompose(bell).coefficients, [0.5, 0.5], atol=1e-12
        )

    def test_local_hadamard(self):
        psi_ = Ket(amplitudes=[1, 0, 0, 0], dims=(2, 2))
        out_ = apply_local_unitary(psi_, H, np.eye(2))
        np.testing.assert_allclose(
            out_.amplitudes, [1 / np.sqrt(2), 0, 1 / np.sqrt(2), 0], atol=1e-12
        )

    def test_local_unitary_keeps_spectrum(self):
        rho_ = ginibre_mixed((2, 3), 3)
        out_ = apply_local_unitary(
            rho_, haar_unitary(2, 4), haar_unitary(3, 5)
        )
        np.testing.assert_allclose(
            out_.spectrum(), rho_.spectrum(), atol=1e-12
        )

    def test_non_unitary_rejected(self):
        with pytest.raises(QStateArgumentError, match="not unitary"):
            apply_local_unitary(
                ginibre_mixed((2, 2), 0), 2 * np.eye(2), np.eye(2)
            )

    def test_swap_relabels(self):
        psi_ = Ket(amplitudes=[0, 1, 0, 0], dims=(2, 2))
        np.testing.assert_allclose(
            apply_swap(psi_, ("A", "B")).amplitudes, [0, 0, 1, 0]
        )

    def test_swap_is_involution(self):
        rho_ = ginibre_mixed((2, 2, 2, 2), 8)
        twice_ = apply_swap(apply_swap(rho_, ("A'", "B'")), ("A'", "B'"))
        np.testing.assert_allclose(twice_.data, rho_.data, atol=1e-12)

    def test_swap_exchanges_marginals(self):
        rho_ = ginibre_mixed((3, 3), 9)
        swapped_ = apply_swap(rho_, ("A", "B"))
        np.testing.assert_allclose(
            partial_trace(swapped_, "A").data,
            partial_trace(rho_, "B").data,
            atol=1e-10,
        )

    def test_swap_unequal_dims(self):
        with pytest.raises(QStateArgumentError):
            apply_swap(ginibre_mixed((2, 3), 0), ("A", "B"))

    def test_partial_transpose_of_bell(self, bell):
        eig_ = np.linalg.eigvalsh(partial_transpose(bell.density(), "B"))
        assert eig_[0] == pytest.approx(-0.5, abs=1e-12)

    @given(st.integers(min_value=0, max_value=2 ** 32 - 1))
    def test_dephase_idempotent(self, seed):
        rho_ = ginibre_mixed((2, 2), seed)
        basis_ = LocalBasisPair(
            basis_A=haar_unitary(2, seed), basis_B=haar_unitary(2, seed + 1)
        )
        once_ = dephase(rho_, basis_)
        np.testing.assert_allclose(
            dephase(once_, basis_).data, once_.data, atol=1e-10
        )
        assert np.trace(once_.data).real == pytest.approx(1, abs=1e-10)


class TestSampling:
    def test_deterministic(self):
        a_ = sample("haar_ket", [2, 2], 7)
        b_ = sample("haar_ket", [2, 2], 7)
        np.testing.assert_array_equal(a_.amplitudes, b_.amplitudes)

    def test_ginibre_validates(self):
        rho_ = sample("ginibre_mixed", [2, 3], 1)
        DensityMatrix(data=np.array(rho_.data), dims=rho_.dims)

    def test_random_separable_reproduces_mixture(self):
        ensemble_, rho_ = sample("random_separable", [2, 2], 3)
        np.testing.assert_allclose(
            ensemble_.mixture().data, rho_.data, atol=1e-12
        )

    def test_ginibre_mean_purity(self):
        # E[tr rho^2] for full-rank Ginibre in dimension d is 2d / (d^2 + 1)
        rng = np.random.default_rng(0)
        purities_ = [ginibre_mixed((4,), rng).purity for _ in range(1000)]
        sigma_ = np.std(purities_) / np.sqrt(len(purities_))
        assert abs(np.mean(purities_) - 8 / 17) <= 3 * sigma_


class TestCodec:
    def test_state_roundtrip(self, bell):
        back_ = loads_state(dumps(bell))
        np.testing.assert_allclose(back_.amplitudes, bell.amplitudes)

    def test_parse_error_has_line(self):
        with pytest.raises(QStateParseError) as e:
            loads_state('{"dims": [2, 2],\n "matrix": [[')
        assert e.value.line == 2

    def test_missing_field(self):
        with pytest.raises(QStateParseError, match="vector"):
            loads_state('{"dims": [2, 2]}')

    def test_missing_file(self, tmp_path):
        with pytest.raises(QStateParseError):
            load_state(tmp_path / "nope.json")

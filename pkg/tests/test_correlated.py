import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from Correlated.correlated import (
    admissible_bases,
    c_min,
    correlated_coherence,
    degeneracy_profile,
)
from Correlated.types import CminOptions, Cluster, DegeneracyProfile
from QState.exception import QStateArgumentError, QStateValidationError
from QState.ops import schmidt_decompose
from QState.sampling import haar_ket, random_product_basis
from QState.types import DensityMatrix, LocalBasisPair
from Quantifiers.entanglement import e_pure
from Testbench.families import (
    maximally_entangled,
    rotated_schmidt_ket,
    schmidt_ket,
)


class TestCorrelatedCoherence:
    def test_bell_computational(self, bell):
        basis_ = LocalBasisPair.computational(2, 2)
        assert correlated_coherence("l1", bell, basis_) == pytest.approx(1)
        assert correlated_coherence("relent", bell, basis_) == pytest.approx(1)

    def test_product_state_is_uncorrelated(self):
        psi_ = schmidt_ket([1.0], np.eye(2), np.eye(2))
        basis_ = random_product_basis((2, 2), 3)
        assert correlated_coherence("relent", psi_, basis_) == pytest.approx(
            0, abs=1e-9
        )

    def test_dims_mismatch(self, bell):
        with pytest.raises(QStateArgumentError):
            correlated_coherence(
                "l1", bell, LocalBasisPair.computational(3, 2)
            )


class TestDegeneracy:
    def test_clusters(self):
        profile_ = degeneracy_profile(np.array([0.5, 0.5, 0.0]), 1e-7)
        assert profile_.multiplicities == [2, 1]
        assert profile_.is_kernel(profile_.clusters[1])
        assert not profile_.is_kernel(profile_.clusters[0])

    def test_gap_below_threshold_merges(self):
        profile_ = degeneracy_profile(np.array([0.5, 0.5 - 1e-9, 0.0]), 1e-7)
        assert profile_.multiplicities == [2, 1]
        profile_ = degeneracy_profile(np.array([0.6, 0.4]), 1e-7)
        assert profile_.multiplicities == [1, 1]

    def test_kernel_is_anchored_at_zero(self):
        profile_ = degeneracy_profile(np.array([0.5, 5e-8, 0.0]), 1e-7)
        assert profile_.multiplicities == [1, 1, 1]
        assert [profile_.is_kernel(c_) for c_ in profile_.clusters] == [
            False,
            False,
            True,
        ]
        profile_ = degeneracy_profile(
            np.array([0.5, 5e-8, 4e-8, 0.0]), 1e-7
        )
        assert profile_.multiplicities == [1, 2, 1]
        assert not profile_.is_kernel(profile_.clusters[1])

    @pytest.mark.parametrize(
        "eps, multiplicities", [(0.15, [1, 1, 1]), (0.25, [1, 2])]
    )
    def test_threshold_is_relative(self, eps, multiplicities):
        profile_ = degeneracy_profile(np.array([0.5, 0.3, 0.2]), eps)
        assert profile_.multiplicities == multiplicities

    def test_indices_must_cover_dimension(self):
        with pytest.raises(QStateValidationError):
            DegeneracyProfile(
                clusters=[Cluster(value=1.0, indices=(0, 2))],
                eps_deg=1e-7,
                scale=1.0,
            )

    def test_nondegenerate_has_no_freedom(self):
        side_ = admissible_bases(np.diag([0.7, 0.3]))
        assert side_.free_parameters == 0

    def test_degenerate_block(self):
        side_ = admissible_bases(np.eye(3) / 3)
        assert side_.free_parameters == 9
        basis_ = side_.basis(side_.identity_blocks())
        np.testing.assert_allclose(
            basis_.conj().T @ basis_, np.eye(3), atol=1e-12
        )


class TestCmin:
    def test_skewed_l1(self, skewed, fast_cmin):
        assert c_min("l1", skewed, fast_cmin).value == pytest.approx(
            0.6, abs=1e-9
        )

    def test_skewed_relent(self, skewed, fast_cmin):
        assert c_min("relent", skewed, fast_cmin).value == pytest.approx(
            0.468996, abs=1e-6
        )

    def test_bell(self, bell, fast_cmin):
        assert c_min("l1", bell, fast_cmin).value == pytest.approx(1, abs=1e-5)

    def test_qutrit_maximally_entangled(self, fast_cmin):
        psi_ = rotated_schmidt_ket(np.full(3, 1 / 3), (3, 3), 5)
        assert c_min("l1", psi_, fast_cmin).value == pytest.approx(
            2, abs=1e-5
        )

    def test_partially_degenerate(self, fast_cmin):
        psi_ = rotated_schmidt_ket([0.5, 0.25, 0.25], (3, 3), 9)
        assert c_min("l1", psi_, fast_cmin).value == pytest.approx(
            1.9142, abs=1e-4
        )

    def test_product_is_zero(self, fast_cmin):
        psi_ = rotated_schmidt_ket([1.0, 0.0], (2, 2), 2)
        assert c_min("l1", psi_, fast_cmin).value == pytest.approx(
            0, abs=1e-9
        )

    def test_witness_replays(self, fast_cmin):
        psi_ = maximally_entangled(3)
        result_ = c_min("l1", psi_, fast_cmin)
        assert correlated_coherence(
            "l1", psi_, result_.argmin_basis
        ) == pytest.approx(result_.value, abs=1e-12)

    def test_deterministic(self, fast_cmin):
        psi_ = rotated_schmidt_ket([0.5, 0.5], (2, 2), 3)
        a_ = c_min("l1", psi_, fast_cmin)
        b_ = c_min("l1", psi_, fast_cmin)
        assert a_.value == b_.value
        np.testing.assert_array_equal(
            a_.argmin_basis.basis_A, b_.argmin_basis.basis_A
        )

    def test_workers_agree(self, fast_cmin):
        psi_ = rotated_schmidt_ket(np.full(3, 1 / 3), (3, 3), 4)
        serial_ = c_min("l1", psi_, fast_cmin)
        threaded_ = c_min("l1", psi_, fast_cmin, workers=3)
        assert threaded_.value == pytest.approx(serial_.value, abs=1e-9)

    def test_workers_stop_at_the_floor(self):
        rho_ = DensityMatrix(data=0.5 * np.diag([1, 0, 0, 1]), dims=(2, 2))
        options_ = CminOptions(restarts=6, seed=3)
        serial_ = c_min("l1", rho_, options_)
        threaded_ = c_min("l1", rho_, options_, workers=3)
        assert threaded_.restarts_used == serial_.restarts_used
        assert threaded_.evaluations == serial_.evaluations
        assert threaded_.value == serial_.value

    def test_overrides(self, bell):
        result_ = c_min("l1", bell, restarts=2, max_iters=300, seed=1)
        assert result_.restarts_used <= 2

    def test_invalid_options(self):
        with pytest.raises(ValueError):
            CminOptions(restarts=0)

    @settings(max_examples=10)
    @given(st.integers(min_value=0, max_value=2 ** 32 - 1))
    def test_nondegenerate_equals_schmidt_basis(self, seed):
        psi_ = haar_ket((2, 3), seed)
        expected_ = e_pure("l1", psi_).value
        result_ = c_min("l1", psi_, CminOptions(restarts=1, seed=seed))
        assert result_.value == pytest.approx(expected_, abs=1e-6)

    def test_schmidt_basis_witness(self, skewed, fast_cmin):
        result_ = c_min("l1", skewed, fast_cmin)
        schmidt_ = schmidt_decompose(skewed)
        overlap_ = np.abs(
            result_.argmin_basis.basis_A.conj().T @ schmidt_.basis_A
        )
        np.testing.assert_allclose(overlap_, np.eye(2), atol=1e-9)

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from Correlated.correlated import c_min, correlated_coherence
from QState.ops import schmidt_decompose
from QState.sampling import ginibre_mixed, haar_ket, random_separable
from QState.types import DensityMatrix, Ensemble, LocalBasisPair
from Quantifiers.classify import (
    classify,
    is_classical_classical,
    is_classical_quantum,
    off_diagonal_blocks,
)
from Quantifiers.discord import d_c_upper_bound
from Quantifiers.entanglement import (
    e_convex_roof_estimate,
    e_l1_pure_closed_form,
    e_pure,
    e_upper_bound,
    entropy_of_entanglement,
)
from Quantifiers.exception import ExtensionSearchError, QuantifierArgumentError
from Quantifiers.extensions import (
    extension_from_bob_decomposition,
    extension_from_cq_decomposition,
    extension_from_pure_decomposition,
    extension_from_separable_decomposition,
    extension_from_swapped_copy,
    flagged_dims,
    trivial_extension,
)
from Quantifiers.oracles import concurrence_2q, is_separable_ppt
from Quantifiers.types import (
    AlignmentSide,
    BoundKind,
    Classification,
    ClassifyOptions,
    ExtensionFamily,
)
from Testbench.families import (
    cc_state,
    cq_state,
    schmidt_ket,
    werner_decomposition,
    werner_state,
)


class TestPure:
    def test_skewed(self, skewed):
        report_ = e_pure("l1", skewed)
        assert report_.kind == BoundKind.EXACT
        assert report_.value == pytest.approx(0.6, abs=1e-12)
        assert e_pure("relent", skewed).value == pytest.approx(
            0.468996, abs=1e-6
        )

    def test_bell(self, bell):
        assert e_pure("l1", bell).value == pytest.approx(1, abs=1e-9)
        assert e_pure("relent", bell).value == pytest.approx(1, abs=1e-9)

    def test_rank_one_density_matrix(self, skewed):
        assert e_pure("l1", skewed.density()).value == pytest.approx(0.6)

    def test_mixed_input_rejected(self):
        with pytest.raises(QuantifierArgumentError, match="e_upper_bound"):
            e_pure("l1", werner_state(0.5))

    def test_closed_form(self, skewed):
        schmidt_ = schmidt_decompose(skewed)
        assert e_l1_pure_closed_form(schmidt_) == pytest.approx(0.6)

    @given(st.integers(min_value=0, max_value=2 ** 32 - 1))
    def test_oracles(self, seed):
        psi_ = haar_ket((2, 2), seed)
        closed_ = e_l1_pure_closed_form(schmidt_decompose(psi_))
        assert closed_ == pytest.approx(concurrence_2q(psi_), abs=1e-8)
        assert e_pure("relent", psi_).value == pytest.approx(
            entropy_of_entanglement(psi_), abs=1e-8
        )


class TestExtensions:
    def test_flagged_dims(self):
        assert flagged_dims(2, 2, 3) == (3, 3)
        assert flagged_dims(2, 3, 2) == (6, 4)

    def test_separable_decomposition(self, fast_cmin):
        ensemble_, rho_ = random_separable((2, 2), 4, 3)
        candidate_ = extension_from_separable_decomposition(ensemble_)
        assert candidate_.family == ExtensionFamily.DECOMPOSITION
        assert candidate_.symmetry_residual <= 1e-10
        np.testing.assert_allclose(
            candidate_.base_state().data, rho_.data, atol=1e-12
        )
        options_ = fast_cmin.copy(update={"hints": [candidate_.hint]})
        assert c_min("l1", candidate_.state, options_).value <= 1e-8

    def test_unequal_parties(self):
        ensemble_, _ = random_separable((2, 3), 1, 1)
        candidate_ = extension_from_separable_decomposition(ensemble_)
        assert candidate_.state.dims == (2, 3, 3, 2)
        assert candidate_.symmetry_residual <= 1e-10

    def test_pure_decomposition_with_entangled_member(self, bell):
        ensemble_ = Ensemble(
            weights=[0.5, 0.5],
            states=[bell, schmidt_ket([1.0], np.eye(2), np.eye(2))],
        )
        candidate_ = extension_from_pure_decomposition(ensemble_)
        assert candidate_.alignment_side == AlignmentSide.BOTH
        assert candidate_.symmetry_residual <= 1e-8
        np.testing.assert_allclose(
            candidate_.base_state().data, ensemble_.mixture().data, atol=1e-12
        )

    def test_bob_decomposition(self):
        ensemble_ = werner_decomposition(0.2)
        candidate_ = extension_from_bob_decomposition(ensemble_)
        assert not candidate_.symmetric
        assert candidate_.ancilla_dims == (1, len(ensemble_.states))
        np.testing.assert_allclose(
            candidate_.base_state().data, werner_state(0.2).data, atol=1e-12
        )

    def test_entangled_member_rejected(self, bell):
        ensemble_ = Ensemble(weights=[1.0], states=[bell])
        with pytest.raises(QuantifierArgumentError, match="product"):
            extension_from_separable_decomposition(ensemble_)

    def test_cq_requires_orthogonal_alice(self):
        plus_ = np.array([1, 1]) / np.sqrt(2)
        ensemble_ = Ensemble(
            weights=[0.5, 0.5],
            states=[
                schmidt_ket([1.0], np.eye(2), np.eye(2)),
                schmidt_ket(
                    [1.0], np.column_stack([plus_, plus_[::-1] * [1, -1]]),
                    np.eye(2),
                ),
            ],
        )
        with pytest.raises(QuantifierArgumentError, match="orthogonal"):
            extension_from_cq_decomposition(ensemble_)

    def test_trivial_needs_equal_parties(self):
        assert trivial_extension(ginibre_mixed((2, 3), 0)) is None
        assert trivial_extension(werner_state(0.5)) is not None

    def test_swapped_copy(self):
        rho_ = ginibre_mixed((2, 3), 1)
        candidate_ = extension_from_swapped_copy(rho_)
        assert candidate_.family == ExtensionFamily.SWAPPED_COPY
        assert candidate_.state.dims == (2, 3, 3, 2)
        assert candidate_.ancilla_dims == (3, 2)
        assert candidate_.alignment_side == AlignmentSide.BOB
        assert candidate_.symmetry_residual <= 1e-10
        np.testing.assert_allclose(
            candidate_.base_state().data, rho_.data, atol=1e-12
        )


class TestEntanglementBounds:
    def test_pure_input_is_exact(self, skewed, fast_search):
        report_ = e_upper_bound("l1", skewed, fast_search)
        assert report_.kind == BoundKind.EXACT
        assert report_.restarts == 0
        assert report_.value == pytest.approx(0.6)

    def test_werner_separable(self, fast_search):
        report_ = e_upper_bound(
            "l1",
            werner_state(0.2),
            fast_search,
            decomposition=werner_decomposition(0.2),
        )
        assert report_.kind == BoundKind.EXACT
        assert report_.value <= 1e-8

    def test_random_separable(self, fast_search):
        ensemble_, rho_ = random_separable((2, 2), 12, 3)
        report_ = e_upper_bound(
            "relent", rho_, fast_search, decomposition=ensemble_
        )
        assert report_.value <= 1e-8

    def test_bell_product_mixture(self, bell, fast_search):
        ensemble_ = Ensemble(
            weights=[0.5, 0.5],
            states=[bell, schmidt_ket([1.0], np.eye(2), np.eye(2))],
        )
        report_ = e_upper_bound(
            "l1", ensemble_.mixture(), fast_search, decomposition=ensemble_
        )
        assert report_.value <= 0.5 + 1e-6

    def test_werner_entangled(self, fast_search):
        report_ = e_upper_bound("l1", werner_state(0.8), fast_search)
        assert report_.kind == BoundKind.UPPER_BOUND
        assert report_.value > 0
        assert (1, 1) in report_.ancilla_dims_tried
        assert report_.diagnostics["candidates"]

    def test_wrong_decomposition(self, fast_search):
        with pytest.raises(QuantifierArgumentError, match="reproduce"):
            e_upper_bound(
                "l1",
                werner_state(0.3),
                fast_search,
                decomposition=werner_decomposition(0.2),
            )

    def test_no_candidate(self, fast_search):
        with pytest.raises(ExtensionSearchError):
            e_upper_bound("l1", ginibre_mixed((4, 5), 1), fast_search)

    @pytest.mark.parametrize("dims", [(2, 3), (3, 3)])
    def test_full_rank(self, dims, fast_search):
        report_ = e_upper_bound("l1", ginibre_mixed(dims, 1), fast_search)
        assert report_.kind == BoundKind.UPPER_BOUND
        assert report_.value >= 0
        families_ = [
            c_["family"] for c_ in report_.diagnostics["candidates"]
        ]
        assert ExtensionFamily.SWAPPED_COPY.value in families_

    def test_overrides(self):
        report_ = e_upper_bound(
            "l1", werner_state(0.6), max_ancilla_dim=1, restarts=1
        )
        assert report_.ancilla_dims_tried == [(1, 1), (2, 2)]

    def test_convex_roof(self, fast_search):
        rho_ = werner_state(0.5)
        report_ = e_convex_roof_estimate("l1", rho_, fast_search)
        assert report_.kind == BoundKind.UPPER_BOUND
        np.testing.assert_allclose(
            report_.witness.mixture().data, rho_.data, atol=1e-8
        )


class TestDiscord:
    def test_pure_matches_entanglement(self, skewed, fast_search):
        report_ = d_c_upper_bound("l1", skewed, fast_search)
        assert report_.kind == BoundKind.EXACT
        assert report_.value == pytest.approx(0.6, abs=1e-8)

    def test_cq_decomposition_is_zero(self, fast_search):
        rho_, ensemble_ = cq_state((2, 2), 3)
        report_ = d_c_upper_bound(
            "l1", rho_, fast_search, decomposition=ensemble_
        )
        assert report_.kind == BoundKind.EXACT
        assert report_.value <= 1e-8
        assert report_.witness.family == ExtensionFamily.CQ

    def test_never_above_entanglement_candidates(self, fast_search):
        rho_ = werner_state(0.7)
        d_c = d_c_upper_bound("l1", rho_, fast_search).value
        assert d_c <= c_min("l1", rho_, fast_search.cmin).value + 1e-9

    def test_full_rank_non_square(self, fast_search):
        rho_ = ginibre_mixed((2, 3), 1)
        report_ = d_c_upper_bound("l1", rho_, fast_search)
        assert report_.kind == BoundKind.UPPER_BOUND
        assert (1, 6) in report_.ancilla_dims_tried
        assert len(report_.diagnostics["candidates"]) == 2
        c_min_ = c_min("l1", rho_, fast_search.cmin).value
        assert report_.value <= c_min_ + 1e-9


class TestOracles:
    def test_ppt_boundary(self):
        assert is_separable_ppt(werner_state(0.3))
        assert is_separable_ppt(werner_state(1 / 3))
        assert not is_separable_ppt(werner_state(0.35))

    def test_ppt_unsupported_dims(self):
        with pytest.raises(QuantifierArgumentError):
            is_separable_ppt(ginibre_mixed((3, 3), 0))

    def test_concurrence(self, bell):
        assert concurrence_2q(bell) == pytest.approx(1)
        assert concurrence_2q(werner_state(0.8)) == pytest.approx(0.7)
        assert concurrence_2q(werner_state(0.2)) == 0


class TestClassify:
    def test_cc(self, fast_cmin):
        rho_, _ = cc_state((2, 2), 5)
        result_ = classify(rho_, options=ClassifyOptions(cmin=fast_cmin))
        assert result_.label == Classification.CC
        assert result_.cq

    def test_cq_not_cc(self, fast_cmin):
        rho_, _ = cq_state((2, 2), 5)
        options_ = ClassifyOptions(cmin=fast_cmin)
        result_ = classify(rho_, options=options_)
        assert result_.label == Classification.CQ
        replay_ = np.max(
            np.abs(off_diagonal_blocks(rho_.data, result_.cq.basis_A, 2))
        )
        assert replay_ == pytest.approx(result_.cq.residual, abs=1e-12)

    def test_bell_is_neither(self, bell, fast_cmin):
        options_ = ClassifyOptions(cmin=fast_cmin)
        result_ = classify(bell, options=options_)
        assert result_.label == Classification.NEITHER
        assert not is_classical_quantum(bell, options=options_)

    def test_cc_witness_replays(self, fast_cmin):
        rho_, _ = cc_state((2, 3), 8)
        result_ = is_classical_classical(
            rho_, options=ClassifyOptions(cmin=fast_cmin)
        )
        assert result_
        assert correlated_coherence(
            "l1", rho_, result_.witness
        ) == pytest.approx(result_.value, abs=1e-8)

    def test_diagonal_state_is_cc(self):
        rho_ = DensityMatrix(data=np.diag([0.5, 0.1, 0.3, 0.1]), dims=(2, 2))
        assert classify(rho_, tol=1e-8).label == Classification.CC

    def test_flagged_hadamard_mixture_is_cc(self, fast_cmin):
        zero_plus_ = np.kron([1, 0], [1, 1]) / np.sqrt(2)
        one_minus_ = np.kron([0, 1], [1, -1]) / np.sqrt(2)
        rho_ = DensityMatrix(
            data=0.5 * np.outer(zero_plus_, zero_plus_)
            + 0.5 * np.outer(one_minus_, one_minus_),
            dims=(2, 2),
        )
        witness_ = LocalBasisPair(
            basis_A=np.eye(2), basis_B=np.array([[1, 1], [1, -1]]) / np.sqrt(2)
        )
        assert correlated_coherence("l1", rho_, witness_) == pytest.approx(
            0, abs=1e-12
        )
        options_ = ClassifyOptions(
            cmin=fast_cmin.copy(update={"hints": [witness_]})
        )
        assert classify(rho_, options=options_).label == Classification.CC

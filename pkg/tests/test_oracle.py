"""Numerical ground truth: bases, sampling, link product, validation tests."""

from __future__ import annotations

import random

import numpy as np
import pytest

from hotypes import (
    ContractionSpec,
    Label,
    OperatorMatrix,
    build_D,
    channel_violation_margin,
    check_contraction,
    contract_set,
    delta_basis,
    dump_operator,
    herm_basis,
    io_partition,
    is_channel,
    is_nosignalling,
    link_product,
    membership,
    numeric_contraction,
    parse_type,
    phi_operator,
    sample_deterministic,
    violation_witness,
)
from hotypes.oracle import (
    basis_for_words,
    identity_operator,
    membership_defects,
    nosignalling_defect,
    partial_trace,
    partial_transpose,
)

from conftest import random_type_with_io

ALGEBRA_TOL = 1e-12
RESIDUAL_TOL = 1e-9


class TestHermBasis:
    def test_one_dimensional_space(self):
        basis = herm_basis(1)
        assert len(basis) == 1
        assert np.allclose(basis.elements[0], [[1.0]])

    def test_qubit_basis_shape(self):
        basis = herm_basis(2)
        assert len(basis) == 4
        assert np.allclose(basis.elements[0], np.eye(2) / np.sqrt(2))
        for element in basis.elements[1:]:
            assert abs(np.trace(element)) < ALGEBRA_TOL

    @pytest.mark.parametrize("d", [1, 2, 3, 4])
    def test_gram_matrix_is_identity(self, d):
        basis = herm_basis(d)
        gram = basis.gram_matrix()
        assert np.max(np.abs(gram - np.eye(d * d))) < ALGEBRA_TOL

    @pytest.mark.parametrize("d", [2, 3, 4])
    def test_elements_are_hermitian(self, d):
        for element in herm_basis(d).elements:
            assert np.max(np.abs(element - element.conj().T)) < ALGEBRA_TOL


class TestDeltaBasis:
    def test_single_qubit_state(self):
        assert len(delta_basis(parse_type("A"))) == 3

    def test_channel_dimension(self):
        # words {00, 10}: 3*3 + 1*3
        assert len(delta_basis(parse_type("A->B"))) == 12

    def test_count_matches_word_formula(self):
        rng = random.Random(107)
        for _ in range(20):
            x = random_type_with_io(rng, max_systems=4, dims=(2, 3))
            words = build_D(x)
            expected = 0
            for word in words:
                size = 1
                for i, a in enumerate(words.universe):
                    size *= 1 if (word.bits >> i) & 1 else a.dimension**2 - 1
                expected += size
            assert len(delta_basis(x)) == expected

    def test_orthogonal_to_identity(self):
        for text in ("A", "A->B", "(A->B)*(C->D)"):
            basis = delta_basis(parse_type(text))
            for element in basis.elements:
                assert abs(np.trace(element)) < ALGEBRA_TOL

    def test_orthonormal(self):
        basis = delta_basis(parse_type("A->B"))
        gram = basis.gram_matrix()
        assert np.max(np.abs(gram - np.eye(len(basis)))) < ALGEBRA_TOL

    def test_dimension_guard(self):
        big = parse_type("A->B", {"A": 17, "B": 17})
        with pytest.raises(ValueError):
            delta_basis(big)


class TestSampling:
    def test_magnitude_zero_is_the_identity_point(self):
        x = parse_type("A->B")
        sample = sample_deterministic(x, seed=1, magnitude=0)
        assert np.array_equal(sample.data, 0.5 * np.eye(4))

    def test_channel_marginal(self):
        x = parse_type("A->B")
        for seed in range(5):
            sample = sample_deterministic(x, seed=seed)
            marginal = partial_trace(sample, ["B"])
            assert np.max(np.abs(marginal.data - np.eye(2))) < RESIDUAL_TOL

    def test_trace_is_the_input_dimension(self):
        rng = random.Random(109)
        for _ in range(10):
            x = random_type_with_io(rng, max_systems=4)
            analysis = io_partition(x)
            expected = 1
            for a in analysis.inputs:
                expected *= a.dimension
            sample = sample_deterministic(x, seed=rng.randint(0, 999))
            assert abs(sample.trace().real - expected) < RESIDUAL_TOL

    def test_samples_are_members_by_construction(self):
        rng = random.Random(113)
        for _ in range(10):
            x = random_type_with_io(rng, max_systems=4)
            assert membership(x, sample_deterministic(x, seed=rng.randint(0, 999)))

    def test_reproducible_per_seed(self):
        x = parse_type("(A->B)->(C->D)")
        one = sample_deterministic(x, seed=42)
        two = sample_deterministic(x, seed=42)
        assert np.array_equal(one.data, two.data)
        assert not np.array_equal(one.data, sample_deterministic(x, seed=43).data)

    def test_positive_semidefinite(self):
        x = parse_type("(A->B)->(C->D)")
        for seed in range(5):
            assert sample_deterministic(x, seed=seed, magnitude=4.0).min_eigenvalue() >= 0


class TestLinkProduct:
    def test_identity_channel_chain(self):
        a, b, c = Label("A"), Label("B"), Label("C")
        chained = link_product(phi_operator(a, b), phi_operator(b, c))
        assert np.max(np.abs(chained.data - phi_operator(a, c).data)) < ALGEBRA_TOL

    def test_disjoint_labels_give_the_tensor_product(self):
        a, b, c = Label("A"), Label("B"), Label("C")
        r = OperatorMatrix((a, b), np.arange(16, dtype=complex).reshape(4, 4))
        s = OperatorMatrix((c,), np.array([[1, 2], [3, 4]], dtype=complex))
        linked = link_product(r, s)
        assert np.max(np.abs(linked.data - np.kron(r.data, s.data))) < ALGEBRA_TOL

    def test_commutativity(self):
        rng = random.Random(127)
        for _ in range(20):
            x = random_type_with_io(rng, max_systems=3)
            names = {a.name for a in io_partition(x).elementary}
            y = parse_type("->".join(sorted(names)) if len(names) > 1 else next(iter(names)))
            r = sample_deterministic(x, seed=rng.randint(0, 99))
            s = sample_deterministic(y, seed=rng.randint(0, 99))
            forward = link_product(r, s)
            backward = link_product(s, r)
            assert np.max(np.abs(forward.data - backward.data)) < ALGEBRA_TOL

    def test_associativity(self):
        r = sample_deterministic(parse_type("A->B"), seed=5)
        s = sample_deterministic(parse_type("B->C"), seed=6)
        t = sample_deterministic(parse_type("C->D"), seed=7)
        left = link_product(link_product(r, s), t)
        right = link_product(r, link_product(s, t))
        assert np.max(np.abs(left.data - right.data)) < ALGEBRA_TOL

    def test_positivity_preserved(self):
        rng = random.Random(131)
        for _ in range(10):
            r = sample_deterministic(parse_type("A->B"), seed=rng.randint(0, 99))
            s = sample_deterministic(parse_type("B->C"), seed=rng.randint(0, 99))
            assert link_product(r, s).min_eigenvalue() >= -ALGEBRA_TOL

    def test_trace_law_for_composed_pairs(self):
        # the linked trace counts only the uncontracted input dimensions
        cases = [
            ("A->B", "B->C", 2),        # channel chain, remaining input A
            ("(A->B)*(C->D)", "B->E", 4),  # remaining inputs A and C
            ("A->B", "~(A->B)", 1),     # map against its dual, scalar one
        ]
        for left_text, right_text, expected in cases:
            r = sample_deterministic(parse_type(left_text), seed=21)
            s = sample_deterministic(parse_type(right_text), seed=22)
            assert link_product(r, s).trace().real == pytest.approx(expected, abs=RESIDUAL_TOL)

    def test_shared_dimension_mismatch_rejected(self):
        r = identity_operator([Label("A", 2)])
        s = identity_operator([Label("A", 3)])
        with pytest.raises(ValueError):
            link_product(r, s)


class TestNumericContraction:
    def test_full_contraction_of_the_entangled_pair(self):
        # Tr[Phi Phi^T] with Phi symmetric and Phi^2 = d Phi gives d^2
        a, b = Label("A"), Label("B")
        phi = phi_operator(a, b)
        scalar = numeric_contraction(phi, a, b)
        assert scalar.labels == ()
        assert abs(scalar.data[0, 0] - 4.0) < ALGEBRA_TOL

    def test_product_rule(self):
        rng = np.random.default_rng(3)
        rho = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
        sigma = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
        a, b = Label("A"), Label("B")
        product = OperatorMatrix((a, b), np.kron(rho, sigma))
        scalar = numeric_contraction(product, a, b)
        assert abs(scalar.data[0, 0] - np.trace(rho @ sigma.T)) < ALGEBRA_TOL

    def test_admissible_pair_yields_channels(self):
        x = parse_type("(A->B)*(C->D)")
        for seed in range(10):
            sample = sample_deterministic(x, seed=seed)
            contracted = numeric_contraction(sample, "C", "B")
            assert is_channel(contracted, ["A"], ["D"], RESIDUAL_TOL)


class TestChannelAndNoSignalling:
    def test_depolarizing_style_choi(self):
        a, b = Label("A"), Label("B")
        choi = OperatorMatrix((a, b), np.eye(4, dtype=complex) / 2)
        assert is_channel(choi, [a], [b])

    def test_identity_channel_signals(self):
        a, b = Label("A"), Label("B")
        assert not is_nosignalling(phi_operator(a, b), [a], [b], a, b)

    def test_tensor_samples_do_not_signal_across(self):
        x = parse_type("(A->B)*(C->D)")
        analysis = io_partition(x)
        for seed in range(10):
            sample = sample_deterministic(x, seed=seed)
            assert is_nosignalling(
                sample, analysis.inputs_ordered(), analysis.outputs_ordered(), "A", "D"
            )
            assert is_nosignalling(
                sample, analysis.inputs_ordered(), analysis.outputs_ordered(), "C", "B"
            )

    def test_agreement_with_the_type_level_verdicts(self):
        rng = random.Random(137)
        for _ in range(5):
            x = random_type_with_io(rng, max_systems=4)
            analysis = io_partition(x)
            for a in analysis.inputs_ordered():
                for b in analysis.outputs_ordered():
                    admissible = check_contraction(x, ContractionSpec.of([(a, b)])).admissible
                    if admissible:
                        for seed in range(5):
                            sample = sample_deterministic(x, seed=seed)
                            assert is_nosignalling(
                                sample,
                                analysis.inputs_ordered(),
                                analysis.outputs_ordered(),
                                a,
                                b,
                            )
                    else:
                        witness = violation_witness(x, a, b)
                        assert (
                            nosignalling_defect(
                                witness,
                                analysis.inputs_ordered(),
                                analysis.outputs_ordered(),
                                a,
                                b,
                            )
                            > 1e-3
                        )


class TestSemanticCharacterization:
    def test_sampled_supermaps_send_channels_to_channels(self):
        # the defining property of the deterministic set, checked through
        # the link product rather than through the subspace construction
        supermap_type = parse_type("(A->B)->(C->D)")
        plain = parse_type("A->B")
        for seed in range(20):
            supermap = sample_deterministic(supermap_type, seed=seed)
            channel = sample_deterministic(plain, seed=1000 + seed)
            image = link_product(supermap, channel)
            assert is_channel(image, ["C"], ["D"], RESIDUAL_TOL)

    def test_ancilla_leg_rides_through(self):
        # complete preservation: feeding a channel with an extra output leg
        # must still come out a channel, the leg untouched
        supermap_type = parse_type("(A->B)->(C->D)")
        with_ancilla = parse_type("A->B*E")
        for seed in range(20):
            supermap = sample_deterministic(supermap_type, seed=seed)
            channel = sample_deterministic(with_ancilla, seed=2000 + seed)
            image = link_product(supermap, channel)
            assert is_channel(image, ["C"], ["D", "E"], RESIDUAL_TOL)


class TestMembership:
    def test_inclusion_transfers_membership(self):
        x = parse_type("(A->B)->(C->D)")
        wide = parse_type("(C*B)->(A*D)")
        for seed in range(5):
            sample = sample_deterministic(x, seed=seed)
            assert membership(x, sample)
            assert membership(wide, sample)

    def test_perturbation_outside_the_word_set_fails(self):
        x = parse_type("A->B")
        analysis = io_partition(x)
        lam = float(analysis.lam)
        # deviation along word 0_A 1_B, which the channel word set excludes
        sigma_z = np.array([[1, 0], [0, -1]], dtype=complex)
        deviation = np.kron(sigma_z, np.eye(2))
        data = lam * np.eye(4) + 0.1 * deviation
        op = OperatorMatrix((Label("A"), Label("B")), data)
        defects = membership_defects(x, op)
        assert defects["subspace_residual"] > 1e-3
        assert not membership(x, op)

    def test_wrong_labels_rejected(self):
        with pytest.raises(ValueError):
            membership(parse_type("A->B"), identity_operator([Label("A")]))


class TestViolationWitness:
    def test_margin_is_visible(self):
        x = parse_type("(A->B)*(C->D)")
        witness = violation_witness(x, "A", "B")
        assert membership(x, witness)
        contracted = numeric_contraction(witness, "A", "B")
        assert channel_violation_margin(contracted, ["C"], ["D"]) >= 1e-3

    def test_admissible_pair_refused(self):
        with pytest.raises(ValueError):
            violation_witness(parse_type("(A->B)*(C->D)"), "C", "B")

    def test_margin_scales_linearly_in_epsilon(self):
        x = parse_type("(A->B)*(C->D)")
        analysis = io_partition(x)
        lam = float(analysis.lam)
        witness = violation_witness(x, "A", "B")
        # recover the deviation direction; the construction uses epsilon = lam/2
        direction = (witness.data - lam * np.eye(witness.side)) / (lam / 2)
        margins = []
        for eps in (lam / 8, lam / 16):
            op = OperatorMatrix(witness.labels, lam * np.eye(witness.side) + eps * direction)
            contracted = numeric_contraction(op, "A", "B")
            margins.append(channel_violation_margin(contracted, ["C"], ["D"]))
        assert margins[0] == pytest.approx(2 * margins[1], rel=1e-9)


class TestStringOperatorCompatibility:
    def test_contraction_lands_in_the_contracted_span(self):
        rng = random.Random(139)
        for _ in range(5):
            x = random_type_with_io(rng, max_systems=4)
            analysis = io_partition(x)
            a = sorted(analysis.inputs)[0]
            b = sorted(analysis.outputs)[0]
            basis = delta_basis(x)
            coeffs = np.random.default_rng(rng.randint(0, 999)).standard_normal(len(basis))
            deviation = sum(c * t for c, t in zip(coeffs, basis.elements))
            op = OperatorMatrix(basis.labels, deviation.astype(complex))
            contracted = numeric_contraction(op, a, b)
            target_words = contract_set(build_D(x), [(a, b)])
            target_basis = basis_for_words(target_words)
            projected = np.zeros_like(contracted.data)
            for element in target_basis.elements:
                weight = np.vdot(element.reshape(-1), contracted.data.reshape(-1))
                projected += weight * element
            residual = np.linalg.norm(contracted.data - projected)
            assert residual < RESIDUAL_TOL


class TestOperatorUtilities:
    def test_labels_must_be_sorted(self):
        with pytest.raises(ValueError):
            OperatorMatrix((Label("B"), Label("A")), np.eye(4, dtype=complex))

    def test_partial_transpose_involution(self):
        x = parse_type("A->B")
        sample = sample_deterministic(x, seed=9)
        twice = partial_transpose(partial_transpose(sample, ["A"]), ["A"])
        assert np.array_equal(twice.data, sample.data)

    def test_hermiticity_preserved_by_operations(self):
        r = sample_deterministic(parse_type("A->B"), seed=11)
        s = sample_deterministic(parse_type("B->C"), seed=12)
        assert link_product(r, s).hermiticity_defect() < ALGEBRA_TOL
        assert partial_trace(r, ["B"]).hermiticity_defect() < ALGEBRA_TOL

    def test_dump_format(self):
        op = identity_operator([Label("A")])
        text = dump_operator(op)
        lines = text.splitlines()
        assert lines[0] == "2"
        assert len(lines) == 3
        assert lines[1].split() == ["1", "0", "0", "0"]

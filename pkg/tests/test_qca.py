"""Tests for Margolus-form QCAs, the folding construction and the index."""

from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from klocal import qca as Q

X, Z = Q.pauli("X"), Q.pauli("Z")


def reflection(m: int, d: int) -> np.ndarray:
    size = d ** m
    out = np.zeros((size, size))
    for idx in range(size):
        digits = np.unravel_index(idx, (d,) * m)
        out[np.ravel_multi_index(digits[::-1], (d,) * m), idx] = 1
    return out


def symmetric_unitary(sym: np.ndarray, rng) -> np.ndarray:
    """Random unitary commuting with a Hermitian involution."""
    w, v = np.linalg.eigh(sym)
    out = np.zeros_like(sym, dtype=complex)
    for val in (-1, 1):
        p = v[:, np.isclose(w, val)]
        out += p @ Q.haar_unitary(p.shape[1], rng) @ p.conj().T
    return out


class TestDenseOperator:
    def test_dims_checked(self):
        with pytest.raises(ValueError):
            Q.DenseOperator(np.eye(4), (2, 3), (2, 2))

    def test_matmul_checks_dims(self):
        a = Q.DenseOperator(np.eye(4), (1, 4), (4, 1))
        with pytest.raises(ValueError):
            a @ Q.DenseOperator(np.eye(4), (2, 2), (2, 2))

    def test_dagger_swaps_dims(self):
        a = Q.DenseOperator(np.eye(4), (2, 2), (1, 4))
        assert a.dagger().in_dims == (1, 4) and a.dagger().out_dims == (2, 2)


class TestSpatialReverse:
    def test_swap_of_product(self):
        rng = np.random.default_rng(0)
        a, b = Q.haar_unitary(2, rng), Q.haar_unitary(3, rng)
        op = Q.DenseOperator(np.kron(a, b), (2, 3), (2, 3))
        np.testing.assert_allclose(Q.spatial_reverse(op).matrix, np.kron(b, a), atol=1e-14)

    @settings(max_examples=25, deadline=None)
    @given(st.integers(0, 2 ** 31))
    def test_involution(self, seed):
        u = Q.haar_unitary(4, np.random.default_rng(seed))
        op = Q.DenseOperator(u, (2, 2), (1, 4))
        twice = Q.spatial_reverse(Q.spatial_reverse(op))
        np.testing.assert_allclose(twice.matrix, u, atol=1e-14)

    def test_bad_factorization(self):
        op = Q.DenseOperator(np.eye(4), (2, 2), (2, 2))
        with pytest.raises(ValueError):
            Q.spatial_reverse(op, (3, 2))


class TestDeviation:
    def test_global_phase_ignored(self):
        u = Q.haar_unitary(4, np.random.default_rng(2))
        assert Q.deviation(np.exp(0.7j) * u, u) < 1e-14

    @pytest.mark.parametrize("norm", ["max", "fro", "spectral"])
    def test_norms_detect_difference(self, norm):
        assert Q.deviation(np.eye(2), np.diag([1, -1]), norm) > 1

    def test_unknown_norm(self):
        with pytest.raises(ValueError):
            Q.deviation(np.eye(2), np.eye(2), "l1")


class TestMargolus:
    def test_dimension_constraint(self):
        with pytest.raises(ValueError):
            Q.MargolusQCA(2, 3, 2, np.eye(4), np.eye(4))

    def test_non_unitary_rejected(self):
        with pytest.raises(ValueError):
            Q.MargolusQCA(2, 2, 2, 2 * np.eye(4), np.eye(4))

    def test_shift_translates(self):
        m = 6
        s = Q.apply_margolus_on_ring(Q.shift_qca(2), m).matrix
        # qubit 0 set (most significant) moves to qubit 1
        src = 1 << (m - 1)
        assert np.argmax(np.abs(s[:, src])) == 1 << (m - 2)

    def test_identity_is_identity(self):
        i = Q.apply_margolus_on_ring(Q.identity_qca(2), 6).matrix
        np.testing.assert_allclose(i, np.eye(64), atol=1e-14)

    @pytest.mark.parametrize("ell", [1, 2, 4])
    def test_reversed_is_reflection(self, ell):
        q = Q.random_qca(2, ell, np.random.default_rng(ell))
        m = 6
        a = Q.apply_margolus_on_ring(q, m).matrix
        b = Q.apply_margolus_on_ring(Q.reversed_qca(q), m).matrix
        r = reflection(m, 2)
        assert Q.deviation(b, r @ a @ r.T) < 1e-12

    def test_ring_size_checked(self):
        with pytest.raises(ValueError):
            Q.margolus_circuit(Q.shift_qca(2), 5)


class TestLegCircuit:
    def test_leg_mismatch(self):
        c = Q.LegCircuit((2, 2, 2))
        c.add("v", Q.shift_qca(2).v_op, (0, 1))
        with pytest.raises(ValueError):
            c.output_dims()

    def test_monomial_matches_dense(self):
        q = Q.compactify_2d_shift(1)
        circ = Q.margolus_circuit(q, 6)
        image, phase = circ.monomial()
        dense = circ.dense().matrix
        for j in range(dense.shape[1]):
            assert dense[image[j], j] == pytest.approx(phase[j])

    def test_budget(self):
        circ = Q.LegCircuit((4,) * 7)
        with pytest.raises(Q.BudgetError):
            circ.dense()


class TestFolding:
    @pytest.mark.parametrize("n", [2, 4])
    def test_layout(self, n):
        lay = Q.ring_layout(n)
        assert lay.size == 2 * n + 2
        assert lay.pos("A", 0) == 0 and lay.pos("B", 1) == lay.size - 1

    @pytest.mark.parametrize("n", [1, 3, 0])
    def test_layout_rejects(self, n):
        with pytest.raises(ValueError):
            Q.ring_layout(n)

    def test_certificate_region2(self):
        _, _, cert = Q.build_vr(Q.shift_qca(2), 2, dense=False)
        assert cert == [[[0, 1], [2, 3], [5, 4]], [[1, 2], [0, 5], [4, 3]]]

    @pytest.mark.parametrize("ell", [1, 2])
    def test_vr_matches_definition(self, ell):
        q = Q.random_qca(2, ell, np.random.default_rng(10 + ell))
        vr, _, _ = Q.build_vr(q, 2)
        ref = Q.build_vr_reference(q, 2)
        assert Q.deviation(vr.matrix, ref.matrix) < 1e-12

    @pytest.mark.parametrize(
        "q,n",
        [
            (Q.shift_qca(2), 2),
            (Q.shift_qca(2), 4),
            (Q.identity_qca(2), 2),
            (Q.random_qca(2, 2, np.random.default_rng(3)), 2),
            (Q.random_qca(2, 1, np.random.default_rng(4)), 4),
            (Q.compactify_2d_shift(3), 2),
        ],
        ids=["shift-6", "shift-10", "identity", "random-l2", "random-l1-10", "diag-W3"],
    )
    def test_ring_equality(self, q, n):
        assert Q.verify_ring_equality(q, n) <= 1e-10

    def test_shift_w_gauges(self):
        q = Q.shift_qca(2)
        swap = np.eye(4)[[0, 2, 1, 3]]
        np.testing.assert_allclose(Q.build_w(q).matrix, swap, atol=1e-14)
        np.testing.assert_allclose(Q.build_w(q, mirror_internal=True).matrix, np.eye(4), atol=1e-14)

    def test_budget_error_for_generic_large_ring(self):
        q = Q.random_qca(4, 4, np.random.default_rng(0))
        with pytest.raises(Q.BudgetError):
            Q.verify_ring_equality(q, 4)


class TestIndex:
    @pytest.mark.parametrize(
        "q,want",
        [(Q.shift_qca(2), Fraction(2)), (Q.identity_qca(2), Fraction(1)), (Q.shift_qca(4), Fraction(4))],
        ids=["shift", "identity", "shift-d4"],
    )
    def test_values(self, q, want):
        assert Q.gnvw_index(q) == want

    @pytest.mark.parametrize("ell", [1, 2, 4])
    def test_reversed_reciprocal(self, ell):
        q = Q.random_qca(2, ell, np.random.default_rng(ell))
        assert Q.gnvw_index(Q.reversed_qca(q)) * Q.gnvw_index(q) == 1

    def test_blocked_shift_is_square(self):
        # The shift on blocks of two qubits equals two single-qubit shifts.
        s2 = Q.apply_margolus_on_ring(Q.shift_qca(2), 8).matrix
        s4 = Q.apply_margolus_on_ring(Q.shift_qca(4), 4).matrix
        assert Q.deviation(s4, s2 @ s2) == 0.0
        assert Q.gnvw_index(Q.shift_qca(4)) == Q.gnvw_index(Q.shift_qca(2)) ** 2


class TestLemmas:
    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 2 ** 31))
    def test_schmidt_factors_trivial_on_idle_qubit(self, seed):
        rng = np.random.default_rng(seed)
        a = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
        # qubits (0, 1 | 2); qubit 1 is idle
        o = Q.embed(a, [0, 2], (2, 2, 2))
        terms = Q.schmidt_operator_decompose(o, (4, 2))
        total = sum(np.kron(x, y) for x, y in terms)
        np.testing.assert_allclose(total, o, atol=1e-10)
        for left, _ in terms:
            reduced = left.reshape(2, 2, 2, 2).trace(axis1=1, axis2=3) / 2
            np.testing.assert_allclose(left, np.kron(reduced, np.eye(2)), atol=1e-10)

    def test_schmidt_shape_checked(self):
        with pytest.raises(ValueError):
            Q.schmidt_operator_decompose(np.eye(8), (2, 2))

    def test_w_symmetry_symmetric_brickwork(self):
        rng = np.random.default_rng(1)
        zz = np.kron(Z, Z)
        q = Q.fdqc_qca(symmetric_unitary(zz, rng), symmetric_unitary(zz, rng), 2)
        assert Q.check_w_symmetry(q, Z) is True
        assert Q.check_w_symmetry(q, X) is None  # precondition fails
        assert Q.vr_gatewise_symmetry(q, Z) < 1e-10

    @pytest.mark.parametrize("q,s", [(Q.shift_qca(2), X), (Q.identity_qca(2), Z)], ids=["shift", "identity"])
    def test_w_symmetry_simple(self, q, s):
        assert Q.check_w_symmetry(q, s) is True

    def test_translation_covariance(self):
        t = Q.translation_operator(2)
        assert Q.check_w_translation(Q.compactify_2d_shift(2), t)
        rng = np.random.default_rng(5)
        g = Q.haar_unitary(16, rng)
        assert not Q.check_w_translation(Q.compactify_2d_qca(2, g), t)

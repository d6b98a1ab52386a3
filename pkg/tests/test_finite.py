"""Tests for the M_4 example, row contractions and the truncated Fock model."""

import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.spatial import ConvexHull

from pickface.exceptions import AlreadyExtreme, DegenerateEigenspace, RankDeficient
from pickface.finite import (
    FockModel,
    RowTuple,
    brute_force_commutant_dimension,
    build_example_matrices,
    coisometry_split,
    fock_moments,
    irreducibility_check,
    m4_face_analysis,
    numerical_range_boundary,
    row_contraction_check,
    word_span_dimension,
)

A, B = build_example_matrices()
I4 = np.eye(4)

# exact rational rank of the word span of {I, A, B} by max length 0..7 (sympy)
M4_WORD_SPAN = [1, 3, 6, 10, 13, 15, 16, 16]


def random_strict_contraction(rng, n, d):
    X = rng.normal(size=(n, n * d)) + 1j * rng.normal(size=(n, n * d))
    X *= rng.uniform(0.2, 0.95) / np.linalg.norm(X, 2)
    return RowTuple(tuple(X[:, i * n:(i + 1) * n] for i in range(d)))


class TestExampleMatrices:
    def test_shapes_and_symmetry(self):
        np.testing.assert_array_equal(np.linalg.eigvalsh(A), [0, 0, 1, 1])
        np.testing.assert_array_equal(B, B.T)
        assert B[0, 2] == 2 and B[1, 3] == 1 and B[2, 3] == 1

    def test_kernel_of_a(self):
        w, U = np.linalg.eigh(A)
        ker = U[:, np.abs(w) < 1e-12]
        np.testing.assert_allclose(ker @ ker.T, np.diag([1, 1, 0, 0]))


class TestWordSpan:
    def test_frozen_oracle(self):
        assert [word_span_dimension([I4, A, B], L) for L in range(8)] == M4_WORD_SPAN

    def test_generates_full_algebra(self):
        assert word_span_dimension([I4, A, B], 6) == 16
        assert word_span_dimension([I4, A, B], 20) == 16

    def test_identity_only(self):
        assert all(word_span_dimension([np.eye(3)], L) == 1 for L in range(5))

    def test_commutative(self):
        Z = np.diag([1.0, -1.0])
        assert all(word_span_dimension([np.eye(2), Z], L) == 2 for L in range(1, 6))

    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 2 ** 32 - 1), st.integers(2, 3), st.integers(1, 2), st.booleans())
    def test_stabilization(self, seed, n, k, diagonal):
        rng = np.random.default_rng(seed)
        gens = [np.eye(n)]
        for _ in range(k):
            G = np.diag(rng.normal(size=n)) if diagonal else rng.normal(size=(n, n))
            gens.append(G)
        dims = [word_span_dimension(gens, L) for L in range(8)]
        assert dims == sorted(dims) and dims[-1] <= n * n
        for L in range(len(dims) - 1):
            if dims[L] == dims[L + 1]:
                assert all(x == dims[L] for x in dims[L:])
                break


class TestNumericalRange:
    def test_segment(self):
        pts = numerical_range_boundary(np.diag([0.0, 1.0]), np.zeros((2, 2)), 16)
        assert {round(p.alpha, 12) for p in pts} <= {0.0, 1.0}
        assert all(p.beta == 0 for p in pts)

    def test_witness_invariant(self):
        for p in numerical_range_boundary(A, B, 64):
            x = p.witness
            assert abs(np.linalg.norm(x) - 1) <= 1e-12
            assert abs(np.vdot(x, A @ x) - p.alpha) <= 1e-10
            assert abs(np.vdot(x, B @ x) - p.beta) <= 1e-10

    def test_m4_alpha_range_and_axis(self):
        pts = numerical_range_boundary(A, B, 720)
        alphas = np.array([p.alpha for p in pts])
        assert alphas.min() >= -1e-10 and alphas.max() <= 1 + 1e-10
        assert alphas.min() <= 1e-9
        assert all(abs(p.beta) <= 1e-6 for p in pts if p.alpha <= 1e-9)

    def test_degenerate_flag(self):
        with pytest.warns(DegenerateEigenspace):
            pts = numerical_range_boundary(np.eye(2), np.zeros((2, 2)), 4, warn=True)
        assert pts[0].degenerate

    @pytest.mark.parametrize("k", [16, 45, 90, 360])
    def test_hull_monotonicity(self, k):
        coarse = np.array([(p.alpha, p.beta) for p in numerical_range_boundary(A, B, k)])
        fine = np.array([(p.alpha, p.beta) for p in numerical_range_boundary(A, B, 2 * k)])
        hull = ConvexHull(fine)
        slack = hull.equations[:, :2] @ coarse.T + hull.equations[:, 2:3]
        assert slack.max() <= 1e-12


class TestM4Face:
    def test_analysis(self):
        rep = m4_face_analysis()
        assert rep.face.support_rank == 2
        assert rep.face.affine_dimension == 3
        np.testing.assert_allclose(rep.face.support_projection, np.diag([1, 1, 0, 0]), atol=1e-12)
        assert max(abs(x) for x in rep.beta_range) <= 1e-9
        assert max(abs(x) for x in rep.beta_range_given_alpha_zero) <= 1e-9
        assert rep.alpha_range == pytest.approx((0, 0), abs=1e-12)
        assert "P^1" in rep.face.extreme_param


class TestRowContractions:
    def test_scalar_examples(self):
        assert row_contraction_check(RowTuple.scalar([1, 0])).is_coisometry
        rep = row_contraction_check(RowTuple.scalar([0.5, 0.5]))
        assert rep.is_contraction and not rep.is_coisometry
        assert rep.defect_norm == pytest.approx(0.5)
        assert not row_contraction_check(RowTuple.scalar([1, 1])).is_contraction

    def test_block_coisometry(self):
        X = RowTuple((np.eye(2) / np.sqrt(2), np.eye(2) / np.sqrt(2)))
        assert row_contraction_check(X).is_coisometry

    def test_scalar_split(self):
        Y, Z = coisometry_split(RowTuple.scalar([0.5, 0]))
        y, z = Y.row().ravel(), Z.row().ravel()
        np.testing.assert_allclose(y, [0.5 + 0.5j * np.sqrt(3), 0], atol=1e-15)
        np.testing.assert_allclose(z, [0.5 - 0.5j * np.sqrt(3), 0], atol=1e-15)

    def test_split_errors(self):
        with pytest.raises(AlreadyExtreme):
            coisometry_split(RowTuple.scalar([0.6, 0.8]))
        with pytest.raises(RankDeficient):
            coisometry_split(RowTuple((np.diag([0.5, 0.0]), np.zeros((2, 2)))))
        with pytest.raises(ValueError):
            coisometry_split(RowTuple.scalar([1, 1]))

    @settings(max_examples=50, deadline=None)
    @given(st.integers(0, 2 ** 32 - 1), st.integers(1, 4), st.integers(2, 3))
    def test_split_idempotence(self, seed, n, d):
        X = random_strict_contraction(np.random.default_rng(seed), n, d)
        Y, Z = coisometry_split(X)
        for x, y, z in zip(X.blocks, Y.blocks, Z.blocks):
            assert np.abs((y + z) / 2 - x).max() <= 1e-10
        assert row_contraction_check(Y).is_coisometry
        assert row_contraction_check(Z).is_coisometry
        assert np.abs(Y.row() - Z.row()).max() > 1e-6
        for W in (Y, Z):
            with pytest.raises(AlreadyExtreme):
                coisometry_split(W)


class TestIrreducibility:
    def test_scalar_is_irreducible(self):
        assert irreducibility_check(RowTuple.scalar([0.3, 0.4j])).is_irreducible

    def test_diagonal_is_reducible(self):
        rep = irreducibility_check(RowTuple((np.diag([1.0, 0]), np.diag([0, 1.0]))))
        assert rep.commutant_dimension == 2 and not rep.is_irreducible

    def test_matrix_units(self):
        E12 = np.array([[0, 1], [0, 0]])
        rep = irreducibility_check(RowTuple((E12, E12.T)))
        assert rep.is_irreducible
        assert brute_force_commutant_dimension(RowTuple((E12, E12.T))) == 1

    def test_direct_sum_is_reducible(self):
        X1 = np.zeros((3, 3), dtype=complex)
        X1[:2, :2] = [[0, 1], [1, 0]]
        X1[2, 2] = 0.5
        X = RowTuple((X1, np.diag([0.1, 0.1, 0.2])))
        rep = irreducibility_check(X)
        assert not rep.is_irreducible
        assert rep.commutant_dimension == brute_force_commutant_dimension(X)

    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 2 ** 32 - 1), st.integers(1, 4), st.integers(2, 3))
    def test_matches_brute_force(self, seed, n, d):
        X = random_strict_contraction(np.random.default_rng(seed), n, d)
        assert irreducibility_check(X).commutant_dimension == brute_force_commutant_dimension(X)


class TestFock:
    def test_moment_pattern(self):
        rep = fock_moments(2, 6)
        assert len(rep.moments) == 2 ** 7 - 1
        for m in rep.moments:
            expected = 1.0 if all(c == 1 for c in m.word) else 0.0
            assert m.value == expected
            assert abs(m.value) <= 1
        assert rep.to_json()["111"] == 1.0 and rep.to_json()["12"] == 0.0
        assert rep.to_json()[""] == 1.0

    def test_wandering(self):
        for d in (2, 3):
            rep = fock_moments(d, 5)
            assert rep.wandering_checked > 0
            assert rep.wandering_max <= 1e-12

    @pytest.mark.parametrize("d,depth", [(2, 4), (3, 3), (2, 6)])
    def test_isometry_on_interior(self, d, depth):
        model = FockModel(d, depth)
        P = model.interior_projection(depth - 1)
        for i, j in itertools.product(range(d), repeat=2):
            G = model.S[i].T @ model.S[j] @ P
            np.testing.assert_array_equal(G, P if i == j else np.zeros_like(P))

    def test_first_generator_fixes_vacuum(self):
        model = FockModel(3, 2)
        np.testing.assert_array_equal(model.S[0] @ model.vacuum(), model.vacuum())

    def test_invalid(self):
        with pytest.raises(ValueError):
            FockModel(1, 3)

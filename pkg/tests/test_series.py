"""Tests for kernel coefficients, Pick inversion and kernel evaluation."""

import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pickface.exceptions import DepthExceeded, NonPositive, NonUnitLeading, UnboundedAtBoundary
from pickface.series import (
    CoefficientSequence,
    SpaceSpec,
    b_sum_identity_check,
    coeffs_a,
    hs_coeffs,
    invert_to_b,
    kernel_bounds_at_one,
    kernel_value,
    pick_check,
    reciprocal_residual,
    regularity_report,
)

F = Fraction
ZETA2 = math.pi ** 2 / 6

# 1 - 1/A(z) for A = sum (n+1)^-2 z^n, series coefficients from sympy
S2_B_EXACT = [F(0), F(1, 4), F(7, 144), F(13, 576), F(6911, 518400), F(6151, 691200),
              F(4683971, 731566080), F(70921157, 14631321600), F(50141583671, 13168189440000)]


def _exact_a(values):
    return CoefficientSequence(tuple(F(v) for v in values))


class TestCoefficients:
    def test_s_zero_is_all_ones_without_tail(self):
        a = coeffs_a(SpaceSpec.hs(0, 5))
        np.testing.assert_array_equal(a.values, np.ones(6))
        assert not a.bounded

    def test_s_minus_two(self):
        a = coeffs_a(SpaceSpec.hs(-2, 3), exact=True)
        assert a.values == (F(1), F(1, 4), F(1, 9), F(1, 16))

    def test_tail_bound_is_integral_comparison(self):
        a = hs_coeffs(-2, 100)
        assert a.tail_bound == pytest.approx(1 / 101)
        assert a.tail_lower == pytest.approx(1 / 102)
        lo, hi = kernel_bounds_at_one(a)
        assert lo <= ZETA2 <= hi

    def test_explicit_passthrough(self):
        a = coeffs_a(SpaceSpec.explicit([F(1), F(1, 2), F(1, 3)]), exact=True)
        assert a.values == (F(1), F(1, 2), F(1, 3))

    def test_invalid_explicit_lists(self):
        with pytest.raises(NonUnitLeading):
            coeffs_a(SpaceSpec.explicit([2, 1]))
        with pytest.raises(NonPositive):
            coeffs_a(SpaceSpec.explicit([1, 0.5, 0.0]))
        with pytest.raises(DepthExceeded):
            coeffs_a(SpaceSpec.explicit([1, 1], depth=4))

    def test_truncate_widens_tail(self):
        a = hs_coeffs(-2, 100).truncate(10)
        assert a.depth == 10
        assert a.tail_bound == pytest.approx(1 / 11)

    def test_config_roundtrip(self, tmp_path):
        path = tmp_path / "space.yaml"
        path.write_text("kind: hs\ns: -1.5\ndepth: 40\n")
        spec = SpaceSpec.load(path)
        assert spec == SpaceSpec.hs(-1.5, 40)
        assert SpaceSpec.from_mapping(spec.to_mapping()) == spec


class TestInversion:
    def test_hardy_space(self):
        b = invert_to_b(_exact_a([1] * 6))
        assert b.values == (0, 1, 0, 0, 0, 0)

    def test_dirichlet(self):
        b = invert_to_b(_exact_a([1, F(1, 2), F(1, 3), F(1, 4)]))
        assert b.values == (0, F(1, 2), F(1, 12), F(1, 24))

    def test_s_minus_two_matches_sympy_oracle(self):
        b = invert_to_b(hs_coeffs(-2, 8, exact=True))
        assert list(b.values) == S2_B_EXACT
        bf = invert_to_b(hs_coeffs(-2, 8))
        np.testing.assert_allclose(bf.values, [float(x) for x in S2_B_EXACT], rtol=1e-13)

    def test_non_pick_example(self):
        report = pick_check(_exact_a([1, 2, 1]))
        assert invert_to_b(_exact_a([1, 2, 1])).values == (0, 2, -3)
        assert not report.is_pick_up_to_depth
        assert report.first_negative_index == 2
        assert report.min_b == -3

    def test_hardy_min_b_is_zero(self):
        report = pick_check(hs_coeffs(0, 30))
        assert report.is_pick_up_to_depth and report.min_b == 0.0

    @pytest.mark.parametrize("s", [0, -0.5, -1, -1.5, -2, -3])
    def test_pick_for_nonpositive_s(self, s):
        report = pick_check(hs_coeffs(s, 500))
        assert report.is_pick_up_to_depth
        assert report.min_b >= -1e-12
        assert report.is_pick_up_to_depth == (report.min_b >= -report.tol)

    def test_bergman_like_is_not_pick(self):
        assert not pick_check(hs_coeffs(1, 20)).is_pick_up_to_depth

    def test_rational_residual_is_exactly_zero(self):
        assert reciprocal_residual(hs_coeffs(-2, 50, exact=True)) == 0


@st.composite
def kernel_sequences(draw):
    n = draw(st.integers(1, 60))
    tail = draw(st.lists(st.floats(0.05, 3.0), min_size=n, max_size=n))
    return CoefficientSequence([1.0] + tail)


@st.composite
def rational_sequences(draw):
    n = draw(st.integers(1, 12))
    tail = draw(st.lists(st.fractions(F(1, 20), F(3), max_denominator=30), min_size=n, max_size=n))
    return CoefficientSequence(tuple([F(1)] + tail))


class TestProperties:
    @given(st.floats(-3.0, 0.0), st.integers(5, 200))
    def test_reciprocal_oracle_float(self, s, depth):
        assert reciprocal_residual(hs_coeffs(s, depth)) <= 1e-12

    @given(kernel_sequences())
    def test_reciprocal_oracle_random_kernel(self, a):
        b = invert_to_b(a)
        scale = max(1.0, float(np.max(np.abs(b.values))))
        assert reciprocal_residual(a, b) <= 1e-12 * scale

    @settings(max_examples=40)
    @given(rational_sequences())
    def test_reciprocal_oracle_exact(self, a):
        assert reciprocal_residual(a) == 0

    @settings(max_examples=30)
    @given(st.floats(-3.0, 0.0), st.sampled_from([100, 300, 500]))
    def test_pick_positivity_up_to_500(self, s, depth):
        assert pick_check(hs_coeffs(s, depth)).min_b >= -1e-12

    @given(st.complex_numbers(max_magnitude=0.99), st.complex_numbers(max_magnitude=0.99),
           st.floats(-3.0, 1.0))
    def test_hermitian_symmetry(self, z, w, s):
        a = hs_coeffs(s, 200)
        kzw, _ = kernel_value(a, z, w)
        kwz, _ = kernel_value(a, w, z)
        assert abs(kzw - np.conj(kwz)) <= 1e-12 * max(1.0, abs(kzw))

    @given(st.floats(-3.0, 0.0), st.complex_numbers(max_magnitude=0.9),
           st.complex_numbers(max_magnitude=0.9))
    def test_interior_error_bound_sound(self, s, z, w):
        """Truncated values at depth 40 lie within their bound of the depth-2000 value."""
        k_small, err = kernel_value(hs_coeffs(s, 40), z, w)
        k_big, err_big = kernel_value(hs_coeffs(s, 2000), z, w)
        assert abs(k_small - k_big) <= err + err_big + 1e-12


class TestKernelValue:
    def test_zeta_two_at_one(self):
        value, err = kernel_value(hs_coeffs(-2, 1000), 1, 1)
        assert value.real <= ZETA2 <= value.real + err
        assert err == pytest.approx(1 / 1001)

    def test_zero_argument(self):
        assert kernel_value(hs_coeffs(1, 10), 0.3, 0) == (1.0, 0.0)
        assert kernel_value(hs_coeffs(0, 10), 1, 0) == (1.0, 0.0)

    def test_geometric_closed_form(self):
        value, err = kernel_value(hs_coeffs(0, 60), 0.5, 0.5)
        assert abs(value - 4 / 3) <= err + 1e-15
        assert err < 1e-30

    def test_boundary_needs_tail(self):
        with pytest.raises(UnboundedAtBoundary):
            kernel_value(hs_coeffs(0, 10), 1, 1j)
        with pytest.raises(UnboundedAtBoundary):
            b_sum_identity_check(hs_coeffs(0, 100))


class TestRegularity:
    def test_s_minus_two(self):
        rep = regularity_report(hs_coeffs(-2, 1000))
        n = np.arange(1000)
        np.testing.assert_allclose(rep.ratios, ((n + 2) / (n + 1)) ** 2)
        assert rep.bounded_kernel
        assert rep.partial_sum <= ZETA2 <= rep.partial_sum + rep.tail_bound

    def test_hardy_and_bergman(self):
        r0 = regularity_report(hs_coeffs(0, 50))
        np.testing.assert_array_equal(r0.ratios, np.ones(50))
        assert r0.partial_sum == 51 and not r0.bounded_kernel
        r1 = regularity_report(hs_coeffs(1, 50))
        assert r1.tail_deviation < 0.03 and not r1.bounded_kernel

    def test_b_sum_sweep_decreases(self):
        res = b_sum_identity_check(hs_coeffs(-2, 2000), (250, 500, 1000, 2000))
        assert np.all(np.diff(res) < 0)
        assert res[-1] < 1e-3

"""Special-function kernel tests.

Expected values are either exact identities or frozen from independent
oracles; the rational-arithmetic series oracle lives in this file.
"""

import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import susyqm as sq
from susyqm.errors import CancellationWarning, ConvergenceError, DomainError, PoleError
from susyqm.specfun import _kummer_1f1_array

SQRT_PI = 1.77245385090551602730  # 20-digit reference for sqrt(pi)


def series_2f2_exact(a1, a2, b1, b2, z, terms=80):
    """Term-by-term rational accumulation of the 2F2 series (oracle)."""
    a1, a2, b1, b2, z = map(Fraction, (a1, a2, b1, b2, z))
    total = Fraction(1)
    term = Fraction(1)
    for m in range(terms):
        term *= (a1 + m) * (a2 + m) * z / ((b1 + m) * (b2 + m) * (m + 1))
        total += term
        if term == 0:
            break
    return float(total)


def series_1f1_exact(a, b, z, terms=80):
    a, b, z = map(Fraction, (a, b, z))
    total = Fraction(1)
    term = Fraction(1)
    for m in range(terms):
        term *= (a + m) * z / ((b + m) * (m + 1))
        total += term
        if term == 0:
            break
    return float(total)


class TestGamma:
    def test_integers(self):
        assert sq.gamma_fn(1.0) == 1.0
        assert sq.gamma_fn(5.0) == 24.0

    def test_half(self):
        assert sq.gamma_fn(0.5) == pytest.approx(SQRT_PI, rel=1e-13)

    def test_reflection_negative(self):
        # Gamma(-1/2) = -2 sqrt(pi)
        assert sq.gamma_fn(-0.5) == pytest.approx(-2.0 * SQRT_PI, rel=1e-12)

    @pytest.mark.parametrize("x", [0.0, -1.0, -7.0])
    def test_poles(self, x):
        with pytest.raises(PoleError):
            sq.gamma_fn(x)

    def test_overflow(self):
        with pytest.raises(OverflowError):
            sq.gamma_fn(200.0)


class TestBeta:
    def test_trivial(self):
        assert sq.beta_fn(1.0, 1.0) == pytest.approx(1.0, rel=1e-14)
        assert sq.beta_fn(2.0, 3.0) == pytest.approx(1.0 / 12.0, rel=1e-13)

    def test_half_half(self):
        assert sq.beta_fn(0.5, 0.5) == pytest.approx(math.pi, rel=1e-13)

    def test_signed_negative_argument(self):
        # B(x, 1) = 1/x holds also for negative non-integer x.
        assert sq.beta_fn(-0.5, 1.0) == pytest.approx(-2.0, rel=1e-12)

    def test_pole(self):
        with pytest.raises(PoleError):
            sq.beta_fn(-1.0, 0.5)
        with pytest.raises(PoleError):
            sq.beta_fn(0.5, -2.0)

    @settings(max_examples=50, deadline=None)
    @given(
        st.floats(min_value=0.5, max_value=10.0),
        st.floats(min_value=0.5, max_value=10.0),
    )
    def test_gamma_consistency(self, x, y):
        lhs = sq.beta_fn(x, y) * sq.gamma_fn(x + y)
        rhs = sq.gamma_fn(x) * sq.gamma_fn(y)
        assert lhs == pytest.approx(rhs, rel=1e-11)


class TestKummer:
    def test_at_zero(self):
        res = sq.kummer_1f1(3.7, 1.2, 0.0)
        assert res.value == 1.0
        assert res.terms_used <= 4

    def test_exponential(self):
        assert sq.kummer_1f1(1.0, 1.0, 2.5).value == pytest.approx(
            12.182493960703473, rel=1e-14
        )

    def test_polynomial_case(self):
        res = sq.kummer_1f1(-1.0, 2.0, 3.0)
        assert res.value == pytest.approx(-0.5, abs=1e-15)
        assert res.terms_used == 2

    def test_polynomial_terms_used(self):
        res = sq.kummer_1f1(0.0, 2.0, 5.0)
        assert res.value == 1.0
        assert res.terms_used == 1

    @settings(max_examples=40, deadline=None)
    @given(st.floats(min_value=0.0, max_value=20.0))
    def test_exponential_identity(self, z):
        assert sq.kummer_1f1(1.0, 1.0, z).value == pytest.approx(
            math.exp(z), rel=1e-12
        )

    @settings(max_examples=30, deadline=None)
    @given(
        st.integers(min_value=-8, max_value=0),
        st.floats(min_value=1.0, max_value=6.0),
        st.fractions(min_value=-8, max_value=8),
    )
    def test_polynomial_matches_direct_sum(self, a, b, z):
        b = round(b * 4) / 4  # keep b rational for the exact oracle
        oracle = series_1f1_exact(a, Fraction(b).limit_denominator(64), z)
        got = sq.kummer_1f1(float(a), b, float(z)).value
        assert got == pytest.approx(oracle, rel=1e-13, abs=1e-300)

    def test_negative_argument_transform(self):
        # oracle: rational series summed exactly
        oracle = series_1f1_exact(2, 3, Fraction(-5), terms=200)
        res = sq.kummer_1f1(2.0, 3.0, -5.0)
        assert res.value == pytest.approx(oracle, rel=1e-12)

    def test_forbidden_b(self):
        with pytest.raises(DomainError):
            sq.kummer_1f1(1.0, 0.0, 1.0)
        with pytest.raises(DomainError):
            sq.kummer_1f1(1.0, -3.0, 1.0)

    def test_range_guard(self):
        with pytest.raises(DomainError):
            sq.kummer_1f1(1.0, 1.0, 201.0)

    def test_nonconvergence(self):
        tight = sq.SeriesSettings(max_terms=5)
        with pytest.raises(ConvergenceError):
            sq.kummer_1f1(1.0, 1.0, 50.0, settings=tight)

    def test_series_result_invariants(self):
        res = sq.kummer_1f1(2.3, 1.7, 17.0)
        assert math.isfinite(res.est_error) and res.est_error >= 0.0
        assert res.terms_used <= sq.SeriesSettings().max_terms
        assert abs(res.value - series_1f1_exact(Fraction(23, 10), Fraction(17, 10), 17, terms=200)) <= max(
            10 * res.est_error, 1e-12 * abs(res.value)
        )


class TestKummerDeriv:
    def test_at_zero(self):
        assert sq.kummer_1f1_deriv(3.0, 7.0, 0.0).value == pytest.approx(3.0 / 7.0)

    def test_exponential(self):
        assert sq.kummer_1f1_deriv(1.0, 1.0, 1.0).value == pytest.approx(
            math.e, rel=1e-13
        )

    def test_polynomial(self):
        assert sq.kummer_1f1_deriv(-1.0, 2.0, 7.0).value == pytest.approx(-0.5)

    def test_finite_difference_consistency(self):
        h = 1e-6
        a, b, z = 1.7, 2.4, 3.3
        fd = (sq.kummer_1f1(a, b, z + h).value - sq.kummer_1f1(a, b, z - h).value) / (
            2 * h
        )
        assert sq.kummer_1f1_deriv(a, b, z).value == pytest.approx(fd, rel=1e-8)


class TestKummerArray:
    def test_matches_scalar(self):
        z = np.linspace(0.0, 40.0, 37)
        vals, est, _ = _kummer_1f1_array(1.5, 2.5, z)
        for zi, vi in zip(z, vals):
            assert vi == pytest.approx(sq.kummer_1f1(1.5, 2.5, float(zi)).value, rel=1e-13)
        assert est >= 0.0

    def test_negative_argument(self):
        z = -np.linspace(0.0, 10.0, 11)
        vals, _, _ = _kummer_1f1_array(1.5, 2.5, z)
        for zi, vi in zip(z, vals):
            assert vi == pytest.approx(sq.kummer_1f1(1.5, 2.5, float(zi)).value, rel=1e-12)


class TestHyp2f2:
    def test_at_zero(self):
        res = sq.hyp_2f2(1.3, 2.2, 3.1, 0.7, 0.0)
        assert res.value == 1.0 and res.est_error == 0.0

    def test_pochhammer_cancellation(self):
        assert sq.hyp_2f2(1.0, 1.0, 1.0, 1.0, 1.0).value == pytest.approx(
            math.e, rel=1e-13
        )

    def test_rational_oracle_negative_one(self):
        oracle = series_2f2_exact(3, 2, 4, 2, -1)
        res = sq.hyp_2f2(3.0, 2.0, 4.0, 2.0, -1.0)
        assert res.value == pytest.approx(oracle, rel=1e-13)

    def test_stable_branch_large_negative(self):
        # 2F2(3,2;4,2;-s) = 1F1(3,4;-s) = 6 (1 - exp(-s)(1+s+s^2/2)) / s^3;
        # at s = 60 that is 1/36000 up to an O(exp(-60)) correction.
        res = sq.hyp_2f2(3.0, 2.0, 4.0, 2.0, -60.0)
        assert res.value == pytest.approx(1.0 / 36000.0, rel=1e-12)
        assert res.est_error / abs(res.value) < 1e-10

    def test_stable_matches_naive_at_moderate_z(self):
        naive = series_2f2_exact(3, 3, 4, 2, -8)
        res = sq.hyp_2f2(3.0, 3.0, 4.0, 2.0, -8.0)
        assert res.value == pytest.approx(naive, rel=1e-11)

    @pytest.mark.parametrize("z", [0.5, 3.0, -2.0, 12.0])
    def test_reduction_to_1f1(self, z):
        # a2 = b2 cancels: 2F2(a1, c; b1, c; z) = 1F1(a1, b1; z)
        res = sq.hyp_2f2(1.3, 2.6, 2.3, 2.6, z)
        ref = sq.kummer_1f1(1.3, 2.3, z)
        assert res.value == pytest.approx(
            ref.value, abs=2.0 * (res.est_error + ref.est_error) + 1e-14
        )

    def test_reduction_contiguous_stable_path(self):
        # b1 = a1 + 1 with z < 0 goes through the incomplete-gamma branch;
        # the 1F1 reference goes through the Kummer transform.  Agreement
        # cross-validates both reroutes.
        res = sq.hyp_2f2(2.0, 1.7, 3.0, 1.7, -25.0)
        ref = sq.kummer_1f1(2.0, 3.0, -25.0)
        assert res.value == pytest.approx(ref.value, rel=1e-11)

    def test_polynomial_upper_parameter(self):
        oracle = series_2f2_exact(-2, 3, 4, 2, Fraction(7, 2))
        res = sq.hyp_2f2(-2.0, 3.0, 4.0, 2.0, 3.5)
        assert res.value == pytest.approx(oracle, rel=1e-13)

    def test_cancellation_warning(self):
        with pytest.warns(CancellationWarning):
            sq.hyp_2f2(1.0, 1.0, 1.5, 2.5, -35.0)

    def test_forbidden_lower_parameter(self):
        with pytest.raises(DomainError):
            sq.hyp_2f2(1.0, 1.0, -2.0, 1.0, 1.0)

    def test_range_guard(self):
        with pytest.raises(DomainError):
            sq.hyp_2f2(1.0, 1.0, 2.0, 2.0, 500.0)

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from probwave.errors import BracketError, DomainError, OutOfRangeError
from probwave.specfun import (
    AIRY_AI0,
    AIRY_AIP0,
    EvalPolicy,
    airy,
    bessel_j0,
    bessel_j1,
    find_root,
    kummer_coefficients,
    kummer_m,
    pochhammer,
)

# mpmath at 40 digits, frozen
J0_REF = {1.0: 0.76519768655796655, 5.0: -0.1775967713143383, 30.0: -0.086367983581040211, -12.5: 0.1468840547004211}
J1_REF = {1.0: 0.4400505857449335, 5.0: -0.32757913759146522, 30.0: -0.11875106261662294}
J2_REF = {
    0.5: 0.030604023458682641,
    1.0: 0.11490348493190048,
    2.0: 0.35283402861563772,
    5.0: 0.046565116277752216,
    10.0: 0.25463031368512062,
}
AIRY_REF = {1.0: (0.13529241631288142, -0.15914744129679321), -5.0: (0.35076100902411432, 0.32719281855444314)}


class TestBessel:
    def test_j0_at_origin(self):
        assert bessel_j0(0.0) == 1.0

    def test_j1_at_origin(self):
        assert bessel_j1(0.0) == 0.0

    @pytest.mark.parametrize("x", sorted(J0_REF))
    def test_j0_reference(self, x):
        assert abs(bessel_j0(x) - J0_REF[x]) <= 1e-10

    @pytest.mark.parametrize("x", sorted(J1_REF))
    def test_j1_reference(self, x):
        assert abs(bessel_j1(x) - J1_REF[x]) <= 1e-10

    def test_first_zeros(self):
        assert abs(bessel_j0(2.404825557695773)) <= 1e-10
        assert abs(bessel_j1(3.8317059702075123)) <= 1e-10

    def test_scalar_in_scalar_out(self):
        assert isinstance(bessel_j0(1.5), float)
        assert isinstance(bessel_j1(np.float64(1.5)), float)

    def test_array_shape_kept(self):
        x = np.linspace(-3, 3, 12).reshape(3, 4)
        assert bessel_j0(x).shape == (3, 4)

    def test_parity(self):
        x = np.linspace(0, 50, 301)
        assert np.array_equal(bessel_j0(-x), bessel_j0(x))
        assert np.array_equal(bessel_j1(-x), -bessel_j1(x))

    @pytest.mark.parametrize("x", sorted(J2_REF))
    def test_recurrence_gives_j2(self, x):
        assert abs(2.0 * bessel_j1(x) / x - bessel_j0(x) - J2_REF[x]) <= 1e-9

    def test_derivative_identity(self):
        x = np.linspace(0.1, 20, 200)
        h = 1e-5
        d = (bessel_j0(x + h) - bessel_j0(x - h)) / (2 * h)
        assert np.max(np.abs(d + bessel_j1(x))) <= 1e-6

    def test_regimes_agree_at_switch(self):
        x = np.array([11.999999, 12.0, 12.000001])
        near = bessel_j0(x, EvalPolicy(asymptotic_switch=20.0))
        assert np.max(np.abs(bessel_j0(x) - near)) <= 1e-10

    @pytest.mark.parametrize("bad", [math.nan, math.inf, -math.inf])
    def test_non_finite_rejected(self, bad):
        with pytest.raises(DomainError):
            bessel_j0(bad)
        with pytest.raises(DomainError):
            bessel_j1(np.array([0.0, bad]))


class TestEvalPolicy:
    @pytest.mark.parametrize(
        "kwargs", [{"series_terms": 0}, {"abs_tol": 1e-3}, {"abs_tol": -1.0}, {"asymptotic_switch": 5.0}]
    )
    def test_invalid(self, kwargs):
        with pytest.raises(DomainError):
            EvalPolicy(**kwargs)


class TestPochhammer:
    @pytest.mark.parametrize("a,k,expected", [(5.0, 0, 1.0), (-2, 2, 2.0), (3, 3, 60.0), (-3, 4, 0.0)])
    def test_values(self, a, k, expected):
        assert pochhammer(a, k) == expected

    @given(st.floats(-20, 20, allow_nan=False), st.integers(0, 10))
    def test_step(self, a, k):
        assert pochhammer(a, k + 1) == pytest.approx(pochhammer(a, k) * (a + k), rel=1e-12, abs=1e-12)

    def test_negative_k_rejected(self):
        with pytest.raises(DomainError):
            pochhammer(1.0, -1)


class TestKummer:
    @pytest.mark.parametrize("n,x,expected", [(0, 7.3, 1.0), (1, 2.0, -1.0), (2, 2.0, -1.0)])
    def test_values(self, n, x, expected):
        assert kummer_m(n, x) == pytest.approx(expected, abs=1e-15)

    def test_reference(self):
        assert kummer_m(3, 1.7) == pytest.approx(-0.58383333333333336, rel=1e-14)
        assert kummer_m(5, 12.25) == pytest.approx(18.904060872395833, rel=1e-12)

    def test_coefficients_exact(self):
        assert kummer_coefficients(2).tolist() == [1.0, -2.0, 0.5]
        assert kummer_coefficients(4)[4] == 1.0 / 24.0

    @pytest.mark.parametrize("n", range(7))
    def test_is_polynomial_of_degree_n(self, n):
        x = np.arange(n + 2, dtype=float)
        diff = np.diff(kummer_m(n, x), n + 1)
        scale = np.max(np.abs(kummer_m(n, x)))
        assert abs(diff[0]) <= 1e-12 * max(1.0, scale)
        if n > 0:
            assert abs(np.diff(kummer_m(n, x), n)[0]) > 0.5

    def test_negative_order_rejected(self):
        with pytest.raises(DomainError):
            kummer_m(-1, 1.0)


class TestAiry:
    def test_origin(self):
        ai, aip = airy(0.0)
        assert abs(ai - 0.3550280538878172) <= 1e-9
        assert abs(aip - -0.2588194037928068) <= 1e-9
        assert (AIRY_AI0, AIRY_AIP0) == (0.3550280538878172, -0.2588194037928068)

    def test_first_zero(self):
        assert abs(airy(-2.338107410459767)[0]) <= 1e-8

    @pytest.mark.parametrize("x", sorted(AIRY_REF))
    def test_reference(self, x):
        ai, aip = airy(x)
        assert abs(ai - AIRY_REF[x][0]) <= 1e-9
        assert abs(aip - AIRY_REF[x][1]) <= 1e-9

    def test_differential_equation(self):
        h = 1e-4
        for x in np.linspace(-3, 3, 25):
            second = (airy(x + h)[0] - 2 * airy(x)[0] + airy(x - h)[0]) / h**2
            assert abs(second - x * airy(x)[0]) <= 1e-6

    def test_prime_zero_via_find_root(self):
        z = find_root(lambda v: airy(v)[1], -1.5, -0.5)
        assert abs(z - -1.0187929716474711) <= 1e-10

    @pytest.mark.parametrize("x", [8.0001, -9.0, 100.0])
    def test_out_of_range(self, x):
        with pytest.raises(OutOfRangeError):
            airy(x)

    def test_non_finite(self):
        with pytest.raises(DomainError):
            airy(math.nan)


class TestFindRoot:
    def test_linear(self):
        assert find_root(lambda x: x - 1, 0.0, 2.0, tol=1e-12) == pytest.approx(1.0, abs=1e-12)

    def test_j0_zero(self):
        assert find_root(bessel_j0, 2.0, 3.0, tol=1e-12) == pytest.approx(2.404825557695773, abs=1e-11)

    def test_no_sign_change(self):
        with pytest.raises(BracketError):
            find_root(lambda x: x * x + 1, 0.0, 1.0)

    def test_endpoint_root(self):
        assert find_root(lambda x: x, 0.0, 1.0) == 0.0

    def test_deterministic(self):
        f = lambda x: math.cos(x) - x  # noqa: E731
        assert find_root(f, 0.0, 1.0) == find_root(f, 0.0, 1.0)

    def test_bad_tolerance(self):
        with pytest.raises(DomainError):
            find_root(lambda x: x, -1.0, 1.0, tol=0.0)


@settings(max_examples=60, deadline=None)
@given(st.floats(-50, 50, allow_nan=False))
def test_bessel_bounded(x):
    assert abs(bessel_j0(x)) <= 1.0 + 1e-12
    assert abs(bessel_j1(x)) <= 0.5820 + 1e-12

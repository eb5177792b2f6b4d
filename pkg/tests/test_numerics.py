import math

import mpmath
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from vbht.numerics import (
    check_probability,
    chi2_1_cdf,
    chi2_1_isf,
    chi2_1_quantile,
    chi2_1_sf,
    digamma,
    ln_gamma,
    std_normal_cdf,
    std_normal_pdf,
    std_normal_quantile,
)

mpmath.mp.dps = 40
EULER = 0.57721566490153286


@pytest.mark.parametrize(
    "x, expected",
    [(1.0, 0.0), (0.5, 0.5 * math.log(math.pi)), (5.0, math.log(24.0))],
)
def test_ln_gamma_examples(x, expected):
    assert ln_gamma(x) == pytest.approx(expected, abs=1e-12)


@pytest.mark.parametrize(
    "x, expected",
    [(1.0, -EULER), (2.0, 1.0 - EULER), (0.5, -EULER - 2.0 * math.log(2.0))],
)
def test_digamma_examples(x, expected):
    assert digamma(x) == pytest.approx(expected, abs=1e-12)


@pytest.mark.parametrize("fn", [ln_gamma, digamma])
@pytest.mark.parametrize("x", [0.0, -1.0, -0.5, float("nan"), float("inf")])
def test_gamma_family_domain(fn, x):
    with pytest.raises(ValueError):
        fn(x)


def test_digamma_against_mpmath():
    xs = np.logspace(-3, 9, 400)
    err = max(abs(digamma(float(x)) - float(mpmath.digamma(float(x)))) for x in xs)
    assert err <= 1e-12


def test_ln_gamma_against_mpmath():
    # 1e-12 absolute while lnGamma is small enough for that to be representable,
    # a few ulps relative beyond
    for x in np.logspace(-3, 9, 400):
        x = float(x)
        ref = float(mpmath.loggamma(x))
        got = ln_gamma(x)
        if abs(ref) < 500:
            assert abs(got - ref) <= 1e-12, x
        else:
            assert abs(got - ref) <= 4 * math.ulp(ref), x


def test_digamma_recurrence():
    for x in np.logspace(-1, 6, 300):
        x = float(x)
        assert abs(digamma(x + 1) - digamma(x) - 1.0 / x) <= 1e-10


def test_std_normal_cdf_examples():
    assert std_normal_cdf(0.0) == 0.5
    assert abs(std_normal_cdf(40.0) - 1.0) <= 1e-15
    assert std_normal_cdf(1.9599640) == pytest.approx(0.975, abs=1e-7)


def test_std_normal_cdf_against_mpmath():
    for x in np.linspace(-38, 10, 500):
        assert abs(std_normal_cdf(float(x)) - float(mpmath.ncdf(float(x)))) <= 1e-12


def test_std_normal_pdf():
    assert std_normal_pdf(0.0) == pytest.approx(1 / math.sqrt(2 * math.pi), rel=1e-15)


@pytest.mark.parametrize(
    "p, expected", [(0.5, 0.0), (0.975, 1.9599640), (0.999, 3.0902323)]
)
def test_std_normal_quantile_examples(p, expected):
    assert std_normal_quantile(p) == pytest.approx(expected, abs=1e-6)


@pytest.mark.parametrize("p", [0.0, 1.0, -0.1, 1.5, float("nan")])
def test_std_normal_quantile_domain(p):
    with pytest.raises(ValueError):
        std_normal_quantile(p)


@given(st.floats(min_value=1e-12, max_value=1 - 1e-12))
def test_quantile_round_trip(p):
    assert abs(std_normal_cdf(std_normal_quantile(p)) - p) <= 1e-9


@given(st.floats(-30, 30), st.floats(-30, 30))
def test_cdf_monotone(a, b):
    if a < b:
        assert std_normal_cdf(a) <= std_normal_cdf(b)


def test_cdf_strictly_increasing_on_grid():
    # above x ~ 7.5 consecutive values differ by less than one ulp of 1.0
    vals = [std_normal_cdf(float(x)) for x in np.linspace(-30, 7, 2001)]
    assert all(b > a for a, b in zip(vals, vals[1:]))


@pytest.mark.parametrize(
    "p, expected", [(0.0, 0.0), (0.95, 3.8414588), (0.99, 6.6348966)]
)
def test_chi2_quantile_examples(p, expected):
    assert chi2_1_quantile(p) == pytest.approx(expected, abs=1e-5)


@pytest.mark.parametrize("p", [1.0, -0.01, 2.0])
def test_chi2_quantile_domain(p):
    with pytest.raises(ValueError):
        chi2_1_quantile(p)


def test_chi2_quantile_strictly_increasing():
    ps = np.linspace(0.0, 0.999, 1000)
    qs = [chi2_1_quantile(float(p)) for p in ps]
    assert all(b > a for a, b in zip(qs, qs[1:]))


@given(st.floats(min_value=0.0, max_value=0.999999))
def test_chi2_round_trip(p):
    assert abs(chi2_1_cdf(chi2_1_quantile(p)) - p) <= 1e-9


@given(st.floats(min_value=1e-10, max_value=0.999))
def test_chi2_upper_tail_consistent(alpha):
    q = chi2_1_isf(alpha)
    assert chi2_1_sf(q) == pytest.approx(alpha, rel=1e-9)
    if alpha > 1e-6:
        assert q == pytest.approx(chi2_1_quantile(1 - alpha), rel=1e-6)


def test_check_probability():
    assert check_probability(0.0) == 0.0
    assert check_probability(1) == 1.0
    with pytest.raises(ValueError):
        check_probability(1.01)
    with pytest.raises(ValueError):
        check_probability(float("nan"))

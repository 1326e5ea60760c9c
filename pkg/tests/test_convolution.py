import math

import numpy as np
import pytest
from scipy import integrate

from charex.convolution import (
    Density,
    EqualityStatement,
    compare_densities,
    convolve_on_halfline,
    default_grid,
    lhs_density,
    lhs_pdf,
    lhs_support_upper,
    parse_statement,
    rhs_pdf,
    scaled_density,
    scaled_pdf,
)
from charex.distributions import Exponential, Gamma, HalfNormal, UniformPositive, Weibull


def hypoexponential_pdf(rates, x):
    """Closed-form density of a sum of independent exponentials with distinct rates."""
    total = 0.0
    for i, a in enumerate(rates):
        coef = 1.0
        for j, b in enumerate(rates):
            if j != i:
                coef *= b / (b - a)
        total += coef * a * math.exp(-a * x)
    return total


def exp_density(rate):
    return Density(lambda y: rate * np.exp(-rate * np.asarray(y, dtype=float)) * (np.asarray(y) > 0))


@pytest.mark.parametrize("x", [0.05, 0.5, 1.0, 2.0, 4.0])
def test_exponential_self_convolution(x):
    e = exp_density(1.0)
    assert convolve_on_halfline(e, e, x) == pytest.approx(x * math.exp(-x), abs=1e-12)


@pytest.mark.parametrize("x", [0.05, 0.5, 1.0, 2.0, 4.0])
def test_distinct_rate_convolution(x):
    got = convolve_on_halfline(exp_density(2.0), exp_density(3.0), x)
    assert got == pytest.approx(6 * (math.exp(-2 * x) - math.exp(-3 * x)), abs=1e-12)


def test_convolution_vanishes_at_origin():
    e = exp_density(1.0)
    assert convolve_on_halfline(e, e, 0.0) == 0.0
    assert convolve_on_halfline(e, e, -1.0) == 0.0
    assert convolve_on_halfline(e, e, 1e-8) < 1e-7


@pytest.mark.parametrize("d", [Exponential(2.0), Weibull(2.0, 1.0), UniformPositive(1.0)], ids=str)
@pytest.mark.parametrize("c", [0.5, 1.0, 3.0])
def test_scaled_density_integrates_to_one(d, c):
    upper = 50.0 / c
    pts = [b / c for b in d.breakpoints()]
    total, _ = integrate.quad(lambda y: scaled_pdf(d, c, y), 0, upper, points=pts or None, limit=200)
    assert total == pytest.approx(1.0, abs=1e-9)
    assert scaled_density(d, c).breakpoints == tuple(pts)


def test_uniform_t1_hand_computed():
    # U_(1;1) + U/2 at 0.75 has density 1; U_(2;2) has density 2x = 1.5
    d = UniformPositive(1.0)
    st = EqualityStatement("T1", 2, 2)
    assert lhs_pdf(st, d, 0.75) == pytest.approx(1.0, abs=1e-12)
    assert rhs_pdf(st, d, 0.75) == pytest.approx(1.5, abs=1e-15)


@pytest.mark.parametrize("rate", [0.5, 1.0, 2.0])
@pytest.mark.parametrize("k,n", [(1, 3), (2, 3), (3, 4), (4, 5)])
def test_t3_against_hypoexponential(rate, k, n):
    st = EqualityStatement("T3", k, n)
    rates = [rate * (n - i + 1) for i in range(1, k + 1)]
    xs = np.linspace(0.05, 4.0 / rate, 12)
    got = lhs_density(st, Exponential(rate), float(xs[-1]))(xs)
    want = np.array([hypoexponential_pdf(rates, x) for x in xs])
    np.testing.assert_allclose(got, want, atol=1e-10)


@pytest.mark.parametrize(
    "st,d",
    [
        (EqualityStatement("T1", 2, 3), Weibull(2.0, 1.0)),
        (EqualityStatement("T2", 2, 3), Gamma(2.0, 1.0)),
        (EqualityStatement("T3", 3, 3), HalfNormal(1.0)),
        (EqualityStatement("T1", 2, 2), UniformPositive(1.0)),
        (EqualityStatement("T3", 2, 3), UniformPositive(1.0)),
    ],
    ids=str,
)
def test_lhs_density_integrates_to_one(st, d):
    upper = lhs_support_upper(st, d, mass=1e-8)
    dens = lhs_density(st, d, upper, tol=1e-10)
    pts = [p for p in dens.breakpoints if 0 < p < upper]
    total, _ = integrate.quad(lambda x: dens(x), 0, upper, points=pts or None, limit=200, epsabs=1e-9)
    assert total == pytest.approx(1.0, abs=1e-5)


@pytest.mark.parametrize("rate", [0.5, 1.0, 2.0])
@pytest.mark.parametrize(
    "text", ["T1:k=2,n=2", "T1:k=3,n=5", "T2:k=2,n=4", "T2:k=4,n=4", "T3:k=1,n=2", "T3:k=3,n=5"]
)
def test_exponential_statements_hold(rate, text):
    d = Exponential(rate)
    res = compare_densities(parse_statement(text), d, default_grid(d))
    assert res.sup_deviation < 1e-6


@pytest.mark.parametrize(
    "text,d,floor",
    [
        ("T1:k=2,n=2", UniformPositive(1.0), 0.9),
        ("T1:k=2,n=2", Weibull(2.0, 1.0), 0.2),
        ("T3:k=2,n=2", Weibull(2.0, 1.0), 0.2),
        ("T3:k=3,n=3", Weibull(2.0, 1.0), 0.4),
        ("T2:k=2,n=3", Gamma(2.0, 1.0), 0.01),
        ("T3:k=2,n=2", HalfNormal(1.0), 0.01),
    ],
)
def test_alternatives_show_gap(text, d, floor):
    res = compare_densities(parse_statement(text), d, default_grid(d))
    assert res.sup_deviation > floor


def test_weibull_recorded_value():
    d = Weibull(2.0, 1.0)
    res = compare_densities(parse_statement("T1:k=2,n=2"), d, default_grid(d))
    assert res.sup_deviation == pytest.approx(0.2295, abs=5e-4)


def test_empty_grid():
    res = compare_densities(EqualityStatement("T1", 2, 2), Exponential(1.0), [])
    assert res.sup_deviation == 0.0
    assert res.to_dict()["argmax"] is None


def test_grid_validation():
    with pytest.raises(ValueError):
        compare_densities(EqualityStatement("T1", 2, 2), Exponential(1.0), [0.0, 1.0])
    with pytest.raises(ValueError):
        compare_densities(EqualityStatement("T1", 2, 2), Exponential(1.0), [2.0, 1.0])


def test_default_grid():
    g = default_grid(Exponential(2.0))
    assert len(g) == 100 and g[0] == 0.01 and g[-1] == pytest.approx(2.5)


@pytest.mark.parametrize(
    "text,want",
    [
        ("T1:k=2,n=3", EqualityStatement("T1", 2, 3)),
        (" t3 : k = 1 , n = 4 ", EqualityStatement("T3", 1, 4)),
    ],
)
def test_parse_statement(text, want):
    assert parse_statement(text) == want
    assert parse_statement(str(want)) == want


@pytest.mark.parametrize("text", ["T1:k=1,n=3", "T2:k=4,n=3", "T4:k=2,n=2", "T1 k=2 n=2", "T3:k=0,n=2"])
def test_parse_statement_errors(text):
    with pytest.raises(ValueError):
        parse_statement(text)


def test_weights():
    assert EqualityStatement("T1", 2, 4).weights() == (0.25,)
    assert EqualityStatement("T2", 2, 4).weights() == (1 / 3,)
    assert EqualityStatement("T3", 3, 4).weights() == (0.25, 1 / 3, 0.5)

import math

import numpy as np
import pytest

from charex.quadrature import QuadratureError, build_chebyshev, gauss_kronrod


@pytest.mark.parametrize("degree", range(0, 23))
def test_kronrod_exact_for_polynomials(degree):
    res = gauss_kronrod(lambda x: x**degree, 0.0, 1.0, tol=1e-13)
    assert res.value == pytest.approx(1.0 / (degree + 1), abs=1e-14)


def test_smooth_integrals():
    assert gauss_kronrod(np.exp, 0.0, 1.0).value == pytest.approx(math.e - 1, abs=1e-13)
    assert gauss_kronrod(np.sin, 0.0, math.pi).value == pytest.approx(2.0, abs=1e-13)
    assert gauss_kronrod(lambda x: 1 / (1 + x * x), -50, 50, tol=1e-11).value == pytest.approx(
        2 * math.atan(50), abs=1e-10
    )


def test_jump_with_and_without_breakpoint():
    step = lambda x: np.where(x < 0.3, 1.0, 0.0)
    assert gauss_kronrod(step, 0, 1, breakpoints=[0.3]).value == pytest.approx(0.3, abs=1e-14)
    assert gauss_kronrod(step, 0, 1, tol=1e-8).value == pytest.approx(0.3, abs=1e-8)


def test_empty_interval():
    assert gauss_kronrod(np.exp, 1.0, 1.0).value == 0.0


def test_non_convergence_reported():
    wild = lambda x: np.sin(1.0 / np.maximum(x, 1e-300))
    with pytest.raises(QuadratureError):
        gauss_kronrod(wild, 0.0, 1.0, tol=1e-14, max_depth=6)


def test_non_finite_reported():
    with np.errstate(all="ignore"), pytest.raises(QuadratureError):
        gauss_kronrod(lambda x: 1.0 / (x - 0.5) ** 2 * np.inf, 0.0, 1.0)


def test_chebyshev_interpolant_accuracy():
    f = lambda x: np.exp(-3 * x) * np.cos(2 * x)
    interp = build_chebyshev(f, 0.0, 6.0, 1e-12)
    xs = np.linspace(0, 6, 1001)
    np.testing.assert_allclose(interp(xs[1:]), f(xs[1:]), atol=1e-11)
    # closed at the lower edge: convolved densities vanish at the origin
    assert interp(0.0) == 0.0 and interp(-1.0) == 0.0
    with pytest.raises(ValueError):
        interp(6.5)


def test_chebyshev_respects_kinks():
    f = lambda x: np.abs(x - 1.0)
    interp = build_chebyshev(f, 0.0, 3.0, 1e-12, breakpoints=[1.0])
    xs = np.linspace(0.0, 3.0, 301)
    np.testing.assert_allclose(interp(xs[1:]), f(xs[1:]), atol=1e-11)
    assert len(interp.edges) == 3

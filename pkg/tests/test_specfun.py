import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import special

from pdmosc import specfun
from pdmosc.errors import DomainError


def test_pochhammer_small_cases():
    assert specfun.pochhammer(3.5, 0) == 1.0
    assert specfun.pochhammer(1.0, 5) == 120.0
    assert specfun.pochhammer(0.5, 3) == pytest.approx(0.5 * 1.5 * 2.5, rel=1e-15)


def test_kummer_n_zero_is_one():
    z = np.linspace(0, 30, 7)
    np.testing.assert_array_equal(specfun.kummer_terminating(0, 1.7, z), np.ones_like(z))


@pytest.mark.parametrize("n", [0, 1, 2, 5, 9, 15, 20])
@pytest.mark.parametrize("b", [0.5, 1.618, 2.118, 6.0])
def test_kummer_matches_high_precision(n, b):
    z = np.linspace(0, 20, 41)
    ref = np.array([float(mpmath.hyp1f1(-n, b, zz, zeroprec=400)) for zz in z])
    got = specfun.kummer_terminating(n, b, z)
    np.testing.assert_allclose(got, ref, rtol=1e-15, atol=0)


def test_kummer_small_closed_forms():
    assert specfun.kummer_terminating(1, 2.0, 2.0) == 0.0
    # 1 - 2/(3/2) + 2/((3/2)(5/2) 2) = -1/15
    assert specfun.kummer_terminating(2, 1.5, 1.0) == pytest.approx(-1 / 15, rel=1e-15)
    assert float(mpmath.hyp1f1(-2, 1.5, 1)) == pytest.approx(-1 / 15, rel=1e-15)


@settings(max_examples=40, deadline=None)
@given(n=st.integers(0, 30), b=st.floats(0.01, 10.0), z=st.floats(0.0, 60.0))
def test_kummer_correctly_rounded_under_cancellation(n, b, z):
    ref = mpmath.hyp1f1(-n, b, z, zeroprec=400)
    got = specfun.kummer_terminating(n, b, z)
    assert abs(got - float(ref)) <= 4e-16 * abs(float(ref)) + 1e-300


def test_kummer_rejects_nonpositive_integer_b():
    with pytest.raises(DomainError):
        specfun.kummer_terminating(3, -2.0, 1.0)
    with pytest.raises(ValueError):
        specfun.kummer_terminating(-1, 1.0, 1.0)


@pytest.mark.parametrize("n", [0, 1, 4, 12, 20])
@pytest.mark.parametrize("alpha", [-0.5 + 1e-3, 0.618, 1.118, 5.0])
def test_laguerre_matches_scipy(n, alpha):
    z = np.linspace(0, 50, 101)
    ref = special.eval_genlaguerre(n, alpha, z)
    got = specfun.assoc_laguerre(n, alpha, z)
    np.testing.assert_allclose(got, ref, rtol=1e-10, atol=1e-10 * np.max(np.abs(ref)))


@settings(max_examples=60, deadline=None)
@given(n=st.integers(0, 20), alpha=st.floats(-0.499, 6.0), z=st.floats(0.0, 50.0))
def test_kummer_laguerre_identity_property(n, alpha, z):
    # L_n^alpha(z) = binom(n + alpha, n) 1F1(-n; alpha + 1; z)
    lhs = specfun.assoc_laguerre(n, alpha, z)
    rhs = specfun.pochhammer(alpha + 1, n) / math.factorial(n) * specfun.kummer_terminating(
        n, alpha + 1, z)
    # judged against the size of L_n on [0, 50]; pointwise relative error is
    # meaningless at the roots
    grid = np.linspace(0.0, 50.0, 201)
    scale = max(1.0, np.max(np.abs(specfun.assoc_laguerre(n, alpha, grid))))
    assert abs(lhs - rhs) <= 1e-12 * scale


@pytest.mark.parametrize("order", [1, 2, 5, 16, 40])
def test_gauss_legendre_matches_numpy(order):
    rule = specfun.gauss_legendre(order)
    x, w = np.polynomial.legendre.leggauss(order)
    np.testing.assert_allclose(rule.nodes, x, atol=1e-14)
    np.testing.assert_allclose(rule.weights, w, atol=1e-14)


@pytest.mark.parametrize("order", [2, 5, 10, 20])
def test_gauss_legendre_monomial_exactness(order):
    rule = specfun.gauss_legendre(order)
    for k in range(2 * order):
        exact = 0.0 if k % 2 else 2.0 / (k + 1)
        assert abs(rule.integrate(lambda x: x**k) - exact) < 1e-12


def test_gauss_legendre_rule_is_symmetric_and_read_only():
    rule = specfun.gauss_legendre(7)
    np.testing.assert_array_equal(rule.nodes, -rule.nodes[::-1])
    assert rule.weights.sum() == pytest.approx(2.0, abs=1e-14)
    with pytest.raises(ValueError):
        rule.nodes[0] = 0.0


def test_mapped_rule_on_interval():
    rule = specfun.gauss_legendre(6)
    assert rule.integrate(lambda x: x**3, 1.0, 3.0) == pytest.approx(20.0, rel=1e-14)


def test_adaptive_integral_of_nonanalytic_endpoint():
    # int_0^1 sqrt(x) dx = 2/3; the endpoint singularity forces bisection
    got = specfun.integrate(lambda x: np.sqrt(x), 0.0, 1.0, rtol=1e-13)
    assert got == pytest.approx(2.0 / 3.0, abs=1e-12)


def test_adaptive_integral_gaussian():
    got = specfun.integrate(lambda x: np.exp(-x * x), -8.0, 8.0)
    assert got == pytest.approx(math.sqrt(math.pi), rel=1e-13)


def test_panel_integrals_complex_values():
    edges = np.linspace(0, math.pi, 5)
    got = specfun.panel_integrals(lambda t: np.exp(1j * t), edges).sum()
    assert abs(got - 2j) < 1e-13

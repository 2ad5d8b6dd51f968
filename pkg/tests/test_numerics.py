import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import special

from fewbody.numerics import (
    Bracket, DomainError, NoSignChangeError, NumericsError, PoleError, find_root, gauss_hermite,
    gauss_legendre, generalized_eig_lowest, ho_eigenfunction, ho_eigenfunctions, kummer_1f1,
    laguerre_general, log_gamma, symmetric_eig,
)


def test_log_gamma_known_values():
    sp = math.sqrt(math.pi)
    assert log_gamma(0.5) == pytest.approx((math.log(sp), 1), rel=1e-14)
    val, sgn = log_gamma(-0.5)
    assert sgn == -1 and val == pytest.approx(math.log(2 * sp), rel=1e-14)
    assert log_gamma(2.5)[0] == pytest.approx(math.log(3 * sp / 4), rel=1e-14)


@pytest.mark.parametrize("x", [0.0, -1.0, -7.0])
def test_log_gamma_poles(x):
    with pytest.raises(PoleError):
        log_gamma(x)


@given(st.floats(-20, 20).filter(lambda x: abs(x - round(x)) > 1e-6 or x > 0.5))
def test_log_gamma_matches_mpmath(x):
    val, sgn = log_gamma(x)
    ref = mpmath.gamma(x)
    assert sgn == (1 if ref > 0 else -1)
    assert val == pytest.approx(float(mpmath.log(abs(ref))), abs=1e-12, rel=1e-12)


def test_kummer_special_cases():
    assert kummer_1f1(0.3, 0.5, 0.0) == 1.0
    assert kummer_1f1(1.7, 1.7, 1.0) == pytest.approx(math.e, rel=1e-14)
    assert kummer_1f1(-1.0, 0.5, 0.25) == pytest.approx(0.5, rel=1e-14)


@settings(max_examples=60)
@given(st.floats(-6, 4), st.sampled_from([0.5, 1.5, 2.5]), st.floats(-49, 49))
def test_kummer_matches_mpmath(a, b, x):
    ref = float(mpmath.hyp1f1(a, b, x))
    scale = max(abs(ref), float(mpmath.hyp1f1(abs(a), b, abs(x))) * 1e-12, 1e-300)
    assert abs(kummer_1f1(a, b, x) - ref) <= 1e-10 * scale


def test_kummer_domain():
    with pytest.raises(DomainError):
        kummer_1f1(0.1, 0.5, 60.0)
    with pytest.raises(NumericsError):
        kummer_1f1(0.1, -1.0, 1.0)


def test_ho_eigenfunction_values():
    assert ho_eigenfunction(0, 0.0) == pytest.approx(math.pi ** -0.25, rel=1e-15)
    assert ho_eigenfunction(1, 0.0) == 0.0
    rule = gauss_hermite(40)
    f = ho_eigenfunction(2, rule.nodes) ** 2 * np.exp(rule.nodes ** 2)
    assert rule.integrate(f) == pytest.approx(1.0, abs=1e-12)


def test_ho_orthonormality():
    rule = gauss_hermite(80)
    psi = ho_eigenfunctions(20, rule.nodes) * np.exp(rule.nodes ** 2 / 2)
    gram = (psi * rule.weights) @ psi.T
    assert np.max(np.abs(gram - np.eye(21))) < 1e-10


@given(st.integers(0, 30), st.floats(-6, 6))
def test_ho_eigenfunction_matches_hermite(n, x):
    ref = special.eval_hermite(n, x) * math.exp(-x * x / 2) / math.sqrt(2.0 ** n * math.factorial(n) * math.sqrt(math.pi))
    assert ho_eigenfunction(n, x) == pytest.approx(ref, rel=1e-9, abs=1e-12)


def test_ho_eigenfunction_bound():
    with pytest.raises(NumericsError):
        ho_eigenfunction(61, 0.1)


def test_laguerre_examples():
    assert laguerre_general(0, 2.3, 1.1) == 1.0
    assert laguerre_general(1, 3.0, 2.0) == pytest.approx(2.0)
    assert laguerre_general(2, 0.0, 1.0) == pytest.approx(-0.5)


@given(st.integers(0, 12), st.floats(-0.9, 10), st.floats(0, 30))
def test_laguerre_matches_scipy(nu, mu, x):
    ref = special.eval_genlaguerre(nu, mu, x)
    assert laguerre_general(nu, mu, x) == pytest.approx(ref, rel=1e-9, abs=1e-9 * (1 + abs(ref)))


def test_gauss_hermite_exactness():
    n = 12
    rule = gauss_hermite(n)
    assert np.all(np.diff(rule.nodes) > 0)
    for k in range(n):
        exact = math.gamma(k + 0.5)
        assert rule.integrate(rule.nodes ** (2 * k)) == pytest.approx(exact, rel=1e-12)


def test_gauss_legendre_interval():
    rule = gauss_legendre(20, 0.0, 2.0)
    assert rule.integrate(rule.nodes ** 5) == pytest.approx(64 / 6, rel=1e-14)


def test_find_root_examples():
    assert find_root(lambda x: x * x - 2, Bracket(1, 2), 1e-12) == pytest.approx(math.sqrt(2), abs=1e-12)
    assert find_root(lambda m: math.cos(m * math.pi / 2), Bracket(0.5, 1.5)) == pytest.approx(1.0, abs=1e-12)

    def busch(e):
        return special.rgamma((3 - 2 * e) / 4) / special.rgamma((1 - 2 * e) / 4)
    assert find_root(busch, Bracket(1.1, 1.9)) == pytest.approx(1.5, abs=1e-12)


def test_find_root_errors_and_determinism():
    with pytest.raises(NoSignChangeError):
        find_root(lambda x: x * x + 1, Bracket(-1, 1))
    with pytest.raises(ValueError):
        Bracket(1.0, 0.0)
    f = lambda x: math.sin(x) - 0.3  # noqa: E731
    assert find_root(f, Bracket(0, 1)) == find_root(f, Bracket(0, 1))


def test_symmetric_eig_examples():
    w, _ = symmetric_eig(np.eye(3))
    assert np.allclose(w, 1)
    a = math.sqrt(2 / math.pi)
    w, v = symmetric_eig(np.array([[a, -a], [-a, a]]))
    assert w == pytest.approx([0, 2 * a], abs=1e-15)
    u = np.array([0.3, -0.2, 0.5, 0.1])
    w, _ = symmetric_eig(4 * np.outer(u, u))
    assert w[-1] == pytest.approx(4 * u @ u, rel=1e-14)
    assert np.allclose(w[:-1], 0, atol=1e-14)
    with pytest.raises(NumericsError):
        symmetric_eig(np.array([[1.0, 2.0], [0.0, 1.0]]))


@settings(max_examples=30)
@given(st.integers(2, 8), st.integers(0, 2 ** 31))
def test_symmetric_eig_residual(n, seed):
    rng = np.random.default_rng(seed)
    m = rng.normal(size=(n, n))
    m = m + m.T
    w, v = symmetric_eig(m)
    assert np.all(np.diff(w) >= 0)
    assert np.linalg.norm(m @ v - v * w) <= 1e-10 * np.linalg.norm(m)
    assert np.allclose(v.T @ v, np.eye(n), atol=1e-12)


def test_generalized_eig_lowest_examples():
    e, v = generalized_eig_lowest(np.diag([1.0, 2.0]), np.diag([1.0, 4.0]))
    assert e == pytest.approx(0.5)
    assert np.allclose(np.abs(v), [0, 0.5])
    h = np.array([[2.0, 1.0], [1.0, 3.0]])
    e, _ = generalized_eig_lowest(h, np.eye(2))
    assert e == pytest.approx(symmetric_eig(h)[0][0], rel=1e-14)
    with pytest.raises(NumericsError):
        generalized_eig_lowest(h, np.array([[1.0, 1.0], [1.0, 1.0]]))

import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate, special

from fewbody import impurity, three_body
from fewbody.impurity import (
    ImpuritySystem, UnsupportedSystemError, anderson_overlap_curve, e0, einf, exact_strong_slope,
    ground_energy, limit_pair, optimal_overlap, overlap_for, partial_overlaps, slater_ground,
    slope_matrix, v00_closed_form, v00_quadrature,
)
from fewbody.two_body import busch_slope


def phi(n, x):
    return special.eval_hermite(n, x) * np.exp(-x * x / 2) / math.sqrt(2.0 ** n * math.factorial(n) * math.sqrt(math.pi))


def slater_det(x):
    n = len(x)
    mat = np.array([[phi(k, xi) for k in range(n)] for xi in x])
    return np.linalg.det(mat) / math.sqrt(math.factorial(n))


@settings(max_examples=40)
@given(st.lists(st.floats(-3, 3), min_size=1, max_size=5))
def test_slater_ground_is_hermite_determinant(x):
    assert abs(slater_ground(x)) == pytest.approx(abs(slater_det(x)), rel=1e-9, abs=1e-13)


def test_slater_ground_antisymmetric_and_sign():
    x = [-0.4, 0.3, 1.1]
    assert slater_ground([x[1], x[0], x[2]]) == pytest.approx(-slater_ground(x))
    assert slater_ground(x) > 0


def brute_v00(n, nodes=30):
    """(N-1) int |Psi0|^2 at x_imp = x_maj, tensor Gauss-Hermite over the rest.

    The coincidence coordinate carries e^{-2x^2}, so its rule is rescaled by
    1/sqrt2 to leave a polynomial integrand.
    """
    t, w = np.polynomial.hermite.hermgauss(nodes)
    tot = 0.0
    for idx in itertools.product(range(nodes), repeat=n - 1):
        xs = t[list(idx)].copy()
        xs[0] /= math.sqrt(2)
        wt = np.prod(w[list(idx)]) / math.sqrt(2)
        dens = phi(0, xs[0]) ** 2 * slater_det(xs) ** 2
        tot += wt * dens * math.exp(2 * xs[0] ** 2 + float(xs[1:] @ xs[1:]))
    return (n - 1) * tot


@pytest.mark.parametrize("n", [2, 3, 4])
def test_v00_against_brute_force(n):
    ref = brute_v00(n, 12)
    assert v00_closed_form(n) == pytest.approx(ref, rel=1e-10)


@pytest.mark.parametrize("n", [2, 3, 4, 5, 6])
def test_v00_closed_form_vs_quadrature(n):
    assert v00_quadrature(n) == pytest.approx(v00_closed_form(n), rel=1e-11)


def test_v00_known_values():
    assert v00_closed_form(2) == pytest.approx(1 / math.sqrt(2 * math.pi), rel=1e-15)
    assert v00_closed_form(3) == pytest.approx(3 / (2 * math.sqrt(2 * math.pi)), rel=1e-14)


def test_limit_energies():
    assert [e0(n) for n in (2, 3, 4)] == [1.0, 2.5, 5.0]
    assert [einf(n) for n in (2, 3, 4)] == [2.0, 4.5, 8.0]


def test_partial_overlaps_two_particles():
    # impurity left of the majority particle: int_{x1<x2} phi0 phi0 * det[phi0,phi1]/sqrt2
    f = lambda x2, x1: phi(0, x1) * phi(0, x2) * (phi(0, x1) * phi(1, x2) - phi(1, x1) * phi(0, x2)) / math.sqrt(2)  # noqa: E731
    left = integrate.dblquad(f, -9, 9, lambda x1: x1, lambda x1: 9, epsabs=1e-13)[0]
    v = partial_overlaps(2).values
    assert abs(v[0]) == pytest.approx(abs(left), rel=1e-9)
    assert v[0] == pytest.approx(-v[1], rel=1e-12)


@pytest.mark.parametrize("n", [2, 3])
def test_overlap_matches_relative_problem(n):
    pair = limit_pair(n)
    ref = math.sqrt(2 / math.pi) if n == 2 else three_body.curve_limit_pairs(0, -1, 1.0, 0)[0].overlap
    assert abs(pair.overlap) == pytest.approx(abs(ref), rel=1e-10)


def test_strong_slope_matches_few_body():
    assert exact_strong_slope(2)[0] == pytest.approx(busch_slope(0), rel=1e-10)
    rep, _, _ = three_body.curve_limit_pairs(0, -1, 1.0, 0)
    assert exact_strong_slope(3)[0] == pytest.approx(rep.k_exact_inf, rel=1e-10)


@pytest.mark.parametrize("n", [2, 3, 4, 5, 6])
def test_slope_matrix_structure(n):
    sm = slope_matrix(n)
    assert np.allclose(sm.matrix.sum(axis=1), 0, atol=1e-12)
    assert np.all(sm.alphas > 0)
    assert np.all(np.linalg.eigvalsh(sm.matrix) > -1e-12)
    k, a = exact_strong_slope(n)
    assert a[0] > 0
    assert np.allclose(a, a[::-1]) or np.allclose(a, -a[::-1])


@pytest.mark.parametrize("n", [3, 4, 5, 6])
def test_overlap_bounds(n):
    best, amax = optimal_overlap(n)
    assert 0 < best <= 1 + 1e-12
    assert overlap_for(n, amax) ** 2 == pytest.approx(best, rel=1e-12)
    assert overlap_for(n, exact_strong_slope(n)[1]) ** 2 <= best + 1e-12


@pytest.mark.parametrize("q", [-5.0, -1.0, -0.3, -0.05])
@pytest.mark.parametrize("method", ["ansatz", "modified"])
def test_three_particles_match_three_body(q, method):
    e_imp = ground_energy(3, -1 / q, method).energy
    e_tb = three_body.ground_energy(q, 1.0, method == "modified")
    assert e_imp == pytest.approx(e_tb + 0.5, abs=1e-10)


@settings(max_examples=30)
@given(st.integers(2, 6), st.floats(0, 50), st.floats(1e-3, 5))
def test_ground_energy_monotone_and_bounded(n, g, dg):
    e1 = ground_energy(n, g).energy
    e2 = ground_energy(n, g + dg).energy
    assert e0(n) - 1e-12 <= e1 <= e2 + 1e-12 <= einf(n) + 2e-12


def test_errors():
    with pytest.raises(UnsupportedSystemError):
        ground_energy(3, -1.0)
    with pytest.raises(UnsupportedSystemError):
        ImpuritySystem(7)
    with pytest.raises(ValueError):
        ground_energy(3, 1.0, "exact")
    assert ImpuritySystem(4).n_up == 3


def test_anderson_curve():
    rows = anderson_overlap_curve(4, [0.0, 1.0, 10.0, 1e6])
    vals = [a for _, a in rows]
    assert vals[0] == 1.0
    assert all(0 <= a <= 1 for a in vals)
    assert vals[-1] == pytest.approx(limit_pair(4).overlap ** 2, abs=1e-4)
    with pytest.raises(UnsupportedSystemError):
        anderson_overlap_curve(3, [-1.0])


def test_a_max_option():
    e1 = ground_energy(4, 2.0, use_a_max=True).energy
    e2 = ground_energy(4, 2.0).energy
    assert abs(e1 - e2) < 0.05
    assert impurity.limit_pair(4, True).overlap ** 2 == pytest.approx(optimal_overlap(4)[0])

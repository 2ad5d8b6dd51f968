import itertools
import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import special

from fewbody import exact_diag
from fewbody.exact_diag import (
    DimensionOverflowError, FockBasisState, ModelSpace, assemble_hamiltonian, build_basis,
    busch_spectrum, cm_excitation, effective_interaction, effective_two_body, fermi_floor,
    intrinsic_ground_energy, lab_interaction, lowest_states, recoupling_bracket, spectrum, track_state,
)
from fewbody.two_body import busch_energy


def phi(n, x):
    return special.eval_hermite(n, x) * np.exp(-x * x / 2) / math.sqrt(2.0 ** n * math.factorial(n) * math.sqrt(math.pi))


@pytest.mark.parametrize("g", [-3.0, -0.5, 0.7, 4.0, math.inf])
def test_effective_two_body_reproduces_busch(g):
    n = 24
    h = effective_two_body(n, g)
    even = np.arange(0, n + 1, 2)
    w = np.linalg.eigvalsh(h[np.ix_(even, even)])
    assert w == pytest.approx(busch_spectrum(g, len(even)), abs=1e-10)
    odd = np.arange(1, n + 1, 2)
    assert np.allclose(h[np.ix_(odd, odd)], np.diag(odd + 0.5))
    assert np.allclose(h, h.T)


def test_effective_interaction_vanishes_at_zero():
    assert np.allclose(effective_interaction(10, 0.0), 0)
    with pytest.raises(ValueError):
        effective_two_body(61, 1.0)


def test_busch_spectrum_ordering():
    s = busch_spectrum(-2.0, 4)
    assert s[0] < 0.5 and np.all(np.diff(s) > 0)
    assert busch_spectrum(0.0, 3) == pytest.approx([0.5, 2.5, 4.5])
    assert busch_spectrum(math.inf, 2) == pytest.approx([1.5, 3.5])


@pytest.mark.parametrize("e", [-30.0, -2.0, 0.3, 1.2, 1.9, 3.1])
def test_dG_dE_against_mpmath(e):
    def big_g(x):
        a = (1 - 2 * x) / 4
        return mpmath.gamma(a) * mpmath.rgamma(a + 0.5) / 2
    ref = float(mpmath.diff(big_g, mpmath.mpf(e)))
    assert exact_diag._dG_dE(e) == pytest.approx(ref, rel=1e-9)


def test_recoupling_against_quadrature():
    t, w = np.polynomial.hermite.hermgauss(40)
    x1, x2 = np.meshgrid(t, t, indexing="ij")
    wt = np.outer(w, w) * np.exp(x1 ** 2 + x2 ** 2)
    big, rel = (x1 + x2) / math.sqrt(2), (x1 - x2) / math.sqrt(2)
    for a, b in [(0, 0), (1, 0), (2, 1), (3, 3), (4, 1)]:
        for n_cm in range(a + b + 1):
            n = a + b - n_cm
            ref = np.sum(wt * phi(a, x1) * phi(b, x2) * phi(n_cm, big) * phi(n, rel))
            assert recoupling_bracket(n_cm, n, a, b) == pytest.approx(ref, abs=1e-12)
    assert recoupling_bracket(1, 1, 0, 0) == 0.0


@given(st.integers(0, 12))
def test_recoupling_orthogonal(q):
    pairs = [(a, q - a) for a in range(q + 1)]
    mat = np.array([[recoupling_bracket(n_cm, q - n_cm, a, b) for n_cm in range(q + 1)] for a, b in pairs])
    assert np.allclose(mat @ mat.T, np.eye(q + 1), atol=1e-12)


def test_lab_interaction_symmetric():
    table = lab_interaction(8, 40, 1.5)
    for (c, d), entries in table.items():
        for a, b, v in entries:
            back = {(x, y): u for x, y, u in table[(a, b)]}
            assert back[(c, d)] == pytest.approx(v, abs=1e-13)


def test_fock_state_validation():
    with pytest.raises(ValueError):
        FockBasisState((0, 1), (0,))
    s = FockBasisState((2, 0), (1,))
    assert s.quanta == 3 and s.energy() == 4.5
    assert fermi_floor(3) == 3


@pytest.mark.parametrize("n_a,n_b,e_max", [(1, 1, 6), (2, 1, 7), (2, 2, 8), (3, 1, 9)])
def test_basis_counts_by_enumeration(n_a, n_b, e_max):
    count = 0
    for u in itertools.combinations(range(e_max + 1), n_a):
        for d in itertools.combinations(range(e_max + 1), n_b):
            if sum(u) + sum(d) <= e_max:
                count += 1
    assert len(build_basis(n_a, n_b, e_max)) == count
    even = build_basis(n_a, n_b, e_max, 1)
    assert all(s.quanta % 2 == 0 for s in even)
    assert len(even) + len(build_basis(n_a, n_b, e_max, -1)) == count


def test_dimension_guard(monkeypatch):
    monkeypatch.setattr(exact_diag, "MAX_DIM", 10)
    with pytest.raises(DimensionOverflowError):
        build_basis(2, 2, 8)


def test_non_interacting_spectrum():
    ms = ModelSpace(20, 6, 0.0)
    basis = build_basis(2, 1, fermi_floor(2) + 6)
    h = assemble_hamiltonian(basis, 0.0, ms).toarray()
    assert np.allclose(h, np.diag([s.energy() for s in basis]))


@pytest.mark.parametrize("g", [-1.0, 0.5, 3.0, math.inf])
def test_two_particles_match_busch(g):
    ms = ModelSpace(40, 20, 50.0)
    e = intrinsic_ground_energy(1, 1, g, ms)
    q = 0.0 if math.isinf(g) else -1 / g
    ref = busch_energy(q, 0, deep=g < 0) + 0.5
    assert e == pytest.approx(ref, abs=1e-10)


def test_lawson_removes_cm_excitations():
    ms = ModelSpace(40, 12, 50.0)
    w, v, basis = spectrum(2, 1, 2.0, 3, ms, parity=-1)
    assert cm_excitation(basis, v[:, 0]) < 1e-10
    # without the Lawson term the first excited state at g = 0 is a CM excitation
    w0, v0, b0 = spectrum(2, 1, 0.0, 3, ModelSpace(40, 6, 0.0), parity=1)
    assert w0[0] == pytest.approx(3.5)
    assert max(cm_excitation(b0, v0[:, i]) for i in range(3)) > 0.5


def test_equal_mass_three_body_convergence():
    vals = [intrinsic_ground_energy(2, 1, 3.0, ModelSpace(40, em, 50.0)) - 0.5 for em in (12, 16, 20)]
    assert vals[0] > vals[1] > vals[2]
    assert vals[2] == pytest.approx(3.0533, abs=5e-4)


def test_lanczos_path_matches_dense(monkeypatch):
    ms = ModelSpace(40, 8, 50.0)
    basis = build_basis(2, 2, fermi_floor(2) * 2 + 8, parity=1)
    h = assemble_hamiltonian(basis, 1.0, ms)
    dense, _ = lowest_states(h, 3)
    monkeypatch.setattr(exact_diag, "DENSE_LIMIT", 10)
    lanczos, vec = lowest_states(h, 3)
    assert lanczos == pytest.approx(dense, abs=1e-8)
    assert np.linalg.norm(h @ vec - vec * lanczos) < 1e-6


def test_track_state_two_particles():
    ms = ModelSpace(40, 12, 50.0)
    qs = [-0.5, -0.1, 0.0, 0.2, 0.5]
    got = track_state(1, 1, qs, 2.0, ms, parity=1)
    ref = [busch_energy(q, 0) + 0.5 for q in qs]
    assert got == pytest.approx(ref, abs=1e-8)


def test_model_space_validation():
    with pytest.raises(ValueError):
        ModelSpace(lawson_weight=-1)
    with pytest.raises(ValueError):
        ModelSpace(-1, 4)

"""Stochastic variational method with shifted correlated Gaussians for 2+1.

Particle 1 is the impurity (mass M), particles 2 and 3 identical fermions of
mass 1.  Units: hbar = omega = 1, lengths in the majority oscillator length.
The relative motion lives in the two mass-weighted Jacobi coordinates u, where

    H_rel = 1/2 p.p + 1/2 u.u + g * sum_pairs delta(x_i - x_j),

so the g = 0 ground of the odd-parity fermionic sector is E_rel = 2.

Basis functions phi(u) = exp(-(u - s)^T A (u - s)) are projected onto
P23-odd and spatial parity p by summing the ket over the four group images.
All integrals are Gaussian closed forms in d = 2.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
from scipy.optimize import brentq

COND_MAX = 1e12
EPS_A = 1e-3
WIDTH_RANGE = (0.05, 2e5)
FERMION_WIDTH_MAX = 5.0
SHIFT_SCALE = 0.5


class SvmError(ValueError):
    pass


@dataclass(frozen=True)
class GaussianElement:
    A: np.ndarray
    s: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.A, dtype=float)
        if a.shape != (2, 2) or not np.allclose(a, a.T, atol=1e-14):
            raise SvmError("A must be a symmetric 2x2 matrix")
        if np.linalg.eigvalsh(a)[0] <= 0:
            raise SvmError("A must be positive definite")
        object.__setattr__(self, "A", a)
        object.__setattr__(self, "s", np.asarray(self.s, dtype=float).reshape(2))


@dataclass(frozen=True)
class SvmConfig:
    alpha_trials: int = 500
    beta_growth_rounds: int = 500
    seed: int = 0
    basis_cap: int = 300
    start_size: int = 4

    def __post_init__(self):
        for name in ("alpha_trials", "beta_growth_rounds", "basis_cap", "start_size"):
            if getattr(self, name) <= 0:
                raise SvmError(f"{name} must be positive")
        if self.seed < 0:
            raise SvmError("seed must be non-negative")


@dataclass
class SvmResult:
    energy: float
    basis: list
    history: list = field(default_factory=list)


def jacobi_transform(masses) -> np.ndarray:
    """Rows: fermion-pair coordinate, impurity-vs-pair coordinate, centre of mass."""
    m1, m2, m3 = (float(m) for m in masses)
    if min(m1, m2, m3) <= 0:
        raise SvmError("masses must be positive")
    m23 = m2 + m3
    mtot = m1 + m2 + m3
    mu23 = math.sqrt(m2 * m3 / m23)
    mu = math.sqrt(m1 * m2 * m3 / mtot)
    j = np.array([
        [0.0, mu23, -mu23],
        [-mu / mu23, mu * m2 / (mu23 * m23), mu * m3 / (mu23 * m23)],
        [m1 / math.sqrt(mtot), m2 / math.sqrt(mtot), m3 / math.sqrt(mtot)],
    ])
    return j / math.sqrt(mu)


def _masses(mass_ratio: float):
    return (float(mass_ratio), 1.0, 1.0)


def relative_frame(masses) -> np.ndarray:
    """2x3 matrix D with x_i = sum_k D[k, i] u_k + (centre-of-mass part)."""
    m = np.asarray(masses, dtype=float)
    mu = math.sqrt(np.prod(m) / m.sum())
    r = math.sqrt(mu) * jacobi_transform(m) / np.sqrt(m)[None, :]
    return r[:2] / np.sqrt(m)[None, :]


def pair_vectors(masses, pairs=((0, 1), (0, 2))):
    """(unit normal, 1/|d|) per pair with x_i - x_j = d . u."""
    d = relative_frame(masses)
    out = []
    for i, j in pairs:
        vec = d[:, i] - d[:, j]
        norm = float(np.linalg.norm(vec))
        out.append((vec / norm, 1.0 / norm))
    return out


def symmetry_images(masses, parity: int = -1):
    """(orthogonal map on u, character) for {1, P23, Pi, P23 Pi}, fermionic in 2<->3."""
    m = np.asarray(masses, dtype=float)
    mu = math.sqrt(np.prod(m) / m.sum())
    r = math.sqrt(mu) * jacobi_transform(m) / np.sqrt(m)[None, :]
    perm = np.eye(3)[[0, 2, 1]]
    p23 = (r @ perm @ r.T)[:2, :2]
    eye = np.eye(2)
    return [(eye, 1.0), (p23, -1.0), (-eye, float(parity)), (-p23, -float(parity))]


def _raw_elements(a: GaussianElement, b: GaussianElement, pair_data):
    """(S, T, Vtrap, [delta_k]) between unprojected Gaussians."""
    A, B = a.A, b.A
    C = A + B
    v = 2.0 * (A @ a.s + B @ b.s)
    k = a.s @ A @ a.s + b.s @ B @ b.s
    try:
        cf = scipy.linalg.cho_factor(C)
    except np.linalg.LinAlgError as exc:
        raise SvmError("A + A' is not positive definite") from exc
    cinv = scipy.linalg.cho_solve(cf, np.eye(2))
    u0 = 0.5 * cinv @ v
    det = float(np.prod(np.diag(cf[0]))) ** 2
    ov = math.pi / math.sqrt(det) * math.exp(0.5 * v @ u0 - k)
    sigma = 0.5 * cinv
    t = 2.0 * ov * (np.trace(A @ B @ sigma) + (u0 - a.s) @ A @ B @ (u0 - b.s))
    vtrap = 0.5 * ov * (np.trace(sigma) + u0 @ u0)
    deltas = []
    for n, _ in pair_data:
        var = n @ sigma @ n
        z = n @ u0
        deltas.append(ov * math.exp(-z * z / (2 * var)) / math.sqrt(2 * math.pi * var))
    return ov, t, vtrap, deltas


def pair_matrix_elements(a: GaussianElement, b: GaussianElement, g: float, masses):
    """(S, T, Vtrap, Vint) between two unprojected elements."""
    pdata = pair_vectors(masses)
    ov, t, vtrap, deltas = _raw_elements(a, b, pdata)
    vint = g * sum(w * d for (_, w), d in zip(pdata, deltas))
    return ov, t, vtrap, vint


def _image(el: GaussianElement, tmat: np.ndarray) -> GaussianElement:
    # phi(T u) = exp(-(u - T^T s)^T T^T A T (u - T^T s))
    return GaussianElement(tmat.T @ el.A @ tmat, tmat.T @ el.s)


def _batched(aa, sa, bb, sb, normals, weights, g):
    """Vectorised projected-free (S, H) for stacks of element pairs.

    aa, bb: (..., 2, 2); sa, sb: (..., 2).  Explicit 2x2 algebra.
    """
    c = aa + bb
    det = c[..., 0, 0] * c[..., 1, 1] - c[..., 0, 1] * c[..., 1, 0]
    cinv = np.stack([np.stack([c[..., 1, 1], -c[..., 0, 1]], -1),
                     np.stack([-c[..., 1, 0], c[..., 0, 0]], -1)], -2) / det[..., None, None]
    v = 2.0 * (np.einsum("...ij,...j->...i", aa, sa) + np.einsum("...ij,...j->...i", bb, sb))
    k = np.einsum("...i,...ij,...j->...", sa, aa, sa) + np.einsum("...i,...ij,...j->...", sb, bb, sb)
    u0 = 0.5 * np.einsum("...ij,...j->...i", cinv, v)
    ov = math.pi / np.sqrt(det) * np.exp(0.5 * np.einsum("...i,...i->...", v, u0) - k)
    sigma = 0.5 * cinv
    ab = aa @ bb
    t = 2.0 * (np.einsum("...ij,...ji->...", ab, sigma)
               + np.einsum("...i,...ij,...j->...", u0 - sa, ab, u0 - sb))
    vt = 0.5 * (sigma[..., 0, 0] + sigma[..., 1, 1] + np.einsum("...i,...i->...", u0, u0))
    vint = 0.0
    for n, w in zip(normals, weights):
        var = np.einsum("i,...ij,j->...", n, sigma, n)
        z = u0 @ n
        vint = vint + w * np.exp(-z * z / (2 * var)) / np.sqrt(2 * math.pi * var)
    return ov, ov * (t + vt + g * vint)


class _Problem:
    def __init__(self, g: float, masses, parity: int):
        self.g = g
        self.pdata = pair_vectors(masses)
        self.images = symmetry_images(masses, parity)
        self.normals = [n for n, _ in self.pdata]
        self.weights = [w for _, w in self.pdata]
        self.fermion_normal = pair_vectors(masses, ((1, 2),))[0][0]

    def image_stack(self, el: GaussianElement):
        ts = np.array([t for t, _ in self.images])
        amat = np.einsum("gji,jk,gkl->gil", ts, el.A, ts)
        svec = np.einsum("gji,j->gi", ts, el.s)
        return amat, svec

    def columns(self, a_stack, s_stack, el: GaussianElement):
        """Projected (S, H) of each stored element (stacks) against symmetrised el."""
        chi = np.array([c for _, c in self.images])
        ia, isv = self.image_stack(el)
        ov, hm = _batched(a_stack[:, None], s_stack[:, None], ia[None], isv[None],
                          self.normals, self.weights, self.g)
        return ov @ chi, hm @ chi

    def elements(self, a: GaussianElement, b: GaussianElement):
        """Projected (S, H) between a and the symmetrised b."""
        sc, hc = self.columns(a.A[None], a.s[None], b)
        return float(sc[0]), float(hc[0])


def random_element(rng: np.random.Generator, problem: "_Problem") -> GaussianElement:
    """A = sum over pairs of alpha_p n_p n_p^T + eps I, shift s from a Laplacian.

    Impurity-pair widths are log-uniform over a very wide range so that the
    contact cusps can be resolved; the fermion pair carries a node, not a
    cusp, and only needs moderate widths.
    """
    lo, hi = WIDTH_RANGE
    a = EPS_A * np.eye(2)
    for n in problem.normals:
        a = a + math.exp(rng.uniform(math.log(lo), math.log(hi))) * np.outer(n, n)
    a = a + math.exp(rng.uniform(math.log(lo), math.log(FERMION_WIDTH_MAX))) * np.outer(problem.fermion_normal, problem.fermion_normal)
    s = rng.laplace(0.0, SHIFT_SCALE, size=2)
    return GaussianElement(0.5 * (a + a.T), s)


def _lowest(h: np.ndarray, s: np.ndarray):
    w, v = scipy.linalg.eigh(h, s)
    return w, v


def _bordered_lowest(eps, coup, diag):
    """Lowest root of E - diag - sum coup^2/(E - eps) = 0 (arrowhead matrix)."""
    c2 = coup ** 2
    lo_bound = min(eps[0], diag) - math.sqrt(float(c2.sum())) - 1.0

    def f(e):
        with np.errstate(divide="ignore"):
            return e - diag - float(np.sum(c2 / (e - eps)))

    hi = eps[0]
    if c2[0] < 1e-300:
        return min(diag, eps[0]) if diag < eps[0] else eps[0]
    gap = 1e-12 * max(1.0, abs(hi))
    while f(hi - gap) < 0:
        gap *= 0.5
        if gap < 1e-300:
            return hi
    while f(lo_bound) > 0:
        lo_bound -= 2 * (hi - lo_bound)
    return brentq(f, lo_bound, hi - gap, xtol=1e-14, rtol=1e-14)


class _Basis:
    """Growing projected basis with its generalized eigen-solution."""

    def __init__(self, problem: _Problem):
        self.p = problem
        self.els: list = []
        self.h = np.zeros((0, 0))
        self.s = np.zeros((0, 0))
        self.w = np.zeros(0)
        self.v = np.zeros((0, 0))

    def column(self, el: GaussianElement):
        snn, hnn = self.p.elements(el, el)
        if not self.els:
            return np.zeros(0), np.zeros(0), snn, hnn
        sc, hc = self.p.columns(self._a, self._s, el)
        return sc / self._n, hc / self._n, snn, hnn

    def trial_energy(self, el: GaussianElement):
        """Lowest energy if el were added, or None when rejected."""
        sc, hc, snn, hnn = self.column(el)
        if snn <= 0:
            return None, None
        sc, hc, hnn = sc / math.sqrt(snn), hc / math.sqrt(snn), hnn / snn
        if not self.els:
            return hnn, (sc, hc, math.sqrt(snn), hnn)
        proj = self.v.T @ sc
        bh = self.v.T @ hc
        nu = 1.0 - float(proj @ proj)
        if nu < 1.0 / COND_MAX:
            return None, None
        coup = (bh - self.w * proj) / math.sqrt(nu)
        diag = (hnn - 2 * float(bh @ proj) + float(self.w @ proj ** 2)) / nu
        return _bordered_lowest(self.w, coup, diag), (sc, hc, math.sqrt(snn), hnn)

    @property
    def energy(self) -> float:
        return float(self.w[0])


def _rng(seed: int, *counter: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([seed, *counter]))


def svm_ground_energy(g: float, mass_ratio: float = 1.0, config: SvmConfig = SvmConfig(),
                      parity: int = -1) -> SvmResult:
    """Variational upper bound to the lowest relative energy of the given parity.

    Start: alpha_trials random bases of start_size elements, keep the best.
    Growth: until basis_cap, each new element is the best of
    beta_growth_rounds random candidates (variational, hence monotone).
    """
    masses = _masses(mass_ratio)
    problem = _Problem(float(g), masses, parity)
    best = None
    for trial in range(config.alpha_trials):
        rng = _rng(config.seed, 0, trial)
        b = _Basis(problem)
        while len(b.els) < min(config.start_size, config.basis_cap):
            el = random_element(rng, problem)
            e, data = b.trial_energy(el)
            if e is None:
                continue
            _add(b, el, data)
        if best is None or b.energy < best.energy:
            best = b
    history = [best.energy]
    step = 0
    while len(best.els) < config.basis_cap:
        step += 1
        rng = _rng(config.seed, 1, step)
        cands = []
        for trial in range(config.beta_growth_rounds):
            el = random_element(rng, problem)
            e, data = best.trial_energy(el)
            if e is not None:
                cands.append((e, trial, el, data))
        cands.sort(key=lambda c: (c[0], c[1]))
        if not any(_add(best, el, data) for _, _, el, data in cands):
            break
        history.append(best.energy)
    return SvmResult(best.energy, [el for el, _ in best.els], history)


def _add(b: _Basis, el: GaussianElement, data) -> bool:
    """Append el unless the overlap matrix would exceed COND_MAX.

    Matrices are kept between unit-normalised projected functions.
    """
    sc, hc, nrm, hnn = data
    n = len(b.els)
    hn = np.zeros((n + 1, n + 1))
    sn = np.zeros((n + 1, n + 1))
    hn[:n, :n], sn[:n, :n] = b.h, b.s
    hn[n, :n] = hn[:n, n] = hc
    sn[n, :n] = sn[:n, n] = sc
    hn[n, n], sn[n, n] = hnn, 1.0
    ev = np.linalg.eigvalsh(sn)
    if ev[0] <= ev[-1] / COND_MAX:
        return False
    try:
        w, v = _lowest(hn, sn)
    except np.linalg.LinAlgError:
        return False
    b.els.append((el, nrm))
    b._a = np.array([e.A for e, _ in b.els])
    b._s = np.array([e.s for e, _ in b.els])
    b._n = np.array([x for _, x in b.els])
    b.h, b.s, b.w, b.v = hn, sn, w, v
    return True

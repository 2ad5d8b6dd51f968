"""Two trapped particles with a contact interaction.

Relative coordinate x = (x1 - x2)/sqrt(2); the interaction g*delta(x1 - x2)
becomes (g/sqrt(2))*delta(x).  Energies are relative (centre of mass removed).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import integrate, special

from .ansatz import LimitPair, optimal_energy, energy_at_q
from .numerics import (Bracket, NoSignChangeError, NumericsError, find_root,
                       gauss_legendre, generalized_eig_lowest, ho_eigenfunctions,
                       kummer_1f1)

SQRT2 = math.sqrt(2.0)


class BuschRootError(NumericsError):
    pass


@dataclass(frozen=True)
class TwoBodyLevel:
    n1: int
    sign: str = "repulsive"

    def __post_init__(self):
        if self.n1 < 0:
            raise ValueError("n1 must be non-negative")
        if self.sign not in ("repulsive", "attractive"):
            raise ValueError("sign must be 'repulsive' or 'attractive'")
        if self.n1 % 2 == 0 and self.n2 < 0:
            raise ValueError("attractive partner of n1 = 0 does not exist")

    @property
    def n2(self) -> int:
        return self.n1 + 1 if self.sign == "repulsive" else self.n1 - 1

    @property
    def inert(self) -> bool:
        return self.n1 % 2 == 1


@dataclass(frozen=True)
class BuschState:
    energy: float
    q: float


def busch_q(energy: float) -> float:
    """q(E) = Gamma(a) / (2 sqrt2 Gamma(a + 1/2)),  a = (1 - 2E)/4."""
    a = (1.0 - 2.0 * energy) / 4.0
    rb = special.rgamma(a + 0.5)
    ra = special.rgamma(a)
    if ra == 0:
        return math.inf
    if a > 20:
        return math.exp(special.gammaln(a) - special.gammaln(a + 0.5)) / (2 * SQRT2)
    return rb / ra / (2 * SQRT2)


def busch_residual(energy: float, q: float) -> float:
    """|q(E) - q|, relative when |q| > 1."""
    qe = busch_q(energy)
    return abs(qe - q) / max(1.0, abs(q))


def _pole_free(q: float):
    c = 1.0 / (2 * SQRT2)

    def h(e):
        a = (1.0 - 2.0 * e) / 4.0
        return q * special.rgamma(a) - c * special.rgamma(a + 0.5)
    return h


def busch_energy(q: float, level_index: int = 0, deep: bool = False, tol: float = 1e-14) -> float:
    """Relative energy of the even two-body state at q = -1/g.

    Level k spans E in (2k + 1/2, 2k + 5/2) between consecutive poles of q(E),
    passing through 2k + 3/2 at q = 0.  The deep flag selects the bound branch
    E < 1/2 that exists for q > 0.
    """
    if level_index < 0:
        raise ValueError("level_index must be non-negative")
    if deep:
        if not q > 0:
            raise BuschRootError("deep branch exists only for q > 0 (attractive)")
        if math.isinf(q):
            return 0.5
        logq = math.log(q * 2 * SQRT2)

        def f(e):
            a = (1.0 - 2.0 * e) / 4.0
            return special.gammaln(a) - special.gammaln(a + 0.5) - logq
        g = -1.0 / q
        lo = -0.5 * g * g - 2.0
        hi = 0.5 - 1e-15
        while f(lo) > 0:
            lo = 2 * lo - 1
        return find_root(f, Bracket(lo, hi), tol)
    k = level_index
    if math.isinf(q):
        return 2 * k + 0.5 if q < 0 else 2 * k + 2.5
    if q == 0:
        return 2 * k + 1.5
    lo, hi = 2 * k + 0.5, 2 * k + 2.5
    h = _pole_free(q)
    try:
        e = find_root(h, Bracket(lo, hi), tol)
    except NoSignChangeError as exc:
        raise BuschRootError(f"no Busch root for q={q}, level {k}") from exc
    return e


def busch_state(q: float, level_index: int = 0, deep: bool = False) -> BuschState:
    return BuschState(busch_energy(q, level_index, deep), q)


def busch_slope(level_index: int) -> float:
    """Exact dE/dq at q = 0 for level k (energy 2k + 3/2)."""
    k = level_index
    gk = special.gamma(-k - 0.5) * (-1) ** k * math.factorial(k)
    return -4.0 * SQRT2 / gk


def busch_wavefunction(energy: float, x, q: float | None = None):
    """Unnormalised even relative wave function at energy E.

    psi(x) = (-sqrt2 q 1F1(a; 1/2; x^2) + |x| 1F1(a + 1/2; 3/2; x^2)) exp(-x^2/2).
    The two terms cancel strongly for |x| beyond a few oscillator lengths;
    use busch_wavefunction_stable there.
    """
    if q is None:
        q = busch_q(energy)
    a = (1.0 - 2.0 * energy) / 4.0
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    out = np.empty_like(xs)
    for i, xi in enumerate(xs):
        if abs(xi) > 7:
            raise ValueError("|x| > 7 outside the supported range")
        z = xi * xi
        out[i] = (-SQRT2 * q * kummer_1f1(a, 0.5, z)
                  + abs(xi) * kummer_1f1(a + 0.5, 1.5, z)) * math.exp(-0.5 * z)
    return out if np.ndim(x) else float(out[0])


def busch_wavefunction_stable(energy: float, x):
    """Same function through the Tricomi U form, accurate at large |x|."""
    a = (1.0 - 2.0 * energy) / 4.0
    x = np.asarray(x, dtype=float)
    # -Gamma(a)/(2 sqrt(pi)) U(a, 1/2, x^2) e^{-x^2/2}, written with rgamma
    pref = -0.5 / (math.sqrt(math.pi) * special.rgamma(a))
    return pref * special.hyperu(a, 0.5, x * x) * np.exp(-0.5 * x * x)


def _half_rule(n: int = 200, top: float = 7.0):
    return gauss_legendre(n, 0.0, top)


def _extent(nmax: int) -> float:
    return max(7.0, math.sqrt(2 * nmax + 1) + 6.0)


@lru_cache(maxsize=None)
def sgn_overlap(n1: int, n2: int, nodes: int = 200) -> float:
    """<psi_n1 | sgn | psi_n2> by Gauss-Legendre on each half-line."""
    rule = _half_rule(nodes, _extent(max(n1, n2)))
    psi = ho_eigenfunctions(max(n1, n2), rule.nodes)
    half = rule.integrate(psi[n1] * psi[n2])
    # on x < 0 the product picks up (-1)^(n1+n2), and sgn adds another -1
    return half * (1 - (-1) ** (n1 + n2))


def two_body_limit_pair(level: TwoBodyLevel) -> LimitPair:
    n1, n2 = level.n1, level.n2
    e0 = n1 + 0.5
    if level.inert:
        return LimitPair(e0, e0, 0.0, 0.0, None, f"n1={n1} inert")
    psi0 = ho_eigenfunctions(n1, 0.0)[n1]
    k0 = psi0 ** 2 / SQRT2
    s = sgn_overlap(n1, n2)
    k = (n2 - 1) // 2
    return LimitPair(e0, n2 + 0.5, float(k0), float(s), busch_slope(k),
                     f"n1={n1},n2={n2}")


def ansatz_energy(q: float, level_index: int, modified: bool = False) -> float:
    """Ansatz energy along Busch level k, switching limit pair at q = 0.

    q <= 0 uses the repulsive pair (2k, 2k+1); q > 0 the attractive pair
    (2k+2, 2k+1), both meeting at 2k + 3/2.
    """
    k = level_index
    if q <= 0:
        pair = two_body_limit_pair(TwoBodyLevel(2 * k, "repulsive"))
    else:
        pair = two_body_limit_pair(TwoBodyLevel(2 * k + 2, "attractive"))
    return energy_at_q(pair, q, modified)


def ansatz_wavefunction(pair_level: TwoBodyLevel, g: float, x):
    """Normalised trial wave function of the optimal two-state ansatz."""
    pair = two_body_limit_pair(pair_level)
    res = optimal_energy(pair, g)
    x = np.asarray(x, dtype=float)
    psi = ho_eigenfunctions(max(pair_level.n1, pair_level.n2), x)
    g0 = psi[pair_level.n1]
    ginf = np.sign(x) * psi[pair_level.n2]
    r = res.alpha_ratio
    if math.isinf(r):
        a0, ai = 1.0, 0.0
    else:
        a0, ai = r, 1.0
    norm = math.sqrt(a0 * a0 + ai * ai + 2 * pair.overlap * a0 * ai)
    return (a0 * g0 + ai * ginf) / norm


def normalize_on_grid(f, lo: float = -7.0, hi: float = 7.0, nodes: int = 400):
    """Return a callable giving f / ||f|| with the norm from Gauss-Legendre on [lo, hi]
    split at zero."""
    left = gauss_legendre(nodes, lo, 0.0)
    right = gauss_legendre(nodes, 0.0, hi)
    n2 = left.integrate(f(left.nodes) ** 2) + right.integrate(f(right.nodes) ** 2)
    c = 1.0 / math.sqrt(n2)
    return lambda x: c * f(x)


def l2_distance(f, h, lo: float = -7.0, hi: float = 7.0, nodes: int = 400) -> float:
    """L2 distance between two functions, choosing the relative sign that minimises it."""
    left = gauss_legendre(nodes, lo, 0.0)
    right = gauss_legendre(nodes, 0.0, hi)
    tot = 0.0
    cross = 0.0
    for r in (left, right):
        fv, hv = f(r.nodes), h(r.nodes)
        tot += r.integrate(fv * fv + hv * hv)
        cross += r.integrate(fv * hv)
    return math.sqrt(max(0.0, tot - 2 * abs(cross)))


# --- three-state ansatz with a free-space bound state -----------------------

def _deep_basis(g: float):
    kappa = abs(g) / SQRT2

    def psi0(x):
        return np.pi ** -0.25 * np.exp(-0.5 * x * x)

    def dpsi0(x):
        return -x * psi0(x)

    def chi(x):
        return SQRT2 * np.abs(x) * psi0(x)

    def dchi(x):
        # derivative of sgn(x)*psi1(x) = sqrt2 |x| psi0
        return SQRT2 * np.sign(x) * (1 - x * x) * psi0(x)

    def gd(x):
        return math.sqrt(kappa) * np.exp(-kappa * np.abs(x))

    def dgd(x):
        return -kappa * np.sign(x) * gd(x)

    funcs = [(psi0, dpsi0), (chi, dchi), (gd, dgd)]
    return kappa, funcs


def _half_integral(f, kappa: float) -> float:
    # integrands are even; integrate on (0, inf) and double
    val, _ = integrate.quad(f, 0.0, np.inf, epsabs=1e-14, epsrel=1e-13, limit=400)
    return 2.0 * val


def extended_deep_matrices(g: float):
    """(H, S) for the basis {psi0, sgn*psi1, sqrt(kappa) exp(-kappa|x|)}.

    Elements use the symmetric quadratic form of H,
    <f|H|h> = 1/2 <f'|h'> + 1/2 <f|x^2|h> + (g/sqrt2) f(0) h(0),
    valid for the kinked basis functions.
    """
    if not g < 0:
        raise ValueError("extended ansatz is defined for g < 0")
    kappa, funcs = _deep_basis(g)
    n = len(funcs)
    h = np.zeros((n, n))
    s = np.zeros((n, n))
    for i in range(n):
        fi, dfi = funcs[i]
        for j in range(i, n):
            fj, dfj = funcs[j]
            s[i, j] = _half_integral(lambda x: fi(x) * fj(x), kappa)
            kin = _half_integral(lambda x: dfi(x) * dfj(x), kappa)
            pot = _half_integral(lambda x: x * x * fi(x) * fj(x), kappa)
            h[i, j] = 0.5 * kin + 0.5 * pot + g / SQRT2 * fi(0.0) * fj(0.0)
            s[j, i], h[j, i] = s[i, j], h[i, j]
    return h, s


def extended_deep_ansatz(g: float):
    """Lowest energy and coefficients (a0, a_inf, a_delta) of the 3-state ansatz."""
    h, s = extended_deep_matrices(g)
    e, v = generalized_eig_lowest(h, s)
    if v[2] < 0 or (v[2] == 0 and v[0] < 0):
        v = -v
    return e, v


def extended_deep_wavefunction(g: float, x):
    e, v = extended_deep_ansatz(g)
    _, funcs = _deep_basis(g)
    x = np.asarray(x, dtype=float)
    return sum(c * f(x) for c, (f, _) in zip(v, funcs))

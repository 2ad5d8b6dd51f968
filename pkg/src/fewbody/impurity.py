"""One impurity among N-1 identical fermions, all in the same trap.

Ordered-region integrals over the majority coordinates are done exactly for
fixed impurity position x1.  The majority factor of every integrand is a
squared Vandermonde determinant times a one-body weight, so by the
Andreief identity

    int prod_k w(x_k) Delta(x)^2 = a! b! sum_{|S| = a} det M_S,

where a (b) majority particles sit left (right) of x1, and row i of M_S holds
moments of x^(i+j) w over the left half-line if i is in S, else the right one.
The remaining x1 integral is one-dimensional.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import special

from .ansatz import AnsatzResult, LimitPair, modified_lambda, optimal_energy
from .numerics import gauss_legendre, symmetric_eig

N_MIN, N_MAX = 2, 6
SQRT_PI = math.sqrt(math.pi)


class UnsupportedSystemError(ValueError):
    pass


def _check_n(n: int):
    if not N_MIN <= n <= N_MAX:
        raise UnsupportedSystemError(f"N = {n} outside supported range {N_MIN}..{N_MAX}")


@dataclass(frozen=True)
class ImpuritySystem:
    n_total: int

    def __post_init__(self):
        _check_n(self.n_total)

    @property
    def n_up(self) -> int:
        return self.n_total - 1


@dataclass(frozen=True)
class PartialOverlaps:
    values: np.ndarray


@dataclass(frozen=True)
class SlopeMatrix:
    alphas: np.ndarray
    matrix: np.ndarray


def slater_norm(n: int) -> float:
    """Prefactor of the Vandermonde form of the n-particle ground Slater determinant."""
    if n == 0:
        return 1.0
    logc = (n / 4) * math.log(2 ** (n - 1) / math.pi) - 0.5 * special.gammaln(n + 1)
    logc -= 0.5 * sum(special.gammaln(k + 1) for k in range(n))
    return math.exp(logc)


def slater_ground(x) -> float:
    """Normalised antisymmetric ground state of len(x) fermions at positions x."""
    x = np.asarray(x, dtype=float)
    n = len(x)
    vdm = 1.0
    for j in range(n):
        for k in range(j + 1, n):
            vdm *= x[k] - x[j]
    return slater_norm(n) * math.exp(-0.5 * float(x @ x)) * vdm


def e0(n: int) -> float:
    _check_n(n)
    return ((n - 1) ** 2 + 1) / 2


def einf(n: int) -> float:
    _check_n(n)
    return n * n / 2


def v00_closed_form(n: int) -> float:
    """K0 = <g0|V|g0>/g for the non-interacting ground state."""
    if n < 2:
        raise UnsupportedSystemError("need at least two particles")
    return math.sqrt(2) * special.gamma(n - 0.5) / (math.pi * math.factorial(n - 2))


def v00_quadrature(n: int, nodes: int = 200) -> float:
    """(N-1) int dx1 psi0(x1)^2 * (majority pair density with one particle at x1),
    integrating the remaining majority coordinates by the Andreief identity."""
    _check_n(n)
    m = n - 2
    cm = slater_norm(n - 1)

    def inner(x1):
        # majority state at (x1, x3..xN): Vandermonde over all, x3.. free
        # weight for each free coordinate: exp(-x^2)(x - x1)^2, full line
        mom = _full_moments(x1, 2, 2 * m)
        mat = _moment_matrix(mom, m)
        det = np.linalg.det(mat) if m else 1.0
        return math.factorial(m) * det
    rule = gauss_legendre(nodes, -9.0, 9.0)
    vals = np.array([inner(x) * math.exp(-2 * x * x) for x in rule.nodes])
    return (n - 1) * cm ** 2 / SQRT_PI * rule.integrate(vals)


# --- incomplete Gaussian moments -------------------------------------------

def _half_moments(c: float, kmax: int):
    """L_k = int_-inf^c x^k e^{-x^2}, R_k = int_c^inf x^k e^{-x^2}, k = 0..kmax."""
    ec = math.exp(-c * c)
    left = np.zeros(kmax + 1)
    right = np.zeros(kmax + 1)
    left[0] = 0.5 * SQRT_PI * special.erfc(-c)
    right[0] = 0.5 * SQRT_PI * special.erfc(c)
    if kmax >= 1:
        left[1] = -0.5 * ec
        right[1] = 0.5 * ec
    for k in range(2, kmax + 1):
        ck = c ** (k - 1) * ec
        left[k] = -0.5 * ck + 0.5 * (k - 1) * left[k - 2]
        right[k] = 0.5 * ck + 0.5 * (k - 1) * right[k - 2]
    return left, right


def _shifted(moments: np.ndarray, c: float, power: int, kmax: int) -> np.ndarray:
    """Moments of x^k (x - c)^power from plain moments."""
    out = np.zeros(kmax + 1)
    coeffs = [math.comb(power, r) * (-c) ** (power - r) for r in range(power + 1)]
    for k in range(kmax + 1):
        out[k] = sum(cf * moments[k + r] for r, cf in enumerate(coeffs))
    return out


def _full_moments(c: float, power: int, kmax: int) -> np.ndarray:
    left, right = _half_moments(c, kmax + power)
    return _shifted(left + right, c, power, kmax)


def _moment_matrix(mom: np.ndarray, m: int) -> np.ndarray:
    idx = np.arange(m)
    return mom[idx[:, None] + idx[None, :]]


def _andreief_sum(c: float, power: int, m: int, a: int) -> float:
    """sum over row subsets S (|S| = a) of det M_S, weight e^{-x^2}(x - c)^power."""
    if m == 0:
        return 1.0
    left, right = _half_moments(c, 2 * m - 2 + power)
    ml = _moment_matrix(_shifted(left, c, power, 2 * m - 2), m)
    mr = _moment_matrix(_shifted(right, c, power, 2 * m - 2), m)
    tot = 0.0
    for s in itertools.combinations(range(m), a):
        mat = mr.copy()
        mat[list(s)] = ml[list(s)]
        tot += np.linalg.det(mat)
    return tot


def _x1_rule(nodes: int):
    return gauss_legendre(nodes, -9.0, 9.0)


@lru_cache(maxsize=None)
def partial_overlaps(n: int, nodes: int = 160) -> PartialOverlaps:
    """<g0|gA>_k for the impurity being the k-th particle from the left, k = 1..N."""
    _check_n(n)
    m = n - 1
    pref = np.pi ** -0.25 * slater_norm(n - 1) * slater_norm(n)
    rule = _x1_rule(nodes)
    vals = []
    for k in range(1, n + 1):
        a, b = k - 1, n - k
        f = np.array([math.exp(-x * x) * _andreief_sum(x, 1, m, a) for x in rule.nodes])
        combi = math.comb(n - 1, k - 1) * math.factorial(a) * math.factorial(b)
        vals.append(pref * combi * rule.integrate(f))
    return PartialOverlaps(np.array(vals))


@lru_cache(maxsize=None)
def alpha_coefficients(n: int, nodes: int = 160) -> np.ndarray:
    """alpha_k, k = 1..N-1: squared coincidence derivative of the Slater state
    with the impurity between the k-th and (k+1)-th majority particle."""
    _check_n(n)
    m = n - 2
    cn2 = slater_norm(n) ** 2
    rule = _x1_rule(nodes)
    out = []
    for k in range(1, n):
        a = k - 1
        f = np.array([math.exp(-2 * x * x) * _andreief_sum(x, 4, m, a) for x in rule.nodes])
        # N!/(a! b!) from the ordering count times a! b! from Andreief
        out.append(math.factorial(n) * cn2 * rule.integrate(f))
    return np.array(out)


def slope_matrix(n: int) -> SlopeMatrix:
    al = alpha_coefficients(n)
    a = np.zeros((n, n))
    for k, v in enumerate(al):
        a[k, k] += v
        a[k + 1, k + 1] += v
        a[k, k + 1] -= v
        a[k + 1, k] -= v
    return SlopeMatrix(al, a)


@lru_cache(maxsize=None)
def exact_strong_slope(n: int):
    """(K_exact, a): greatest eigenvalue of the slope matrix and its eigenvector, a_1 > 0."""
    w, v = symmetric_eig(slope_matrix(n).matrix)
    vec = v[:, -1]
    if vec[0] < 0:
        vec = -vec
    return float(w[-1]), vec


def overlap_for(n: int, a) -> float:
    """<g0|ginf(a)> for sector coefficients a."""
    a = np.asarray(a, dtype=float)
    v = partial_overlaps(n).values
    return math.sqrt(n / float(a @ a)) * float(a @ v)


def optimal_overlap(n: int):
    """Maximal <g0|ginf(a)>^2 over a, and the maximiser (a_1 > 0)."""
    v = partial_overlaps(n).values
    amax = v / np.linalg.norm(v)
    if amax[0] < 0:
        amax = -amax
    return n * float(v @ v), amax


def limit_pair(n: int, use_a_max: bool = False) -> LimitPair:
    k_exact, a = exact_strong_slope(n)
    if use_a_max:
        a = optimal_overlap(n)[1]
    s = overlap_for(n, a)
    return LimitPair(e0(n), einf(n), v00_closed_form(n), s, k_exact, f"N={n}")


def ground_energy(n: int, g: float, method: str = "ansatz", use_a_max: bool = False) -> AnsatzResult:
    if g < 0:
        raise UnsupportedSystemError("impurity curves are implemented for g >= 0 only")
    pair = limit_pair(n, use_a_max)
    if method == "ansatz":
        return optimal_energy(pair, g)
    if method == "modified":
        return optimal_energy(pair, g, modified_lambda(pair))
    raise ValueError(f"unknown method {method}")


def anderson_overlap_curve(n: int, g_grid) -> list:
    """Rows (g, anderson_sq) of the unmodified ansatz."""
    pair = limit_pair(n)
    rows = []
    for g in g_grid:
        if g < 0:
            raise UnsupportedSystemError("impurity curves are implemented for g >= 0 only")
        rows.append((float(g), float(optimal_energy(pair, g).anderson_sq)))
    return rows

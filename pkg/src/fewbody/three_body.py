"""Two identical fermions plus a third particle (2+1) in hyperspherical coordinates.

Units: majority mass m = 1, trap frequency 1, impurity mass M = mass_ratio.
With mass-scaled orthogonal Jacobi coordinates the relative Hamiltonian is
-1/2 Laplacian + 1/2 rho^2 in the plane, and each impurity-majority contact
becomes a line delta along two rays with strength g*sqrt(M/(M+1)).  The rays
sit at +-theta0 and pi +- theta0; phi = +-pi/2 is the majority-majority
coincidence line, where every state vanishes by antisymmetry.

Angular functions are stored on the half circle [-pi/2, pi/2].  Parity and
majority exchange fix the rest: Phi(-phi) = -p Phi(phi), Phi(pi - phi) = -Phi(phi).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Optional

import numpy as np
from scipy import special

from .ansatz import LimitPair, energy_at_q
from .numerics import gauss_legendre, laguerre_general

HALF_PI = 0.5 * math.pi
MU_CUTOFF = 40.0


class ParityMismatchError(ValueError):
    pass


def theta0(mass_ratio: float) -> float:
    """Angle of the impurity-majority contact rays from the x'_1 axis."""
    if mass_ratio <= 0:
        raise ValueError("mass ratio must be positive")
    if mass_ratio == 1:
        return math.pi / 6
    return math.atan(math.sqrt(mass_ratio / (2.0 + mass_ratio)))


def line_strength(mass_ratio: float) -> float:
    """Coefficient w in V = g*w/rho * sum_rays delta(phi - ray)."""
    return math.sqrt(mass_ratio / (mass_ratio + 1.0))


# --- angular functions ------------------------------------------------------

@dataclass
class AngularFunction:
    """Piecewise angular function on [-pi/2, pi/2], extended by symmetry.

    pieces: (lo, hi, f, df) tuples on the half circle, df the derivative of f;
    points not covered evaluate to zero.
    """
    kind: str
    mu: float
    parity: int
    theta0: float
    pieces: list = field(default_factory=list)
    scale: float = 1.0

    def _half(self, phi: np.ndarray) -> np.ndarray:
        out = np.zeros_like(phi)
        for lo, hi, fn, _ in self.pieces:
            m = (phi >= lo) & (phi <= hi)
            out[m] = fn(phi[m])
        return self.scale * out

    def __call__(self, phi):
        phi = np.asarray(phi, dtype=float)
        flat = np.atleast_1d(phi)
        if np.any(flat < -math.pi - 1e-12) or np.any(flat >= math.pi + 1e-12):
            raise ValueError("phi outside [-pi, pi)")
        inner = (flat >= -HALF_PI) & (flat <= HALF_PI)
        out = np.empty_like(flat)
        out[inner] = self._half(flat[inner])
        other = flat[~inner]
        mirrored = math.pi - other
        mirrored = np.where(mirrored > math.pi, mirrored - 2 * math.pi, mirrored)
        out[~inner] = -self._half(mirrored)
        return out.reshape(phi.shape) if phi.ndim else float(out[0])

    def breakpoints(self) -> list:
        pts = {-HALF_PI, HALF_PI}
        for lo, hi, _, _ in self.pieces:
            pts.update((lo, hi))
        return sorted(pts)

    def half_integral(self, fn: Callable, nodes: int = 64) -> float:
        """Integral of fn(phi) over [-pi/2, pi/2], split at the piece edges."""
        tot = 0.0
        bp = self.breakpoints()
        for a, b in zip(bp[:-1], bp[1:]):
            if b - a < 1e-15:
                continue
            r = gauss_legendre(nodes, a, b)
            tot += r.integrate(fn(r.nodes))
        return tot

    def norm_sq(self) -> float:
        # exchange doubles the half-circle integral
        return 2.0 * self.half_integral(lambda p: self._half(p) ** 2)

    def normalized(self) -> "AngularFunction":
        self.scale = self.scale / math.sqrt(self.norm_sq())
        return self

    def value_on_ray(self) -> float:
        """Phi at phi = theta0 (continuous there for every stored kind)."""
        return float(self._eval_side(self.theta0, +1))

    def _eval_side(self, phi: float, side: int, deriv: bool = False) -> float:
        for lo, hi, fn, dfn in self.pieces:
            if (side > 0 and lo <= phi < hi) or (side < 0 and lo < phi <= hi):
                f = dfn if deriv else fn
                return self.scale * float(f(np.array([phi]))[0])
        return 0.0

    def derivative_jump(self) -> float:
        """Phi'(theta0+) - Phi'(theta0-)."""
        t = self.theta0
        return self._eval_side(t, +1, True) - self._eval_side(t, -1, True)


def _base(mu: float, parity: int, coef: float = 1.0):
    """(f, f') for coef*cos(mu phi) (p = -1) or coef*sin(mu phi) (p = +1)."""
    if parity == -1:
        return (lambda p: coef * np.cos(mu * p), lambda p: -coef * mu * np.sin(mu * p))
    return (lambda p: coef * np.sin(mu * p), lambda p: coef * mu * np.cos(mu * p))


def _sine(mu: float, shift: float, coef: float = 1.0):
    """(f, f') for coef*sin(mu (phi - shift))."""
    return (lambda p: coef * np.sin(mu * (p - shift)),
            lambda p: coef * mu * np.cos(mu * (p - shift)))


def noninteracting_angular(mu: int, mass_ratio: float = 1.0) -> AngularFunction:
    """cos(mu phi)/sqrt(pi) for odd mu, sin(mu phi)/sqrt(pi) for even mu."""
    mu = int(mu)
    if mu < 1:
        raise ValueError("mu must be a positive integer")
    p = (-1) ** mu
    return AngularFunction("noninteracting", float(mu), p, theta0(mass_ratio),
                           [(-HALF_PI, HALF_PI, *_base(mu, p))], 1.0 / math.sqrt(math.pi))


def equal_mass_infinite_angular(mu: int, parity: int) -> AngularFunction:
    """Non-trivial 1/g = 0 state for equal masses (mu a multiple of 3).

    Middle region [-pi/6, pi/6] carries coefficient p-1 (odd mu, cos base) or
    -p-1 (even mu, sin base); the right outer region carries 1; the left outer
    region follows from Phi(-phi) = -p Phi(phi).
    """
    if mu % 3:
        raise ValueError("equal-mass infinite states need mu divisible by 3")
    t = math.pi / 6
    base_parity = -1 if mu % 2 else 1
    if mu % 2:
        c0 = parity - 1
        norm = math.sqrt((2 + parity) / (2 * math.pi))
    else:
        c0 = -parity - 1
        norm = math.sqrt((2 - parity) / (2 * math.pi))
    # cos is even and sin odd, so the mirror rule fixes the left coefficient
    cl = parity * base_parity
    pieces = [(-HALF_PI, -t, *_base(mu, base_parity, cl)),
              (-t, t, *_base(mu, base_parity, c0)),
              (t, HALF_PI, *_base(mu, base_parity))]
    return AngularFunction("infinite_equal_mass", float(mu), parity, t, pieces, norm)


def outer_angular(mu: float, parity: int, mass_ratio: float) -> AngularFunction:
    """1/g = 0 state living in the two outer regions |phi| in [theta0, pi/2]."""
    t0 = theta0(mass_ratio)
    f = AngularFunction("infinite_imbalanced_two_region", mu, parity, t0,
                        [(-HALF_PI, -t0, *_sine(mu, -t0, parity)),
                         (t0, HALF_PI, *_sine(mu, t0))])
    return f.normalized()


def middle_angular(mu: float, parity: int, mass_ratio: float) -> AngularFunction:
    """1/g = 0 state confined to the middle region |phi| <= theta0."""
    t0 = theta0(mass_ratio)
    f = AngularFunction("infinite_imbalanced_middle_region", mu, parity, t0,
                        [(-t0, t0, *_base(mu, parity))])
    return f.normalized()


# --- quantum numbers --------------------------------------------------------

@dataclass(frozen=True)
class HypersphericalState:
    nu: int
    mu: float
    parity: int
    mass_ratio: float = 1.0
    kind: str = "noninteracting"

    @property
    def energy(self) -> float:
        return 2 * self.nu + self.mu + 1


def _check_parity(parity: int):
    if parity not in (-1, 1):
        raise ValueError("parity must be +1 or -1")


def g0_roots(parity: int, count: int) -> list:
    """Non-interacting mu values of given parity: odd for p=-1, even (>0) for p=+1."""
    _check_parity(parity)
    start = 1 if parity == -1 else 2
    return [float(start + 2 * i) for i in range(count)]


def ginf_roots(parity: int, mass_ratio: float, mu_max: float = MU_CUTOFF) -> list:
    """Sorted (mu, kind) pairs at 1/g = 0, counted with multiplicity."""
    _check_parity(parity)
    out = []
    if mass_ratio == 1:
        for mu in range(3, int(mu_max) + 1, 3):
            out.append((float(mu), "infinite_equal_mass"))
            if (mu % 2 == 1) == (parity == -1):
                out.append((float(mu), "trivial"))
        return out
    t0 = theta0(mass_ratio)
    width = HALF_PI - t0
    k = 1
    while k * math.pi / width <= mu_max:
        out.append((k * math.pi / width, "infinite_imbalanced_two_region"))
        k += 1
    m = 0
    while True:
        mu = ((m + 0.5) if parity == -1 else (m + 1)) * math.pi / t0
        if mu > mu_max:
            break
        out.append((mu, "infinite_imbalanced_middle_region"))
        m += 1
    out.sort(key=lambda t: t[0])
    return out


def solve_mu_limit(limit: str, parity: int, mass_ratio: float, branch_index: int) -> float:
    """branch_index-th (0-based) positive mu at g = 0 ('g0') or 1/g = 0 ('ginf')."""
    if limit == "g0":
        return g0_roots(parity, branch_index + 1)[branch_index]
    if limit != "ginf":
        raise ValueError("limit must be 'g0' or 'ginf'")
    roots = ginf_roots(parity, mass_ratio)
    if branch_index >= len(roots):
        raise ValueError(f"fewer than {branch_index + 1} roots below mu = {MU_CUTOFF}")
    return roots[branch_index][0]


def ginf_condition(mu: float, parity: int, mass_ratio: float) -> float:
    """The g-dominant factor whose zeros are the 1/g = 0 mu values."""
    t0 = theta0(mass_ratio)
    mid = math.cos(mu * t0) if parity == -1 else math.sin(mu * t0)
    return math.sin(mu * (HALF_PI - t0)) * mid


def delta_mu(parity: int, mu_inf: int) -> int:
    """|mu_inf - mu_0| for the equal-mass pair ending at mu_inf."""
    return (3 + (-1) ** int(mu_inf) * parity) // 2


def angular_function(mu: float, parity: int, kind: str, mass_ratio: float = 1.0) -> AngularFunction:
    if kind in ("noninteracting", "trivial"):
        return noninteracting_angular(int(round(mu)), mass_ratio)
    if kind == "infinite_equal_mass":
        return equal_mass_infinite_angular(int(round(mu)), parity)
    if kind == "infinite_imbalanced_two_region":
        return outer_angular(mu, parity, mass_ratio)
    if kind == "infinite_imbalanced_middle_region":
        return middle_angular(mu, parity, mass_ratio)
    raise ValueError(f"unknown angular kind {kind}")


# --- radial part ------------------------------------------------------------

def radial_norm_sq(nu: int, mu: float) -> float:
    return 2.0 * math.exp(special.gammaln(nu + 1) - special.gammaln(nu + mu + 1))


def radial(nu: int, mu: float, rho):
    rho = np.asarray(rho, dtype=float)
    return (math.sqrt(radial_norm_sq(nu, mu)) * laguerre_general(nu, mu, rho * rho)
            * np.exp(-0.5 * rho * rho) * rho ** mu)


def radial_integral(nu1: int, mu1: float, nu2: int, mu2: float, power: float = 0.0) -> float:
    """int_0^inf R1 R2 rho^power rho drho, exact by generalised Gauss-Laguerre in t = rho^2."""
    alpha = 0.5 * (mu1 + mu2 + power)
    if alpha <= -1:
        raise ValueError("radial integral diverges")
    n = nu1 + nu2 + 2
    t, w = special.roots_genlaguerre(n, alpha)
    poly = laguerre_general(nu1, mu1, t) * laguerre_general(nu2, mu2, t)
    c = math.sqrt(radial_norm_sq(nu1, mu1) * radial_norm_sq(nu2, mu2))
    return 0.5 * c * float(np.dot(w, poly))


def wavefunction(state: HypersphericalState, rho, phi):
    ang = angular_function(state.mu, state.parity, state.kind, state.mass_ratio)
    return radial(state.nu, state.mu, rho) * ang(phi)


# --- limit pairs and spectra --------------------------------------------------

def _rays_value_sq(f: AngularFunction) -> float:
    # four impurity-majority rays share |Phi| by parity and exchange
    return 4.0 * f.value_on_ray() ** 2


def angular_overlap(f: AngularFunction, h: AngularFunction) -> float:
    bp = sorted(set(f.breakpoints()) | set(h.breakpoints()))
    tot = 0.0
    for a, b in zip(bp[:-1], bp[1:]):
        r = gauss_legendre(64, a, b)
        tot += r.integrate(f._half(r.nodes) * h._half(r.nodes))
    return 2.0 * tot


def exact_slope(nu: int, ginf: AngularFunction, mass_ratio: float) -> float:
    """dE/dq at q = 0 from the derivative jumps of the 1/g = 0 state.

    E - E_inf = -(1/(4 g w)) <rho^-3> sum_rays [Phi']^2  to first order in 1/g.
    """
    jump = ginf.derivative_jump()
    if jump == 0:
        return 0.0
    rho3 = radial_integral(nu, ginf.mu, nu, ginf.mu, -3.0)
    return rho3 * 4.0 * jump ** 2 / (4.0 * line_strength(mass_ratio))


def three_body_limit_pair(nu: int, mu0: float, mu_inf: float, parity: int,
                          mass_ratio: float = 1.0, kind_inf: Optional[str] = None) -> LimitPair:
    _check_parity(parity)
    if (-1) ** int(round(mu0)) != parity:
        raise ParityMismatchError(f"mu0 = {mu0} has parity {(-1) ** int(round(mu0))}, not {parity}")
    if kind_inf is None:
        kind_inf = "infinite_equal_mass" if mass_ratio == 1 else _guess_kind(mu_inf, parity, mass_ratio)
    f0 = noninteracting_angular(int(round(mu0)), mass_ratio)
    finf = angular_function(mu_inf, parity, kind_inf, mass_ratio)
    k0 = line_strength(mass_ratio) * radial_integral(nu, mu0, nu, mu0, -1.0) * _rays_value_sq(f0)
    s = radial_integral(nu, mu0, nu, mu_inf) * angular_overlap(f0, finf)
    e0 = 2 * nu + mu0 + 1
    einf = 2 * nu + mu_inf + 1
    kex = exact_slope(nu, finf, mass_ratio) if kind_inf != "trivial" else 0.0
    return LimitPair(e0, einf, float(k0), float(s), kex,
                     f"nu={nu},p={parity:+d},mu0={mu0:g},muinf={mu_inf:.6g}")


def _guess_kind(mu: float, parity: int, mass_ratio: float) -> str:
    best = min(ginf_roots(parity, mass_ratio), key=lambda t: abs(t[0] - mu))
    return best[1]


@lru_cache(maxsize=None)
def _paired_states(parity: int, mass_ratio: float):
    """Adiabatic pairing within one parity sector.

    Interacting states only: the n-th g0 root connects to the n-th 1/g = 0
    root on the repulsive side and the (n+1)-th g0 root connects to it on the
    attractive side.  Equal-mass trivial states (mu a multiple of 3, blind to
    the interaction) are excluded from the count and map onto themselves.
    """
    ginf = ginf_roots(parity, mass_ratio)
    active = [i for i, (_, kind) in enumerate(ginf) if kind != "trivial"]
    g0 = g0_roots(parity, 3 * len(ginf) + 2)
    if mass_ratio == 1:
        g0 = [m for m in g0 if int(m) % 3]
    rep, att = {}, {}
    for n, i in enumerate(active):
        rep[i] = (g0[n], ginf[i][0])
        att[i] = (g0[n + 1], ginf[i][0])
    for i, (mu, kind) in enumerate(ginf):
        if kind == "trivial":
            rep[i] = att[i] = (mu, mu)
    return ginf, rep, att


def curve_pairs(parity: int, mass_ratio: float, index: int):
    """(repulsive pair, attractive pair, kind) for the index-th 1/g = 0 state."""
    ginf, rep, att = _paired_states(parity, mass_ratio)
    return rep[index], att[index], ginf[index][1]


def curve_limit_pairs(nu: int, parity: int, mass_ratio: float, index: int):
    (mu0r, muinf), (mu0a, _), kind = curve_pairs(parity, mass_ratio, index)
    rep = three_body_limit_pair(nu, mu0r, muinf, parity, mass_ratio, kind)
    att = three_body_limit_pair(nu, mu0a, muinf, parity, mass_ratio, kind)
    return rep, att, kind


def curve_energy(q: float, nu: int, parity: int, mass_ratio: float, index: int,
                 modified: bool = False) -> float:
    rep, att, kind = curve_limit_pairs(nu, parity, mass_ratio, index)
    if kind == "trivial":
        return rep.e_inf
    pair = rep if q <= 0 else att
    return energy_at_q(pair, q, modified)


def ground_energy(q: float, mass_ratio: float = 1.0, modified: bool = False) -> float:
    """Relative energy of the lowest 1/g = 0 curve of odd parity."""
    return curve_energy(q, 0, -1, mass_ratio, 0, modified)


def spectrum(mass_ratio: float, q_grid, e_max: float = 8.0, methods=("ansatz", "modified")):
    """Rows (q, label, parity, nu, energy, method) for every 1/g = 0 state below e_max."""
    rows = []
    for parity in (-1, 1):
        roots = ginf_roots(parity, mass_ratio)
        for nu in range(int(e_max // 2) + 1):
            for idx, (mu, kind) in enumerate(roots):
                if 2 * nu + mu + 1 > e_max:
                    break
                rep, att, _ = curve_limit_pairs(nu, parity, mass_ratio, idx)
                trivial = kind == "trivial"
                label = f"nu={nu},p={parity:+d},muinf={mu:.4f}" + (",trivial" if trivial else "")
                for method in methods:
                    for q in q_grid:
                        if trivial:
                            e = rep.e_inf
                        else:
                            pair = rep if q <= 0 else att
                            e = energy_at_q(pair, q, method == "modified")
                        rows.append((float(q), label, parity, nu, float(e), method))
    rows.sort(key=lambda r: (r[5], r[1], r[0]))
    return rows

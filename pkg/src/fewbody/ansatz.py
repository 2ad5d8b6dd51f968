"""Two-state interpolatory ansatz: optimal coefficients, energy, slopes.

The trial state mixes the non-interacting eigenstate |g0> with the
infinitely repulsive eigenstate |ginf>.  With V00 = g*k0 and s = <g0|ginf>
the stationary energies E' = E - E0 solve

    (1 - lam) E'^2 - (V00 + dE) E' + V00 dE = 0,     lam = s^2,

and the modified ansatz simply replaces lam by k0*K_exact/dE^2.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

INF = math.inf


class AnsatzError(ValueError):
    pass


@dataclass(frozen=True)
class LimitPair:
    e0: float
    e_inf: float
    k0: float
    overlap: float
    k_exact_inf: Optional[float] = None
    label: str = ""

    def __post_init__(self):
        if self.k0 < 0:
            raise AnsatzError("k0 must be non-negative")
        if abs(self.overlap) > 1 + 1e-12:
            raise AnsatzError(f"|overlap| = {abs(self.overlap)} exceeds 1")

    @property
    def delta_e(self) -> float:
        return self.e_inf - self.e0


@dataclass(frozen=True)
class CouplingPoint:
    g: float
    q: float

    @classmethod
    def from_g(cls, g: float) -> "CouplingPoint":
        if g == 0:
            return cls(0.0, -INF)
        if math.isinf(g):
            return cls(g, 0.0 if g > 0 else -0.0)
        return cls(g, -1.0 / g)

    @classmethod
    def from_q(cls, q: float) -> "CouplingPoint":
        return cls(g_from_q(q), q)


@dataclass(frozen=True)
class AnsatzResult:
    energy: float
    alpha_ratio: float
    branch: str
    anderson_sq: Optional[float]
    method: str = "ansatz"


def g_from_q(q: float) -> float:
    """g = -1/q with q = 0 mapped to +inf."""
    if q == 0:
        return INF
    return -1.0 / q


def trial_energy(pair: LimitPair, g: float, alpha0: float, alpha_inf: float) -> float:
    s = pair.overlap
    norm = alpha0 ** 2 + alpha_inf ** 2 + 2 * s * alpha0 * alpha_inf
    if norm <= 1e-14:
        raise AnsatzError("trial state has vanishing norm")
    num = g * pair.k0 * alpha0 ** 2 + pair.delta_e * alpha_inf ** 2
    return pair.e0 + num / norm


def _shifted_energy(v00: float, de: float, lam: float, branch: str) -> float:
    """Root E' of (1-lam)E'^2 - (v00+de)E' + v00*de = 0 on the requested branch."""
    # divide through by max(1, |v00|) so huge couplings cannot overflow
    scale = max(1.0, abs(v00))
    a = (1.0 - lam) / scale
    b = v00 / scale + de / scale
    c = (v00 / scale) * de
    disc = b * b - 4.0 * a * c
    if disc < 0:
        if disc < -1e-12 * max(1.0, b * b):
            raise AnsatzError("complex stationary energies")
        disc = 0.0
    d = math.sqrt(disc)
    if a == 0:
        return c / b
    if b == 0:
        r1, r2 = d / (2 * a), -d / (2 * a)
    else:
        big = (b + math.copysign(d, b)) / (2 * a)
        small = (c / a) / big if big != 0 else 0.0
        r1, r2 = big, small
    lo, hi = min(r1, r2), max(r1, r2)
    return lo if branch == "minus" else hi


def _ratio(v00: float, de: float, s: float, shifted: float) -> float:
    """alpha0/alpha_inf from the stationarity condition at energy E0 + shifted.

    Row of (H - E S) alpha = 0:  (v00 - E')a0 + (-E' s) ainf = 0.
    """
    den = v00 - shifted
    if den == 0:
        return INF
    return shifted * s / den


def optimal_coefficients(pair: LimitPair, g: float, branch: Optional[str] = None) -> float:
    """alpha0/alpha_inf of the stationary trial state (inf when the state is |g0>)."""
    if branch is None:
        branch = "minus" if g > 0 else "plus"
    if g == 0:
        return INF
    if math.isinf(g):
        return 0.0
    v00 = g * pair.k0
    de = pair.delta_e
    s = pair.overlap
    if v00 == 0:
        return INF
    if s == 0:
        shifted = _shifted_energy(v00, de, 0.0, branch)
        return INF if abs(shifted - v00) < abs(shifted - de) else 0.0
    # roots of  v00 s x^2 + (v00 - de) x - de s = 0, selected by energy
    shifted = _shifted_energy(v00, de, s * s, branch)
    return _ratio(v00, de, s, shifted)


def anderson_from_ratio(ratio: float, s: float) -> float:
    if math.isinf(ratio):
        return 1.0
    num = (ratio + s) ** 2
    den = ratio ** 2 + 1.0 + 2 * s * ratio
    return min(1.0, max(0.0, num / den))


def optimal_energy(pair: LimitPair, g: float, lambda_override: Optional[float] = None,
                   branch: Optional[str] = None) -> AnsatzResult:
    """Stationary energy of the two-state ansatz at coupling g.

    The minimum (minus branch) is used for g > 0, the maximum for g < 0.
    g may be +-inf.  With lambda_override the modified energy is returned and
    no trial state (hence no Anderson overlap) exists.
    """
    if branch is None:
        branch = "minus" if g > 0 else "plus"
    s = pair.overlap
    lam = s * s if lambda_override is None else lambda_override
    method = "ansatz" if lambda_override is None else "modified"
    if lambda_override is None and abs(s) >= 1 - 1e-12:
        raise AnsatzError("overlap of limit states is degenerate (|s| = 1)")
    if lambda_override is not None and lam >= 1:
        raise AnsatzError("lambda must be below 1")
    de = pair.delta_e
    if g == 0 or pair.k0 == 0:
        ratio = INF
        energy = pair.e0
    elif math.isinf(g):
        ratio = 0.0
        energy = pair.e_inf
    else:
        v00 = g * pair.k0
        shifted = _shifted_energy(v00, de, lam, branch)
        energy = pair.e0 + shifted
        ratio = _ratio(v00, de, s, shifted) if lambda_override is None else math.nan
    anderson = anderson_from_ratio(ratio, s) if lambda_override is None else None
    return AnsatzResult(energy, ratio, branch, anderson, method)


def energy_at_q(pair: LimitPair, q: float, modified: bool = False, branch: Optional[str] = None) -> float:
    """Convenience wrapper in the q = -1/g coordinate."""
    lam = modified_lambda(pair) if modified else None
    return optimal_energy(pair, g_from_q(q), lam, branch).energy


def strong_slope(pair: LimitPair) -> float:
    """dE_opt/dq at q = 0 of the unmodified ansatz."""
    if pair.k0 <= 0:
        raise AnsatzError("slope undefined for an interaction-inert state (k0 = 0)")
    return pair.delta_e ** 2 * pair.overlap ** 2 / pair.k0


def modified_lambda(pair: LimitPair) -> float:
    if pair.k_exact_inf is None:
        raise AnsatzError("modified ansatz needs the exact strong-coupling slope")
    de = pair.delta_e
    if de == 0:
        raise AnsatzError("degenerate limit energies")
    return pair.k0 * pair.k_exact_inf / de ** 2


def with_exact_slope(pair: LimitPair, k_exact: float) -> LimitPair:
    return replace(pair, k_exact_inf=k_exact)


def ansatz_matrices(pair: LimitPair, g: float):
    """(H, S) of the two-state problem in the {|g0>, |ginf>} basis, shifted by E0."""
    s = pair.overlap
    v00 = g * pair.k0
    de = pair.delta_e
    # cross element taken with H acting on the smooth |g0>: <g0|V|ginf> = 0
    # because |ginf> vanishes at contact, so only E0*s survives and cancels
    h = np.array([[v00, 0.0], [0.0, de]])
    smat = np.array([[1.0, s], [s, 1.0]])
    return h, smat

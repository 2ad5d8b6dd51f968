"""Special functions, root finding, quadrature and small eigenproblem kernels."""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.linalg
import scipy.optimize
from scipy import special


class NumericsError(ArithmeticError):
    """Raised when a kernel cannot deliver a result within its contract."""


class PoleError(NumericsError):
    pass


class DomainError(NumericsError):
    pass


class SymmetryError(NumericsError, ValueError):
    pass


class NotPositiveDefiniteError(NumericsError, np.linalg.LinAlgError):
    pass


class OrderBoundError(NumericsError, OverflowError):
    pass


class NoSignChangeError(NumericsError):
    pass


ROOT_TOL = 1e-12
EIG_RESIDUAL = 1e-10
HO_NMAX = 60
KUMMER_XMAX = 50.0


@dataclass(frozen=True)
class Bracket:
    lo: float
    hi: float

    def __post_init__(self):
        if not self.lo < self.hi:
            raise ValueError(f"bracket needs lo < hi, got [{self.lo}, {self.hi}]")


@dataclass(frozen=True)
class QuadratureRule:
    nodes: np.ndarray
    weights: np.ndarray
    kind: str

    def integrate(self, values) -> float:
        return float(np.dot(self.weights, values))


def gauss_hermite(n: int) -> QuadratureRule:
    """n-point rule for integrals against exp(-x^2)."""
    x, w = np.polynomial.hermite.hermgauss(n)
    return QuadratureRule(x, w, "gauss_hermite")


@lru_cache(maxsize=64)
def _leggauss(n: int):
    x, w = np.polynomial.legendre.leggauss(n)
    x.flags.writeable = False
    w.flags.writeable = False
    return x, w


def gauss_legendre(n: int, a: float = -1.0, b: float = 1.0) -> QuadratureRule:
    """n-point Gauss-Legendre rule mapped onto [a, b]."""
    x, w = _leggauss(n)
    half = 0.5 * (b - a)
    return QuadratureRule(half * x + 0.5 * (a + b), half * w, "gauss_legendre")


def _is_pole(x: float) -> bool:
    return x <= 0 and float(x).is_integer()


def log_gamma(x: float) -> tuple[float, int]:
    """Return (ln|Gamma(x)|, sign Gamma(x))."""
    if _is_pole(x):
        raise PoleError(f"Gamma has a pole at {x}")
    return float(special.gammaln(x)), int(special.gammasgn(x))


def kummer_1f1(a: float, b: float, x: float) -> float:
    """Confluent hypergeometric 1F1(a; b; x) by direct series.

    Terms are accumulated with exactly rounded summation, which keeps the
    alternating series for negative a accurate over |x| <= 50.
    """
    if _is_pole(b):
        raise PoleError(f"1F1 undefined for b = {b}")
    if abs(x) > KUMMER_XMAX:
        raise DomainError(f"|x| = {abs(x)} exceeds supported range {KUMMER_XMAX}")
    if x < 0:
        # Kummer transformation keeps all terms positive for a, b > 0
        return math.exp(x) * kummer_1f1(b - a, b, -x)
    term = 1.0
    terms = [1.0]
    n = 0
    while True:
        if a + n == 0:
            break
        term *= (a + n) * x / ((b + n) * (n + 1))
        terms.append(term)
        n += 1
        if n > 10 and abs(term) < 1e-17 * abs(math.fsum(terms)):
            break
        if n > 2000:
            raise DomainError("1F1 series did not converge")
    return math.fsum(terms)


def ho_eigenfunction(n: int, x):
    """Normalised oscillator eigenfunction psi_n(x), vectorised over x."""
    if n < 0:
        raise ValueError("n must be non-negative")
    if n > HO_NMAX:
        raise OrderBoundError(f"n = {n} above supported bound {HO_NMAX}")
    return ho_eigenfunctions(n, x)[n]


def ho_eigenfunctions(nmax: int, x) -> np.ndarray:
    """All psi_0..psi_nmax at x; shape (nmax+1,) + shape(x)."""
    x = np.asarray(x, dtype=float)
    out = np.empty((nmax + 1,) + x.shape)
    out[0] = np.pi ** -0.25 * np.exp(-0.5 * x * x)
    if nmax >= 1:
        out[1] = math.sqrt(2.0) * x * out[0]
    for k in range(1, nmax):
        out[k + 1] = (math.sqrt(2.0 / (k + 1)) * x * out[k]
                      - math.sqrt(k / (k + 1)) * out[k - 1])
    return out


def ho_derivatives(nmax: int, x) -> np.ndarray:
    """psi_n'(x) = sqrt(n/2) psi_{n-1} - sqrt((n+1)/2) psi_{n+1}."""
    psi = ho_eigenfunctions(nmax + 1, x)
    out = np.empty((nmax + 1,) + np.shape(x))
    for n in range(nmax + 1):
        lower = math.sqrt(n / 2) * psi[n - 1] if n > 0 else 0.0
        out[n] = lower - math.sqrt((n + 1) / 2) * psi[n + 1]
    return out


def laguerre_general(nu: int, mu: float, x):
    """Generalised Laguerre polynomial L_nu^mu(x) by upward recurrence."""
    if mu <= -1:
        raise DomainError("mu must exceed -1")
    x = np.asarray(x, dtype=float)
    prev = np.ones_like(x)
    if nu == 0:
        return prev if prev.ndim else float(prev)
    cur = 1.0 + mu - x
    for k in range(1, nu):
        prev, cur = cur, ((2 * k + 1 + mu - x) * cur - (k + mu) * prev) / (k + 1)
    return cur if np.ndim(cur) else float(cur)


def find_root(f, bracket: Bracket, tol: float = ROOT_TOL, maxiter: int = 200) -> float:
    """Bracketed root via Brent's method (bisection safeguarded)."""
    flo, fhi = f(bracket.lo), f(bracket.hi)
    if flo == 0:
        return bracket.lo
    if fhi == 0:
        return bracket.hi
    if np.sign(flo) == np.sign(fhi):
        raise NoSignChangeError(
            f"no sign change on [{bracket.lo}, {bracket.hi}]: f = {flo:.3e}, {fhi:.3e}")
    try:
        return scipy.optimize.brentq(f, bracket.lo, bracket.hi, xtol=tol,
                                     rtol=4 * np.finfo(float).eps, maxiter=maxiter)
    except RuntimeError as exc:
        raise NumericsError(str(exc)) from exc


def _check_symmetric(m: np.ndarray, name: str = "matrix"):
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"{name} must be square")
    scale = max(1.0, float(np.max(np.abs(m)))) if m.size else 1.0
    if np.max(np.abs(m - m.T), initial=0.0) > 1e-12 * scale:
        raise SymmetryError(f"{name} is not symmetric")
    return 0.5 * (m + m.T)


def symmetric_eig(matrix) -> tuple[np.ndarray, np.ndarray]:
    """Ascending eigenvalues and orthonormal eigenvectors (columns)."""
    m = _check_symmetric(matrix)
    w, v = scipy.linalg.eigh(m)
    return w, v


def generalized_eig_lowest(h, s) -> tuple[float, np.ndarray]:
    """Lowest pair of H v = E S v, with v normalised so that v^T S v = 1."""
    h = _check_symmetric(h, "H")
    s = _check_symmetric(s, "S")
    if np.linalg.eigvalsh(s)[0] <= 1e-12:
        raise NotPositiveDefiniteError("S is not positive definite; basis is linearly dependent")
    w, v = scipy.linalg.eigh(h, s)
    vec = v[:, 0]
    vec = vec / math.sqrt(vec @ s @ vec)
    return float(w[0]), vec

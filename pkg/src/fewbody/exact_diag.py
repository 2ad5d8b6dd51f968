"""Configuration-interaction oracle for N_A + N_B equal-mass fermions in a trap.

The bare contact interaction is replaced by a two-body effective interaction
in the relative oscillator basis whose spectrum is the exact two-body (Busch)
spectrum.  Lab-frame matrix elements follow from 1D oscillator recoupling
brackets, and a Lawson term beta * (H_cm - 1/2) pushes centre-of-mass
excitations out of the low spectrum.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional

import numpy as np
import scipy.linalg
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy import special

from .numerics import NumericsError, ho_eigenfunctions
from .two_body import busch_energy

DENSE_LIMIT = 2000
MAX_DIM = 2_000_000


class DimensionOverflowError(ValueError):
    pass


class ConvergenceError(NumericsError):
    pass


@dataclass(frozen=True)
class FockBasisState:
    up_modes: tuple
    down_modes: tuple

    def __post_init__(self):
        for modes in (self.up_modes, self.down_modes):
            if any(a <= b for a, b in zip(modes, modes[1:])):
                raise ValueError("modes must be strictly decreasing")

    @property
    def quanta(self) -> int:
        return sum(self.up_modes) + sum(self.down_modes)

    def energy(self) -> float:
        n = len(self.up_modes) + len(self.down_modes)
        return n / 2 + self.quanta


@dataclass(frozen=True)
class ModelSpace:
    """n_max_rel: relative cutoff of the effective interaction.
    e_max_quanta: excitation quanta allowed above the non-interacting floor."""
    n_max_rel: int = 40
    e_max_quanta: int = 14
    lawson_weight: float = 50.0

    def __post_init__(self):
        if self.lawson_weight < 0:
            raise ValueError("Lawson weight must be non-negative")
        if self.n_max_rel < 0 or self.e_max_quanta < 0:
            raise ValueError("cutoffs must be non-negative")


DEFAULT_QUANTA = {2: 30, 3: 24, 4: 20, 5: 20, 6: 20}


def default_model_space(n_total: int) -> ModelSpace:
    """Cutoffs at which ground energies up to g ~ 20 have settled below the ansatz."""
    return ModelSpace(40, DEFAULT_QUANTA.get(n_total, 16), 50.0)


def fermi_floor(n: int) -> int:
    return n * (n - 1) // 2


# --- effective interaction ------------------------------------------------------

def _dG_dE(energy: float) -> float:
    """Derivative of G(E) = sum_even psi_n(0)^2/(n + 1/2 - E) = Gamma(a)/(2 Gamma(a+1/2))."""
    a = (1.0 - 2.0 * energy) / 4.0
    b = a + 0.5
    if a > 0:
        # below the lowest pole: log form stays finite for deep states
        ratio = math.exp(special.gammaln(a) - special.gammaln(b))
        return -0.25 * ratio * (special.digamma(a) - special.digamma(b))
    ga = special.gamma(a)
    rb = special.rgamma(b)
    if rb == 0.0:
        # b at a pole of Gamma: psi(b) rgamma(b) -> -(-1)^k k!
        k = int(round(-b))
        prod_b = -((-1) ** k) * math.factorial(k)
    else:
        prod_b = special.digamma(b) * rb
    return -0.25 * ga * (special.digamma(a) * rb - prod_b)


def busch_spectrum(g: float, count: int) -> np.ndarray:
    """Lowest `count` even relative energies at coupling g (deep state first for g < 0)."""
    if g == 0:
        return np.array([2 * k + 0.5 for k in range(count)])
    q = 0.0 if math.isinf(g) else -1.0 / g
    levels = []
    if g < 0 and not math.isinf(g):
        levels.append(busch_energy(q, 0, deep=True))
    k = 0
    while len(levels) < count:
        levels.append(busch_energy(q, k))
        k += 1
    return np.array(levels)


@lru_cache(maxsize=64)
def _effective_cached(n_max_rel: int, g: float):
    even = np.arange(0, n_max_rel + 1, 2)
    p = len(even)
    if g == 0:
        return np.diag(np.arange(n_max_rel + 1) + 0.5)
    energies = busch_spectrum(g, p)
    psi0 = ho_eigenfunctions(n_max_rel, 0.0)[even]
    b = np.empty((p, p))
    for k, e in enumerate(energies):
        b[:, k] = psi0 / (even + 0.5 - e) / math.sqrt(_dG_dE(e))
    # symmetric orthogonalisation of the truncated eigenvector block
    w, v = np.linalg.eigh(b.T @ b)
    if w[0] <= 1e-14:
        raise NumericsError("P-space projection of the two-body states is singular")
    bt = b @ (v @ np.diag(w ** -0.5) @ v.T)
    h_even = bt @ np.diag(energies) @ bt.T
    h = np.diag(np.arange(n_max_rel + 1) + 0.5)
    h[np.ix_(even, even)] = 0.5 * (h_even + h_even.T)
    return h


def effective_two_body(n_max_rel: int, g: float) -> np.ndarray:
    """Relative-basis effective Hamiltonian (kinetic + trap + interaction)."""
    if n_max_rel > 60:
        raise ValueError("n_max_rel above 60 is not supported")
    return _effective_cached(int(n_max_rel), float(g)).copy()


def effective_interaction(n_max_rel: int, g: float) -> np.ndarray:
    return effective_two_body(n_max_rel, g) - np.diag(np.arange(n_max_rel + 1) + 0.5)


# --- recoupling ------------------------------------------------------------

@lru_cache(maxsize=None)
def _bracket_table(e_total: int) -> np.ndarray:
    """B[a, b, N] = <N, n = a+b-N | a, b> for X = (x1+x2)/sqrt2, x = (x1-x2)/sqrt2."""
    size = e_total + 1
    out = np.zeros((size, size, size))
    lf = special.gammaln(np.arange(size + 1) + 1)
    for a in range(size):
        for b in range(size - a):
            for big in range(a + b + 1):
                n = a + b - big
                tot = 0.0
                for i in range(max(0, big - b), min(a, big) + 1):
                    tot += math.comb(a, i) * math.comb(b, big - i) * (-1) ** (n - (a - i))
                pref = math.exp(0.5 * (lf[big] + lf[n] - lf[a] - lf[b]) - 0.5 * (a + b) * math.log(2))
                out[a, b, big] = pref * tot
    return out


def recoupling_bracket(big: int, n: int, a: int, b: int) -> float:
    if big + n != a + b:
        return 0.0
    return float(_bracket_table(a + b)[a, b, big])


def lab_interaction(e_total: int, n_max_rel: int, g: float) -> dict:
    """{(c, d): [(a, b, <a b|V|c d>)]} for single-particle orbitals with a+b, c+d <= e_total.

    The effective interaction is built in the relative space n <= min(n_max_rel, e_total),
    i.e. matched to the relative quanta the many-body space can reach; pairs
    beyond n_max_rel are left non-interacting.
    """
    n_rel = min(n_max_rel, e_total)
    veff = np.zeros((e_total + 1, e_total + 1))
    veff[:n_rel + 1, :n_rel + 1] = effective_interaction(n_rel, g)
    br = _bracket_table(e_total)
    pairs = [(a, q - a) for q in range(e_total + 1) for a in range(q + 1)]
    pa = np.array([p[0] for p in pairs])
    pb = np.array([p[1] for p in pairs])
    pq = pa + pb
    vmat = np.zeros((len(pairs), len(pairs)))
    for big in range(e_total + 1):
        # relative quanta of each pair once the CM carries `big`
        rel = pq - big
        ok = (rel >= 0) & (rel % 2 == 0)
        idx = np.nonzero(ok)[0]
        if idx.size == 0:
            continue
        coef = br[pa[idx], pb[idx], big]
        vmat[np.ix_(idx, idx)] += np.outer(coef, coef) * veff[np.ix_(rel[idx], rel[idx])]
    out = {}
    for j, (c, d) in enumerate(pairs):
        col = vmat[:, j]
        nz = np.nonzero(np.abs(col) > 1e-15)[0]
        out[(c, d)] = [(pairs[i][0], pairs[i][1], float(col[i])) for i in nz]
    return out


# --- basis and Hamiltonian ---------------------------------------------------

def _configs(n: int, max_quanta: int):
    """Strictly decreasing n-tuples with sum <= max_quanta."""
    if n == 0:
        return [()]
    out = []
    for combo in itertools.combinations(range(max_quanta, -1, -1), n):
        if sum(combo) <= max_quanta:
            out.append(combo)
    return out


def build_basis(n_a: int, n_b: int, e_max_quanta: int, parity: Optional[int] = None) -> list:
    """All Fock states with total quanta <= e_max_quanta, lexicographic order.

    parity = +1/-1 keeps only even/odd total quanta.
    """
    ups = _configs(n_a, e_max_quanta)
    downs = _configs(n_b, e_max_quanta)
    states = []
    for u in ups:
        qu = sum(u)
        for d in downs:
            q = qu + sum(d)
            if q > e_max_quanta:
                continue
            if parity is not None and (-1) ** q != parity:
                continue
            states.append(FockBasisState(u, d))
            if len(states) > MAX_DIM:
                raise DimensionOverflowError(f"basis exceeds {MAX_DIM} states")
    states.sort(key=lambda s: (s.quanta, s.up_modes, s.down_modes))
    return states


def _remove(modes: tuple, m: int):
    p = modes.index(m)
    return modes[:p] + modes[p + 1:], (-1) ** p


def _insert(modes: tuple, m: int):
    if m in modes:
        return None, 0
    p = 0
    while p < len(modes) and modes[p] > m:
        p += 1
    return modes[:p] + (m,) + modes[p:], (-1) ** p


def _lowering(basis: list) -> sp.csr_matrix:
    """O = sum over both species of sqrt(m) c+_{m-1} c_m (N_total * CM lowering).

    O flips parity, so its images are indexed on the fly rather than looked up
    in the (possibly parity-restricted) basis; only O^T O is ever needed.
    """
    rows, cols, vals = [], [], []
    target = {}
    for j, st in enumerate(basis):
        for species in (0, 1):
            modes = st.up_modes if species == 0 else st.down_modes
            for m in modes:
                if m == 0:
                    continue
                rest, s1 = _remove(modes, m)
                new, s2 = _insert(rest, m - 1)
                if new is None:
                    continue
                key = (new, st.down_modes) if species == 0 else (st.up_modes, new)
                rows.append(target.setdefault(key, len(target)))
                cols.append(j)
                vals.append(s1 * s2 * math.sqrt(m))
    return sp.csr_matrix((vals, (rows, cols)), shape=(max(len(target), 1), len(basis)))


def assemble_hamiltonian(basis: list, g: float, model_space: ModelSpace) -> sp.csr_matrix:
    if not basis:
        raise ValueError("empty basis")
    e_total = max(st.quanta for st in basis)
    n_a = len(basis[0].up_modes)
    n_b = len(basis[0].down_modes)
    index = {(st.up_modes, st.down_modes): i for i, st in enumerate(basis)}
    dim = len(basis)
    rows, cols, vals = [], [], []
    if g != 0:
        table = lab_interaction(e_total, model_space.n_max_rel, g)
        for j, st in enumerate(basis):
            for c in st.up_modes:
                up_rest, s_c = _remove(st.up_modes, c)
                for d in st.down_modes:
                    dn_rest, s_d = _remove(st.down_modes, d)
                    for a, b, v in table[(c, d)]:
                        up_new, s_a = _insert(up_rest, a)
                        if up_new is None:
                            continue
                        dn_new, s_b = _insert(dn_rest, b)
                        if dn_new is None:
                            continue
                        i = index.get((up_new, dn_new))
                        if i is None:
                            continue
                        rows.append(i)
                        cols.append(j)
                        vals.append(s_c * s_d * s_a * s_b * v)
    h = sp.csr_matrix((vals, (rows, cols)), shape=(dim, dim))
    h0 = np.array([st.energy() for st in basis])
    h = h + sp.diags(h0)
    if model_space.lawson_weight:
        o = _lowering(basis)
        h = h + (model_space.lawson_weight / (n_a + n_b)) * (o.T @ o)
    h = 0.5 * (h + h.T)
    return h.tocsr()


def cm_excitation(basis: list, vec: np.ndarray) -> float:
    """<N_cm> of a normalised state."""
    n = len(basis[0].up_modes) + len(basis[0].down_modes)
    o = _lowering(basis)
    w = o @ vec
    return float(w @ w) / n


def lowest_states(h, k: int = 1, tol: float = 1e-10):
    """k lowest eigenpairs (ascending), dense below DENSE_LIMIT, Lanczos above."""
    dim = h.shape[0]
    k = min(k, dim)
    if dim <= DENSE_LIMIT:
        dense = h.toarray() if sp.issparse(h) else np.asarray(h)
        w, v = scipy.linalg.eigh(dense, subset_by_index=[0, k - 1])
        return w, v
    # fixed random start: a uniform vector can miss whole symmetry sectors
    v0 = np.random.default_rng(0).standard_normal(dim)
    try:
        w, v = spla.eigsh(h, k=k, which="SA", v0=v0, tol=tol, maxiter=20 * dim)
    except spla.ArpackNoConvergence as exc:
        raise ConvergenceError(f"Lanczos did not converge: {len(exc.eigenvalues)} of {k} pairs") from exc
    order = np.argsort(w)
    w, v = w[order], v[:, order]
    res = np.linalg.norm(h @ v - v * w, axis=0)
    if np.any(res > 1e-6 * max(1.0, np.max(np.abs(w)))):
        raise ConvergenceError(f"residuals too large: {res.max():.2e}")
    return w, v


def _total_cutoff(n_a: int, n_b: int, model_space: ModelSpace) -> int:
    return fermi_floor(n_a) + fermi_floor(n_b) + model_space.e_max_quanta


def intrinsic_ground_energy(n_a: int, n_b: int, g: float,
                            model_space: Optional[ModelSpace] = None) -> float:
    """Total ground energy (centre of mass in its ground state)."""
    ms = model_space or default_model_space(n_a + n_b)
    e_total = _total_cutoff(n_a, n_b, ms)
    floor = fermi_floor(n_a) + fermi_floor(n_b)
    basis = build_basis(n_a, n_b, e_total, parity=(-1) ** floor)
    h = assemble_hamiltonian(basis, g, ms)
    w, _ = lowest_states(h, 1)
    return float(w[0])


def spectrum(n_a: int, n_b: int, g: float, k: int, model_space: Optional[ModelSpace] = None,
             parity: Optional[int] = None):
    """(energies, vectors, basis) of the k lowest states in an optional parity sector."""
    ms = model_space or default_model_space(n_a + n_b)
    e_total = _total_cutoff(n_a, n_b, ms)
    basis = build_basis(n_a, n_b, e_total, parity)
    h = assemble_hamiltonian(basis, g, ms)
    w, v = lowest_states(h, k)
    return w, v, basis


def _hamiltonian_at_q(basis, q, ms):
    g = math.inf if q == 0 else -1.0 / q
    return assemble_hamiltonian(basis, g, ms).toarray()


def track_state(n_a: int, n_b: int, q_targets, start_energy: float,
                model_space: Optional[ModelSpace] = None, parity: Optional[int] = None,
                dq: float = 0.01, window: float = 2.0) -> np.ndarray:
    """Total energies of the state that sits nearest start_energy at 1/g = 0,
    followed through q by maximal eigenvector overlap.

    Interaction-blind states (zero expectation of the interaction) are never
    selected, so degeneracies with trivial states do not derail the tracking.
    """
    ms = model_space or default_model_space(n_a + n_b)
    e_total = _total_cutoff(n_a, n_b, ms)
    basis = build_basis(n_a, n_b, e_total, parity)
    q_targets = np.asarray(q_targets, dtype=float)
    probe = assemble_hamiltonian(basis, -1.0, ms).toarray() - assemble_hamiltonian(basis, 0.0, ms).toarray()

    def active(v):
        return np.abs(np.einsum("ij,ij->j", v, probe @ v)) > 1e-8

    w, v = scipy.linalg.eigh(_hamiltonian_at_q(basis, 0.0, ms))
    ok = np.nonzero(active(v))[0]
    i0 = ok[np.argmin(np.abs(w[ok] - start_energy))]
    out = np.full(len(q_targets), np.nan)
    out[q_targets == 0] = w[i0]
    for sign in (-1.0, 1.0):
        side = q_targets[q_targets * sign > 0]
        if side.size == 0:
            continue
        qmax = np.max(np.abs(side))
        steps = np.union1d(np.arange(dq, qmax + 0.5 * dq, dq), np.abs(side))
        cur, e_cur = v[:, i0], w[i0]
        for q in steps:
            w_s, v_s = scipy.linalg.eigh(_hamiltonian_at_q(basis, sign * q, ms),
                                         subset_by_value=(e_cur - window, e_cur + window))
            if w_s.size == 0:
                raise ConvergenceError(f"no eigenvalue within {window} of {e_cur} at q = {sign * q}")
            ov = np.abs(v_s.T @ cur)
            ov[~active(v_s)] = -1.0
            j = int(np.argmax(ov))
            cur, e_cur = v_s[:, j] * np.sign(v_s[:, j] @ cur), w_s[j]
            hit = np.isclose(q_targets, sign * q, atol=1e-12)
            out[hit] = e_cur
    return out

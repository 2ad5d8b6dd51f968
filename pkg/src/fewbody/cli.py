"""Command-line front end: spectrum sweeps, oracle runs and ansatz-vs-oracle reports.

Exit codes: 0 success, 2 invalid input, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import exact_diag, impurity, svm, three_body, two_body
from .ansatz import AnsatzError, g_from_q
from .numerics import NumericsError
from .tables import OracleReport, ReportRow, SpectrumRow, SpectrumTable, read_experiment_csv

EXIT_OK, EXIT_INPUT, EXIT_NUMERIC = 0, 2, 3
COMMANDS = ("two-body", "three-body", "impurity", "oracle-ci", "oracle-svm", "compare", "anderson")
RELATIVE_CM = 0.5  # centre-of-mass zero point removed from CI totals


class InputError(ValueError):
    pass


@dataclass
class RunConfig:
    command: str
    q_grid: Optional[list] = None
    g_grid: Optional[list] = None
    mass_ratio: float = 1.0
    n: int = 3
    method: str = "both"
    output: Optional[str] = None
    fmt: str = "csv"
    seed: int = 0
    levels: int = 4
    e_max: float = 8.0
    system: str = "2+1"
    oracle: str = "ci"
    e_max_quanta: Optional[int] = None
    n_max_rel: int = 40
    alpha: int = 100
    beta: int = 100
    basis_cap: int = 300
    experiment: Optional[str] = None

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise InputError(f"unknown command {self.command!r}")
        if (self.q_grid is None) == (self.g_grid is None):
            raise InputError("give exactly one of --q-grid / --g-grid")
        grid = self.grid
        if not grid or not all(math.isfinite(x) for x in grid):
            raise InputError("grid must be non-empty and finite")
        if any(b < a for a, b in zip(grid, grid[1:])):
            raise InputError("grid must be sorted")
        if self.method not in ("ansatz", "modified", "both"):
            raise InputError(f"unknown method {self.method!r}")
        if self.fmt not in ("csv", "json"):
            raise InputError(f"unknown format {self.fmt!r}")

    @property
    def grid(self) -> list:
        return self.q_grid if self.q_grid is not None else self.g_grid

    @property
    def methods(self) -> tuple:
        return ("ansatz", "modified") if self.method == "both" else (self.method,)

    def points(self):
        """(q, g) pairs in grid order."""
        if self.q_grid is not None:
            return [(q, g_from_q(q)) for q in self.q_grid]
        return [(-1.0 / g if g else -math.inf, g) for g in self.g_grid]


def parse_grid(text: str) -> list:
    """'start:step:stop' (inclusive) or a comma list."""
    try:
        if ":" in text:
            start, step, stop = (float(t) for t in text.split(":"))
            if step <= 0 or stop < start:
                raise ValueError("need step > 0 and stop >= start")
            n = int(math.floor((stop - start) / step + 1e-9))
            return [round(start + i * step, 12) for i in range(n + 1)]
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise InputError(f"bad grid {text!r}: {exc}") from exc


def _threads() -> int:
    raw = os.environ.get("ANSATZ_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError as exc:
        raise InputError(f"ANSATZ_THREADS must be an integer, got {raw!r}") from exc


def _pmap(fn, items):
    """Map over grid points with at most ANSATZ_THREADS workers; order preserved."""
    items = list(items)
    n = _threads()
    if n == 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))


# --- commands --------------------------------------------------------------------

def _two_body(cfg: RunConfig) -> SpectrumTable:
    table = SpectrumTable()
    pts = cfg.points()
    for k in range(cfg.levels):
        label = f"level={k}"
        exact = _pmap(lambda p: two_body.busch_energy(p[0], k), pts)
        for (q, g), e in zip(pts, exact):
            table.add(SpectrumRow(q, g, label, 1, None, e, "exact"))
        for m in cfg.methods:
            vals = _pmap(lambda p: two_body.ansatz_energy(p[0], k, m == "modified"), pts)
            for (q, g), e in zip(pts, vals):
                table.add(SpectrumRow(q, g, label, 1, None, e, m))
    return table


def _three_body(cfg: RunConfig) -> SpectrumTable:
    qs = [q for q, _ in cfg.points()]
    rows = three_body.spectrum(cfg.mass_ratio, qs, cfg.e_max, cfg.methods)
    table = SpectrumTable()
    for q, label, parity, nu, e, m in rows:
        table.add(SpectrumRow(q, g_from_q(q), label, parity, nu, e, m))
    return table


def _check_impurity_grid(cfg: RunConfig):
    for _, g in cfg.points():
        if g < 0:
            raise InputError("impurity curves are available for g >= 0 only")


def _impurity(cfg: RunConfig) -> SpectrumTable:
    _check_impurity_grid(cfg)
    table = SpectrumTable()
    pts = cfg.points()
    for m in cfg.methods:
        res = _pmap(lambda p: impurity.ground_energy(cfg.n, p[1], m), pts)
        for (q, g), r in zip(pts, res):
            table.add(SpectrumRow(q, g, f"N={cfg.n}", 0, None, r.energy, m, r.anderson_sq))
    return table


def _anderson(cfg: RunConfig) -> SpectrumTable:
    _check_impurity_grid(cfg)
    table = SpectrumTable()
    pts = cfg.points()
    res = _pmap(lambda p: impurity.ground_energy(cfg.n, p[1]), pts)
    for (q, g), r in zip(pts, res):
        table.add(SpectrumRow(q, g, f"N={cfg.n}", 0, None, r.energy, "ansatz", r.anderson_sq))
    return table


def _parse_system(text: str):
    try:
        a, b = (int(t) for t in text.split("+"))
    except ValueError as exc:
        raise InputError(f"system must look like '2+1', got {text!r}") from exc
    if a < 1 or b != 1 or a + b > impurity.N_MAX:
        raise InputError(f"unsupported system {text!r}: use N-1+1 with N <= {impurity.N_MAX}")
    return a, b


def _model_space(cfg: RunConfig, n_total: int):
    ms = exact_diag.default_model_space(n_total)
    em = cfg.e_max_quanta if cfg.e_max_quanta is not None else ms.e_max_quanta
    return exact_diag.ModelSpace(cfg.n_max_rel, em, ms.lawson_weight)


def _ci_energies(cfg: RunConfig, a: int, b: int) -> list:
    """Total CI energies along the grid; 2+1 follows the 1/g = 0 ground through q > 0."""
    ms = _model_space(cfg, a + b)
    pts = cfg.points()
    if (a, b) == (2, 1) and any(q > 0 for q, _ in pts):
        start = 4.0 + RELATIVE_CM
        return list(exact_diag.track_state(2, 1, [q for q, _ in pts], start, ms, parity=-1))
    for _, g in pts:
        if g < 0 and (a, b) != (1, 1):
            raise InputError("negative g needs the tracked 2+1 continuation or the 1+1 system")
    if (a, b) == (1, 1):
        # lowest even state; for g < 0 the first excited even state continues the ground
        def one(p):
            w, _, _ = exact_diag.spectrum(1, 1, p[1], 2, ms, parity=1)
            return float(w[1] if p[1] < 0 else w[0])
        return _pmap(one, pts)
    return _pmap(lambda p: exact_diag.intrinsic_ground_energy(a, b, p[1], ms), pts)


def _oracle_ci(cfg: RunConfig) -> SpectrumTable:
    a, b = _parse_system(cfg.system)
    table = SpectrumTable()
    for (q, g), e in zip(cfg.points(), _ci_energies(cfg, a, b)):
        table.add(SpectrumRow(q, g, f"{a}+{b}", 0, None, e, "ci"))
    return table


def _svm_config(cfg: RunConfig):
    return svm.SvmConfig(cfg.alpha, cfg.beta, cfg.seed, cfg.basis_cap)


def _svm_energies(cfg: RunConfig) -> list:
    pts = cfg.points()
    for _, g in pts:
        if g < 0:
            raise InputError("the SVM oracle covers the repulsive ground state (g >= 0) only")
    conf = _svm_config(cfg)
    return _pmap(lambda p: svm.svm_ground_energy(min(p[1], 1e8), cfg.mass_ratio, conf).energy, pts)


def _oracle_svm(cfg: RunConfig) -> SpectrumTable:
    table = SpectrumTable()
    for (q, g), e in zip(cfg.points(), _svm_energies(cfg)):
        table.add(SpectrumRow(q, g, f"2+1,M/m={cfg.mass_ratio}", -1, 0, e, "svm"))
    return table


def _compare(cfg: RunConfig) -> OracleReport:
    a, b = _parse_system(cfg.system)
    pts = cfg.points()
    report = OracleReport(f"{a}+{b}", cfg.oracle, n_majority=a)
    if cfg.oracle == "busch" or (cfg.oracle == "ci" and (a, b) == (1, 1)):
        if (a, b) != (1, 1):
            raise InputError("the Busch oracle applies to 1+1 only")
        if cfg.oracle == "busch":
            oracle = [two_body.busch_energy(q, 0) for q, _ in pts]
        else:
            oracle = [e - RELATIVE_CM for e in _ci_energies(cfg, a, b)]
        model = {m: [two_body.ansatz_energy(q, 0, m == "modified") for q, _ in pts] for m in cfg.methods}
    elif cfg.oracle in ("ci", "svm") and (a, b) == (2, 1):
        if cfg.oracle == "ci":
            if cfg.mass_ratio != 1.0:
                raise InputError("the CI oracle is implemented for equal masses")
            oracle = [e - RELATIVE_CM for e in _ci_energies(cfg, a, b)]
        else:
            oracle = _svm_energies(cfg)
        model = {m: [three_body.ground_energy(q, cfg.mass_ratio, m == "modified") for q, _ in pts]
                 for m in cfg.methods}
    elif cfg.oracle == "ci":
        _check_impurity_grid(cfg)
        oracle = _ci_energies(cfg, a, b)
        model = {m: [impurity.ground_energy(a + b, g, m).energy for _, g in pts] for m in cfg.methods}
    else:
        raise InputError(f"oracle {cfg.oracle!r} is not available for {cfg.system}")
    for m in cfg.methods:
        for (q, g), e, o in zip(pts, model[m], oracle):
            report.rows.append(ReportRow(q, g, m, float(e), float(o)))
    return report


def run(cfg: RunConfig, stdout=None) -> int:
    stdout = stdout or sys.stdout
    handlers = {"two-body": _two_body, "three-body": _three_body, "impurity": _impurity,
                "anderson": _anderson, "oracle-ci": _oracle_ci, "oracle-svm": _oracle_svm,
                "compare": _compare}
    result = handlers[cfg.command](cfg)
    if cfg.experiment and isinstance(result, SpectrumTable):
        for q, e, _ in read_experiment_csv(cfg.experiment):
            result.add(SpectrumRow(q, g_from_q(q), "experiment", 0, None, e, "experiment",
                                   source="experiment"))
    text = result.to_json() if cfg.fmt == "json" else result.to_csv()
    if cfg.output:
        with open(cfg.output, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        stdout.write(text)
    if isinstance(result, OracleReport):
        print(result.summary(), file=sys.stderr)
    return EXIT_OK


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        # one-line diagnostic and exit code 2 through main
        raise InputError(message)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="fewbody", description=__doc__.splitlines()[0])
    p.add_argument("command", choices=COMMANDS)
    grid = p.add_mutually_exclusive_group(required=True)
    grid.add_argument("--q-grid", help="start:step:stop (inclusive) or comma list, q = -1/g")
    grid.add_argument("--g-grid", help="start:step:stop (inclusive) or comma list")
    p.add_argument("--mass-ratio", type=float, default=1.0, help="impurity to majority mass M/m")
    p.add_argument("--n", type=int, default=3, help="particle number for impurity systems")
    p.add_argument("--method", default="both", choices=("ansatz", "modified", "both"))
    p.add_argument("--levels", type=int, default=4)
    p.add_argument("--e-max", type=float, default=8.0, help="three-body spectrum energy cap")
    p.add_argument("--system", default="2+1")
    p.add_argument("--oracle", default="ci", choices=("ci", "svm", "busch"))
    p.add_argument("--e-max-quanta", type=int, default=None, help="CI excitation quanta")
    p.add_argument("--n-max-rel", type=int, default=40)
    p.add_argument("--alpha", type=int, default=100, help="SVM starting trials")
    p.add_argument("--beta", type=int, default=100, help="SVM candidates per growth step")
    p.add_argument("--basis-cap", type=int, default=300)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--experiment", help="CSV of measured points (q,energy[,error]) to overlay")
    p.add_argument("--output", "-o")
    p.add_argument("--format", dest="fmt", default="csv", choices=("csv", "json"))
    return p


def _join_grid_values(argv: list) -> list:
    """Let grids start with a minus sign: '--q-grid -3:0.1:3' -> '--q-grid=-3:0.1:3'."""
    out, i = [], 0
    while i < len(argv):
        tok = argv[i]
        if tok in ("--q-grid", "--g-grid") and i + 1 < len(argv):
            out.append(f"{tok}={argv[i + 1]}")
            i += 2
            continue
        out.append(tok)
        i += 1
    return out


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = build_parser().parse_args(_join_grid_values(argv))
        cfg = RunConfig(
            command=args.command,
            q_grid=parse_grid(args.q_grid) if args.q_grid else None,
            g_grid=parse_grid(args.g_grid) if args.g_grid else None,
            mass_ratio=args.mass_ratio, n=args.n, method=args.method, output=args.output,
            fmt=args.fmt, seed=args.seed, levels=args.levels, e_max=args.e_max,
            system=args.system, oracle=args.oracle, e_max_quanta=args.e_max_quanta,
            n_max_rel=args.n_max_rel, alpha=args.alpha, beta=args.beta,
            basis_cap=args.basis_cap, experiment=args.experiment)
        return run(cfg)
    except (InputError, impurity.UnsupportedSystemError, svm.SvmError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (NumericsError, AnsatzError, exact_diag.ConvergenceError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())

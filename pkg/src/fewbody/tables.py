"""Tabular results: spectrum rows and ansatz-vs-oracle reports, CSV/JSON I/O."""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field, fields
from typing import Optional

SIG_DIGITS = 12


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float):
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return f"{x:.{SIG_DIGITS}g}"
    return str(x)


@dataclass(frozen=True)
class SpectrumRow:
    q: float
    g: float
    state_label: str
    parity: int
    nu: Optional[int]
    energy: float
    method: str
    anderson_sq: Optional[float] = None
    source: str = "computed"


@dataclass
class SpectrumTable:
    rows: list = field(default_factory=list)

    def add(self, row: SpectrumRow):
        if not math.isfinite(row.energy):
            raise ValueError(f"non-finite energy in row {row}")
        self.rows.append(row)

    def to_csv(self) -> str:
        return _csv([f.name for f in fields(SpectrumRow)], [asdict(r) for r in self.rows])

    def to_json(self) -> str:
        return json.dumps({"kind": "spectrum", "rows": [asdict(r) for r in self.rows]}, indent=1)

    @classmethod
    def from_json(cls, text: str) -> "SpectrumTable":
        data = json.loads(text)
        return cls([SpectrumRow(**r) for r in data["rows"]])


@dataclass(frozen=True)
class ReportRow:
    q: float
    g: float
    method: str
    energy: float
    oracle_energy: float

    @property
    def abs_dev(self) -> float:
        return abs(self.energy - self.oracle_energy)

    @property
    def rel_dev(self) -> float:
        return self.abs_dev / abs(self.oracle_energy) if self.oracle_energy else math.inf


@dataclass
class OracleReport:
    system: str
    oracle: str
    rows: list = field(default_factory=list)
    n_majority: int = 1

    def max_abs(self, method: Optional[str] = None) -> float:
        devs = [r.abs_dev for r in self.rows if method is None or r.method == method]
        return max(devs) if devs else 0.0

    def methods(self) -> list:
        return sorted({r.method for r in self.rows})

    def summary(self) -> str:
        parts = [f"{m}: max|dE| = {self.max_abs(m):.3e}" for m in self.methods()]
        return f"{self.system} vs {self.oracle}: " + "; ".join(parts)

    def _dicts(self):
        out = []
        for r in self.rows:
            d = asdict(r)
            d["abs_dev"] = r.abs_dev
            d["rel_dev"] = r.rel_dev
            d["abs_dev_per_majority"] = r.abs_dev / self.n_majority
            out.append(d)
        return out

    def to_csv(self) -> str:
        cols = ["q", "g", "method", "energy", "oracle_energy", "abs_dev", "rel_dev",
                "abs_dev_per_majority"]
        return _csv(cols, self._dicts())

    def to_json(self) -> str:
        return json.dumps({"kind": "oracle_report", "system": self.system, "oracle": self.oracle,
                           "n_majority": self.n_majority, "rows": [asdict(r) for r in self.rows],
                           "max_abs": {m: self.max_abs(m) for m in self.methods()}}, indent=1)

    @classmethod
    def from_json(cls, text: str) -> "OracleReport":
        data = json.loads(text)
        return cls(data["system"], data["oracle"], [ReportRow(**r) for r in data["rows"]],
                   data.get("n_majority", 1))


def _csv(columns, dict_rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for d in dict_rows:
        w.writerow([_fmt(d[c]) for c in columns])
    return buf.getvalue()


def read_experiment_csv(path) -> list:
    """Rows (q, energy, error) of externally measured points, tagged source=experiment.

    Expected header: q,energy[,error].  No measured data ship with the package.
    """
    out = []
    with open(path, newline="", encoding="utf-8") as fh:
        for rec in csv.DictReader(fh):
            err = rec.get("error")
            out.append((float(rec["q"]), float(rec["energy"]), float(err) if err else None))
    return out

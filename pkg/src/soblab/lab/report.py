"""Inequality reports and their CSV / JSON serialization."""
from __future__ import annotations

import csv
import hashlib
import io
import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from ..errors import ConfigurationError
from ..measures import GridField, LebesgueMeasure, PointMeasure

CSV_COLUMNS = ("case", "params_json", "lhs", "rhs", "ratio", "h", "levels",
               "runtime_ms", "input_digest")

# Flags explaining a non-finite or deliberately violated ratio.
FLAG_INFINITE_RHS = "infinite-rhs"
FLAG_COUNTEREXAMPLE = "counterexample"


def ratio_of(lhs: float, rhs: float) -> float:
    """``lhs / rhs`` with ``0/0 = 0`` and ``x/0 = inf``."""
    if rhs == 0:
        return 0.0 if lhs == 0 else math.inf
    if math.isinf(rhs):
        return 0.0 if math.isfinite(lhs) else math.nan
    return lhs / rhs


def _feed(hsh, obj):
    if obj is None:
        hsh.update(b"none")
    elif isinstance(obj, GridField):
        hsh.update(b"grid")
        hsh.update(np.asarray(obj.origin, "<f8").tobytes())
        hsh.update(np.float64(obj.h).tobytes())
        hsh.update(np.asarray(obj.shape, "<i8").tobytes())
        hsh.update(np.ascontiguousarray(obj.values, "<f8").tobytes())
    elif isinstance(obj, PointMeasure):
        hsh.update(b"atoms")
        hsh.update(np.ascontiguousarray(obj.locations, "<f8").tobytes())
        hsh.update(np.ascontiguousarray(obj.masses, "<f8").tobytes())
    elif isinstance(obj, LebesgueMeasure):
        hsh.update(f"lebesgue{obj.dim}".encode())
    elif hasattr(obj, "loops"):
        hsh.update(b"polygon")
        for loop in obj.loops:
            hsh.update(np.ascontiguousarray(loop, "<f8").tobytes())
    else:
        hsh.update(repr(obj).encode())


def input_digest(*objs) -> str:
    """Short SHA-256 digest of the numerical inputs of a report."""
    hsh = hashlib.sha256()
    for o in objs:
        _feed(hsh, o)
    return hsh.hexdigest()[:16]


def _num(x: float) -> str:
    # repr round-trips every float, including inf and nan
    return repr(float(x))


@dataclass
class InequalityReport:
    """One evaluated left/right-hand side pair."""

    case: str
    params: dict
    lhs: float
    rhs: float
    ratio: float
    h: float
    levels: int = 0
    runtime_ms: float = 0.0
    input_digest: str = ""
    flag: str = ""
    inputs: dict = field(default_factory=dict)
    extras: dict = field(default_factory=dict)

    @property
    def params_json(self) -> str:
        return json.dumps(self.params, sort_keys=True)

    @property
    def ok(self) -> bool:
        """Finite ratio, or a flagged non-finite one."""
        return math.isfinite(self.ratio) or bool(self.flag)

    def csv_row(self) -> list:
        return [self.case, self.params_json, _num(self.lhs), _num(self.rhs),
                _num(self.ratio), _num(self.h), str(int(self.levels)),
                f"{self.runtime_ms:.3f}", self.input_digest]

    def to_json(self) -> dict:
        d = asdict(self)
        for k in ("lhs", "rhs", "ratio", "h", "runtime_ms"):
            d[k] = _num(d[k])
        return d

    @classmethod
    def from_json(cls, d: dict) -> "InequalityReport":
        d = dict(d)
        for k in ("lhs", "rhs", "ratio", "h", "runtime_ms"):
            d[k] = float(d[k])
        unknown = set(d) - set(cls.__dataclass_fields__)
        if unknown:
            raise ConfigurationError(f"unknown report fields {sorted(unknown)}")
        return cls(**d)

    def same_values(self, other: "InequalityReport") -> bool:
        """Equality ignoring the runtime."""
        a, b = self.to_json(), other.to_json()
        a.pop("runtime_ms"), b.pop("runtime_ms")
        return a == b


def reports_to_csv(reports, runtime: bool = True) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    cols = CSV_COLUMNS if runtime else tuple(c for c in CSV_COLUMNS if c != "runtime_ms")
    w.writerow(cols)
    for r in reports:
        row = r.csv_row()
        if not runtime:
            row = [v for c, v in zip(CSV_COLUMNS, row) if c != "runtime_ms"]
        w.writerow(row)
    return buf.getvalue()


def reports_to_json(reports) -> str:
    return json.dumps([r.to_json() for r in reports], indent=1, sort_keys=True) + "\n"


def reports_from_json(text: str) -> list:
    return [InequalityReport.from_json(d) for d in json.loads(text)]


def read_csv_rows(text: str, runtime: bool = False) -> list:
    """Rows of a report CSV, dropping the runtime column unless asked for."""
    rows = list(csv.reader(io.StringIO(text)))
    if not rows:
        return []
    header = rows[0]
    if tuple(header) != CSV_COLUMNS:
        raise ConfigurationError(f"unexpected CSV header {header}")
    if runtime:
        return rows
    k = header.index("runtime_ms")
    return [r[:k] + r[k + 1:] for r in rows]


def write_reports(reports, out_dir, stem: str = "report", fmt: str = "csv") -> list:
    """Write ``<stem>.csv`` or ``<stem>.json`` (the other format is mirrored too)."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = [out / f"{stem}.csv", out / f"{stem}.json"]
    paths[0].write_text(reports_to_csv(reports))
    paths[1].write_text(reports_to_json(reports))
    return paths if fmt == "csv" else paths[::-1]

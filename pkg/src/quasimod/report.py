"""Check records and deterministic report files.

A record compares a left-hand side with a right-hand side under one of three
relations: ``le`` (``lhs <= rhs (1 + tol)``), ``eq`` (``|lhs - rhs| <= tol |rhs|``)
and ``err`` (``lhs`` is an error measured against the scale ``rhs``).
Non-normative records carry ``passed = None``.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any

SCHEMA = "quasimod-report/1"
COLUMNS = ("digest", "suite", "check", "relation", "lhs", "rhs", "ratio", "tol", "passed", "normative", "params")


def canonical_json(obj: Any) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), allow_nan=True)


def digest_of(params: dict, check: str) -> str:
    return hashlib.sha256((canonical_json(params) + "|" + check).encode()).hexdigest()


@dataclass
class Record:
    suite: str
    check: str
    relation: str
    lhs: float
    rhs: float
    tol: float
    params: dict
    normative: bool = True
    ratio: float = field(default=math.nan)
    passed: bool | None = None
    digest: str = ""

    def __post_init__(self):
        self.lhs = float(self.lhs)
        self.rhs = float(self.rhs)
        self.tol = float(self.tol)
        if self.relation == "le":
            self.ratio = (0.0 if self.lhs == 0 else math.inf) if self.rhs == 0 else self.lhs / self.rhs
            ok = self.lhs <= self.rhs * (1 + self.tol)
        elif self.relation == "eq":
            err = abs(self.lhs - self.rhs)
            self.ratio = err / abs(self.rhs) if self.rhs != 0 else err
            ok = self.ratio <= self.tol
        elif self.relation == "err":
            self.ratio = self.lhs / self.rhs if self.rhs != 0 else self.lhs
            ok = self.ratio <= self.tol
        else:
            raise ValueError(f"unknown relation {self.relation!r}")
        if self.normative:
            self.passed = bool(ok) and math.isfinite(self.ratio)
        if not self.digest:
            self.digest = digest_of(self.params, self.check)


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, float):
        return repr(x)
    return str(x)


@dataclass
class Report:
    records: list[Record]
    seed: int
    suites: list[str]

    def sorted(self) -> list[Record]:
        return sorted(self.records, key=lambda r: r.digest)

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.records if r.normative)

    def failures(self) -> list[Record]:
        return [r for r in self.records if r.normative and not r.passed]

    def aggregate(self) -> dict:
        """Per-check counts, worst ratio and pass status."""
        out: dict[str, dict] = {}
        for r in self.sorted():
            a = out.setdefault(r.check, {"suite": r.suite, "relation": r.relation, "records": 0,
                                         "failures": 0, "worst_ratio": None, "normative": r.normative})
            a["records"] += 1
            if r.normative and not r.passed:
                a["failures"] += 1
            if a["worst_ratio"] is None or r.ratio > a["worst_ratio"]:
                a["worst_ratio"] = r.ratio
        return dict(sorted(out.items()))

    # serialisation -------------------------------------------------------
    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(f"# schema={SCHEMA} seed={self.seed} suites={','.join(self.suites)}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(COLUMNS)
        for r in self.sorted():
            w.writerow([r.digest, r.suite, r.check, r.relation, _fmt(r.lhs), _fmt(r.rhs), _fmt(r.ratio),
                        _fmt(r.tol), _fmt(r.passed), _fmt(r.normative), canonical_json(r.params)])
        return buf.getvalue()

    def to_json(self) -> str:
        body = {
            "schema": SCHEMA,
            "seed": self.seed,
            "suites": self.suites,
            "passed": self.passed,
            "aggregate": self.aggregate(),
            "records": [asdict(r) for r in self.sorted()],
        }
        return json.dumps(body, sort_keys=True, indent=1, allow_nan=True)

    def summary_json(self) -> str:
        return json.dumps({"schema": SCHEMA, "seed": self.seed, "suites": self.suites, "passed": self.passed,
                           "aggregate": self.aggregate()}, sort_keys=True, indent=1, allow_nan=True)

    def write(self, out_dir, fmt: str = "csv") -> list[Path]:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        paths = []
        if fmt == "csv":
            p = out / "report.csv"
            p.write_text(self.to_csv())
            paths.append(p)
        elif fmt == "json":
            p = out / "report.json"
            p.write_text(self.to_json())
            paths.append(p)
        else:
            raise ValueError(f"unknown report format {fmt!r}")
        s = out / "summary.json"
        s.write_text(self.summary_json())
        paths.append(s)
        return paths


def _parse_bool(s: str):
    return None if s == "" else s == "true"


def read_report(path) -> Report:
    """Load a CSV or JSON report written by :meth:`Report.write`."""
    path = Path(path)
    text = path.read_text()
    if path.suffix == ".json":
        body = json.loads(text)
        if body.get("schema") != SCHEMA:
            raise ValueError(f"unsupported report schema {body.get('schema')!r}")
        recs = []
        for d in body["records"]:
            recs.append(Record(d["suite"], d["check"], d["relation"], d["lhs"], d["rhs"], d["tol"], d["params"],
                               d["normative"], digest=d["digest"]))
        return Report(recs, body["seed"], body["suites"])
    lines = text.splitlines()
    if not lines or not lines[0].startswith("#"):
        raise ValueError("report CSV is missing its schema header")
    meta = dict(kv.split("=", 1) for kv in lines[0].lstrip("# ").split())
    if meta.get("schema") != SCHEMA:
        raise ValueError(f"unsupported report schema {meta.get('schema')!r}")
    rows = list(csv.DictReader(lines[1:]))
    recs = []
    for row in rows:
        recs.append(Record(row["suite"], row["check"], row["relation"], float(row["lhs"]), float(row["rhs"]),
                           float(row["tol"]), json.loads(row["params"]), _parse_bool(row["normative"]),
                           digest=row["digest"]))
    suites = [s for s in meta.get("suites", "").split(",") if s]
    return Report(recs, int(meta.get("seed", 0)), suites)

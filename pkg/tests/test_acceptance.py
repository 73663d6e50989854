"""Acceptance criteria 1-10, checked against a full ``quasimod verify all --seed 1`` run.

The run happens twice in fresh directories through the installed CLI.  The
first report is parsed with the csv module and every criterion is re-derived
from the raw records (counts, coverage, stated tolerances); the pass flags
written by the runner are not trusted.  Each test prints one PASS/FAIL line,
and the lines are repeated in the terminal summary.
"""

from __future__ import annotations

import csv
import json
import math
import subprocess
import sys
from collections import defaultdict
from fractions import Fraction
from pathlib import Path

import pytest

from conftest import ACCEPTANCE_LINES

pytestmark = pytest.mark.slow


def _run(out: Path) -> None:
    cmd = [sys.executable, "-m", "quasimod.cli", "verify", "all", "--seed", "1", "--out", str(out)]
    proc = subprocess.run(cmd, capture_output=True, text=True, timeout=1800)
    # exit status 1 only means some normative check failed; the criteria below decide
    assert proc.returncode in (0, 1), proc.stderr


@pytest.fixture(scope="module")
def runs(tmp_path_factory):
    a = tmp_path_factory.mktemp("run_a")
    b = tmp_path_factory.mktemp("run_b")
    _run(a)
    _run(b)
    return a, b


@pytest.fixture(scope="module")
def records(runs):
    lines = (runs[0] / "report.csv").read_text().splitlines()
    rows = list(csv.DictReader(lines[1:]))
    out = defaultdict(list)
    for row in rows:
        row["lhs"] = float(row["lhs"])
        row["rhs"] = float(row["rhs"])
        row["params"] = json.loads(row["params"])
        out[row["check"]].append(row)
    return out


def _verdict(k: int, ok: bool, detail: str) -> None:
    line = f"criterion {k:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES[k] = line
    print(line)
    assert ok, line


def _frac(s) -> Fraction:
    """Reciprocal of an exponent string, with ``inf`` mapped to 0."""
    return Fraction(0) if s == "inf" else 1 / Fraction(s)


def _rel(r) -> float:
    return abs(r["lhs"] - r["rhs"]) / abs(r["rhs"])


def _err(r) -> float:
    return r["lhs"] / r["rhs"] if r["rhs"] else r["lhs"]


def _le(r, tol: float) -> bool:
    return r["lhs"] <= r["rhs"] * (1 + tol)


def _lattice_size(params) -> int:
    return math.prod(hi - lo + 1 for lo, hi in params["lattice"]["box"])


def _spreads(rows, key) -> dict:
    """max/min of the logged constants across sizes, grouped by ``key``."""
    groups = defaultdict(dict)
    for r in rows:
        groups[key(r)][r["params"]["at"]["N"]] = r["lhs"]
    return {g: (sorted(v), max(v.values()) / min(v.values())) for g, v in groups.items()}


def test_criterion_01_factorization(records):
    prod, law, mult = records["factorization/product"], records["factorization/norm-law"], records["factorization/multcont"]
    n = len(prod)
    p0s = {r["params"]["p"][0] for r in prod}
    holder = all(_frac(a) == _frac(b) + _frac(c) for a, b, c in (r["params"]["p"] for r in prod))
    kinds = {r["params"]["weights"] for r in prod}
    size_ok = max(_lattice_size(r["params"]) for r in prod) <= 64
    worst_prod = max(_err(r) for r in prod)
    worst_law = max(_rel(r) for r in law)
    mult_ok = all(_le(r, 1e-10) for r in mult)
    ok = (n >= 1000 and len(law) == n and len(mult) == n and {"1/2", "1", "3/2"} <= p0s and holder
          and {"trivial", "poly"} <= kinds and size_ok and worst_prod <= 1e-12 and worst_law <= 1e-10 and mult_ok)
    _verdict(1, ok, f"{n} instances, p0 in {sorted(p0s)}, product err {worst_prod:.1e}, "
                    f"norm law err {worst_law:.1e}, multcont {'ok' if mult_ok else 'violated'}")


def test_criterion_02_hilbert_schmidt(records):
    rows = records["matrix-schatten/hilbert-schmidt"]
    weighted = [r for r in rows if r["params"]["w_kind"] != "trivial"]
    worst = max(_rel(r) for r in rows)
    ok = len(weighted) >= 200 and worst <= 1e-10
    _verdict(2, ok, f"{len(weighted)} weighted instances, worst relative error {worst:.1e}")


def test_criterion_03_schatten_embedding(records):
    rows = records["matrix-schatten/embedding"]
    by_p = defaultdict(list)
    for r in rows:
        by_p[r["params"]["p"]].append(r)
    counts = {p: len(v) for p, v in by_p.items()}
    kinds = {r["params"]["w_kind"] for r in rows}
    size_ok = max(_lattice_size(r["params"]) for r in rows) <= 32
    worst = max(r["lhs"] / r["rhs"] for r in rows if r["rhs"] > 0)
    probe = [r for r in records["matrix-schatten/probe"] if _frac(r["params"]["p"]) < Fraction(1, 2)]
    probe_non_normative = all(r["normative"] == "false" for r in probe)
    worst_probe = max((r["lhs"] / r["rhs"] for r in probe), default=0.0)
    ok = (all(counts.get(p, 0) >= 200 for p in ("1/2", "2/3", "1", "3/2", "2")) and {"poly", "exp"} <= kinds
          and size_ok and all(_le(r, 1e-10) for r in rows) and probe_non_normative and worst_probe > 1)
    _verdict(3, ok, f"counts {counts}, worst ratio {worst:.6f}, p>2 probe max ratio {worst_probe:.2f}")


def _admissible(p1, p2, p, q) -> bool:
    target = _frac(p) + min(Fraction(0), _frac(q) - 1)
    r1, r2 = [_frac(v) for v in p1], [_frac(v) for v in p2]
    return (all(b - a == target for a, b in zip(r1, r2)) and all(_frac(q) >= b for b in r2)
            and all(b >= _frac(p) for b in r2))


def test_criterion_04_matrix_continuity(records):
    rows = records["matrix-continuity/bound"]
    by_tuple = defaultdict(list)
    for r in rows:
        pr = r["params"]
        by_tuple[(tuple(pr["p1"]), tuple(pr["p2"]), pr["p"], pr["q"])].append(r)
    pq = {(t[2], t[3]) for t in by_tuple}
    admissible = all(_admissible(*t) for t in by_tuple)
    min_pairs = min(len(v) for v in by_tuple.values())
    q_gt_1 = any(_frac(q) < 1 for _, q in pq)
    worst = max(r["lhs"] / r["rhs"] for r in rows)
    ok = (len(by_tuple) >= 10 and admissible and ("inf", "1") in pq and ("1", "1") in pq and q_gt_1
          and min_pairs >= 200 and all(_le(r, 1e-10) for r in rows))
    _verdict(4, ok, f"{len(by_tuple)} tuples, >= {min_pairs} (A, f) pairs each, worst ratio {worst:.6f}")


def test_criterion_05_gabor_reconstruction(records):
    need = {(64, 4, 4), (128, 4, 4), (128, 8, 8)}
    worst = 0.0
    counts = defaultdict(int)
    for check in ("gabor-reconstruction/residual", "gabor-reconstruction/residual-alt"):
        for r in records[check]:
            pr = r["params"]
            counts[(check, pr["N"], pr["a"], pr["b"])] += 1
            worst = max(worst, _err(r))
    covered = all(counts[(c, *k)] >= 50 for k in need
                  for c in ("gabor-reconstruction/residual", "gabor-reconstruction/residual-alt"))
    dense = all(a * b < N for (_, N, a, b) in counts)
    comm = max(_err(r) for r in records["gabor-reconstruction/commutation"])
    ok = covered and dense and worst <= 1e-8 and comm <= 1e-10
    _verdict(5, ok, f"configs {sorted({k[1:] for k in counts})}, worst residual {worst:.1e}, commutation {comm:.1e}")


def test_criterion_06_operator_factorization(records):
    rows = records["op-factorization/identity"]
    symbols = {r["params"]["index"] for r in rows}
    per_symbol = min(sum(1 for r in rows if r["params"]["index"] == s) for s in symbols)
    setup = all(r["params"]["N"] == 64 and r["params"]["step"] == 4 for r in rows)
    worst = max(_err(r) for r in rows)
    unit = max(_err(r) for r in records["op-factorization/unit-symbol"])
    ok = len(symbols) >= 20 and per_symbol >= 20 and setup and worst <= 1e-6 and unit <= 1e-8
    _verdict(6, ok, f"{len(symbols)} symbols x {per_symbol} signals, worst residual {worst:.1e}, unit symbol {unit:.1e}")


def test_criterion_07_rank_one_and_covariance(records):
    rank = records["wigner/rank-one"]
    ts = {r["params"]["t"] for r in rank}
    w_rank = max(_err(r) for r in rank)
    w_cov = max(_err(r) for r in records["wigner/covariance"])
    inv = records["wigner/symplectic-involution"]
    w_inv = max(_err(r) for r in inv)
    ok = ({"0", "1/4", "1/2", "1"} <= ts and w_rank <= 1e-10 and w_cov <= 1e-12 and w_inv <= 1e-12
          and all(r["params"]["N"] == 63 for r in inv))
    _verdict(7, ok, f"rank-one {w_rank:.1e} over t in {sorted(ts)}, calculus transform {w_cov:.1e}, involution {w_inv:.1e}")


def test_criterion_08_wigner_convolution(records):
    ident = records["convolution/identity"]
    fitted = records["convolution/fitted-constant"]
    worst = max(_err(r) for r in ident)
    spreads = _spreads(records["convolution/lp-constant"], lambda r: (r["params"]["index"], r["params"]["at"]["p"]))
    sizes_ok = all(sizes == [33, 63] for sizes, _ in spreads.values())
    worst_spread = max(s for _, s in spreads.values())
    ok = (len(ident) >= 10 and all(r["params"]["N"] == 63 for r in ident) and len(fitted) == 1
          and worst <= 1e-8 and sizes_ok and worst_spread <= 2)
    _verdict(8, ok, f"{len(ident)} quadruples, worst deviation {worst:.1e}, fitted C {fitted[0]['lhs']:.12f}, "
                    f"L^p constant spread {worst_spread:.3f}")


_STABILITY = {
    "op-continuity/constant": lambda r: (r["params"]["index"], r["params"]["at"]["tuple"]),
    "op-schatten/constant": lambda r: (r["params"]["index"], r["params"]["at"]["p"]),
    "wigner/constant": lambda r: (r["params"]["index"], r["params"]["at"]["tuple"]),
    "convolution/window-constant": lambda r: (r["params"]["index"], r["params"]["at"]["p"]),
}


def test_criterion_09_constant_stability(records):
    worst = {}
    ok = True
    for check, key in _STABILITY.items():
        spreads = _spreads(records[check], key)
        ok = ok and bool(spreads)
        for sizes, s in spreads.values():
            ladder = len(sizes) == 3 and sizes[0] in (32, 33) and sizes[1] in (63, 64) and sizes[2] in (127, 128)
            ok = ok and ladder and s <= 4
        worst[check.split("/")[0]] = max((s for _, s in spreads.values()), default=math.inf)
    _verdict(9, ok, "worst spread across sizes: " + ", ".join(f"{k} {v:.3f}" for k, v in worst.items()))


def test_criterion_10_determinism(runs):
    a, b = runs
    same = all((a / f).read_bytes() == (b / f).read_bytes() for f in ("report.csv", "summary.json"))
    size = (a / "report.csv").stat().st_size
    _verdict(10, same, f"two runs of verify all --seed 1 {'are' if same else 'are NOT'} byte-identical ({size} bytes)")

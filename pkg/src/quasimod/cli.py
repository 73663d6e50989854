"""Command-line entry point ``quasimod``.

Subcommands::

    verify <suite>...              run acceptance suites ("all" for every suite)
    factorize <matrix.csv>         split a lattice matrix into two or N factors
    gabor dual|reconstruct         canonical dual window / reconstruction residuals
    psido op|wigner|gmatrix        operator matrix, t-Wigner symbol, Gabor matrix
    probe sharpness                exploratory Schatten growth table
    replay <report>                recompute every normative record of a report

The output directory is ``--out``, else ``$QUASIMOD_OUT``, else
``./quasimod-out``.  ``verify`` and ``replay`` exit with status 0 iff every
normative check passes.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import time
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import io
from .config import ConfigError, build_config, load_config
from .gabor import FrameError, GaborSystem, canonical_dual, gaussian_window, make_window, reconstruct
from .matrices import (
    ExponentError,
    WeightConditionError,
    factorize_chain,
    factorize_left_diagonal,
    factorize_right_diagonal,
    u_norm,
)
from .probe import sharpness_probe
from .psido import gabor_matrix, op_t, wigner_t
from .report import read_report
from .suites import replay, run_suite
from .weights import Weight

log = logging.getLogger("quasimod")

ENV_OUT = "QUASIMOD_OUT"
DEFAULT_OUT = "quasimod-out"


def _out_dir(args) -> Path:
    out = args.out or os.environ.get(ENV_OUT) or DEFAULT_OUT
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _weight_arg(text: str | None):
    return None if text is None else Weight.from_dict(json.loads(text))


def _t_arg(text: str) -> float:
    """Quantization parameter such as ``0``, ``1/2`` or ``0.25``."""
    try:
        return float(Fraction(text))
    except (ValueError, ZeroDivisionError) as exc:
        raise ValueError(f"cannot parse quantization parameter {text!r}") from exc


def _emit(payload: dict) -> None:
    print(json.dumps(payload, sort_keys=True, indent=1, default=float))


# ---------------------------------------------------------------------------
# verify / replay


def cmd_verify(args) -> int:
    if args.config:
        cfg = load_config(args.config, suites=args.suites or None, seed=args.seed)
    else:
        cfg = build_config({}, suites=args.suites, seed=args.seed if args.seed is not None else 1)
    out = _out_dir(args)
    t0 = time.perf_counter()
    last = {}

    def progress(name, i, n):
        if name not in last:
            last[name] = time.perf_counter()
        if i == n:
            log.info("suite %s: %d instances in %.1f s", name, n, time.perf_counter() - last[name])

    report = run_suite(cfg, progress)
    paths = report.write(out, args.format)
    log.info("total runtime %.1f s", time.perf_counter() - t0)
    agg = report.aggregate()
    for check, a in agg.items():
        status = "info" if not a["normative"] else ("PASS" if a["failures"] == 0 else "FAIL")
        print(f"{status:4s} {check:45s} records={a['records']:5d} worst_ratio={a['worst_ratio']:.3e}")
    print(f"report: {', '.join(str(p) for p in paths)}")
    print("all normative checks passed" if report.passed else f"{len(report.failures())} normative checks FAILED")
    return 0 if report.passed else 1


def cmd_replay(args) -> int:
    report = read_report(args.report)
    res = replay(report)
    for digest, msg in res.mismatches[:20]:
        print(f"mismatch {digest[:12]}: {msg}")
    for digest in res.missing[:20]:
        print(f"missing {digest[:12]}")
    print(f"replayed {res.checked} records: {len(res.mismatches)} mismatches, {len(res.missing)} missing")
    return 0 if res.ok else 1


# ---------------------------------------------------------------------------
# factorize


def cmd_factorize(args) -> int:
    A = io.read_matrix_csv(args.matrix)
    out = _out_dir(args)
    w0, w1, w2 = (_weight_arg(t) for t in (args.w0, args.w1, args.w2))
    if args.side == "chain":
        ch = factorize_chain(A, args.length, w1, w2)
        for k, F in enumerate(ch.factors, 1):
            io.write_matrix_csv(out / f"factor{k}.csv", F)
        _emit({"source_norm": ch.source_norm, "factor_norms": ch.norms, "certified": ch.certified,
               "product_error": float(np.linalg.norm(ch.product - A.entries))})
        return 0
    split = factorize_left_diagonal if args.side == "left" else factorize_right_diagonal
    A1, A2 = split(A, args.p0, args.p1, args.p2, w0, w1, w2)
    io.write_matrix_csv(out / "A1.csv", A1)
    io.write_matrix_csv(out / "A2.csv", A2)
    n0 = u_norm(A, args.p0, None, w0)
    n1 = u_norm(A1, args.p1, None, w1)
    n2 = u_norm(A2, args.p2, None, w2)
    _emit({"norm_A0": n0, "norm_A1": n1, "norm_A2": n2, "product_bound_holds": bool(n1 * n2 <= n0 * (1 + 1e-10)),
           "product_error": float(np.linalg.norm(A1.entries @ A2.entries - A.entries))})
    return 0


# ---------------------------------------------------------------------------
# gabor


def _system(args) -> GaborSystem:
    window = make_window(json.loads(args.window) if args.window else None, args.N)
    return GaborSystem(window, args.a, args.b)


def cmd_gabor(args) -> int:
    out = _out_dir(args)
    if args.action == "dual":
        sys_ = canonical_dual(_system(args), method=args.method)
        io.write_grid_csv(out / "dual.csv", sys_.dual)
        _emit({"N": args.N, "a": args.a, "b": args.b, "condition": sys_.condition})
        return 0
    f = io.read_grid_csv(args.signal)
    args.N = f.size
    sys_ = canonical_dual(_system(args), method=args.method)
    rec = reconstruct(sys_, f)
    io.write_grid_csv(out / "reconstruction.csv", rec.f_rec)
    _emit({"residual": rec.residual, "residual_alt": rec.residual_alt, "condition": sys_.condition})
    return 0


# ---------------------------------------------------------------------------
# psido


def cmd_psido(args) -> int:
    out = _out_dir(args)
    if args.action == "op":
        T = op_t(io.read_symbol_csv(args.inputs[0]), _t_arg(args.t))
        io.write_matrix_csv(out / "operator.csv", T)
        _emit({"N": T.entries.shape[0], "t": args.t, "operator_norm": float(np.linalg.norm(T.entries, 2))})
    elif args.action == "wigner":
        if len(args.inputs) != 2:
            raise ValueError("psido wigner needs two signal files")
        f1, f2 = (io.read_grid_csv(p) for p in args.inputs)
        W = wigner_t(f1, f2, _t_arg(args.t))
        io.write_symbol_csv(out / "wigner.csv", W)
        _emit({"N": f1.size, "t": args.t, "max_abs": float(np.abs(W).max())})
    else:
        a = io.read_symbol_csv(args.inputs[0])
        phi = gaussian_window(a.shape[0])
        gm = gabor_matrix(a, phi, phi, args.a, args.b)
        io.write_matrix_csv(out / "gabor_matrix.csv", gm.matrix)
        _emit({"N": a.shape[0], "a": args.a, "b": args.b, "size": gm.matrix.entries.shape[0],
               "dual_condition": gm.phase_space.condition})
    return 0


# ---------------------------------------------------------------------------
# probe


def cmd_probe(args) -> int:
    table = sharpness_probe(args.p, args.q, args.r, args.sizes, N=args.N, spacing=args.spacing)
    out = _out_dir(args)
    (out / "sharpness.csv").write_text(table.to_csv())
    sys.stdout.write(table.to_csv())
    print(f"# monotone schatten column: {table.monotone}")
    return 0


# ---------------------------------------------------------------------------
# argument parsing


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="master seed (default 1, or the config value)")
    common.add_argument("--config", default=None, help="TOML experiment config")
    common.add_argument("--out", default=None, help=f"output directory (else ${ENV_OUT}, else ./{DEFAULT_OUT})")
    common.add_argument("--format", choices=("csv", "json"), default="csv", help="report format")
    common.add_argument("-v", "--verbose", action="store_true", help="log progress and runtime to stderr")

    p = argparse.ArgumentParser(prog="quasimod", description=__doc__.split("\n")[0])
    sub = p.add_subparsers(dest="command", required=True)

    v = sub.add_parser("verify", parents=[common], help="run acceptance suites")
    v.add_argument("suites", nargs="*", help="suite names or 'all' (default: the config's list)")
    v.set_defaults(func=cmd_verify)

    r = sub.add_parser("replay", parents=[common], help="recompute a report from its stored inputs")
    r.add_argument("report")
    r.set_defaults(func=cmd_replay)

    f = sub.add_parser("factorize", parents=[common], help="factorize a matrix CSV")
    f.add_argument("matrix")
    f.add_argument("--side", choices=("left", "right", "chain"), default="left")
    f.add_argument("--p0", default="1")
    f.add_argument("--p1", default="2")
    f.add_argument("--p2", default="2")
    f.add_argument("--length", type=int, default=2, help="number of factors for --side chain")
    for name in ("w0", "w1", "w2"):
        f.add_argument(f"--{name}", default=None, help='weight as JSON, e.g. {"kind": "poly", "s": 1}')
    f.set_defaults(func=cmd_factorize)

    g = sub.add_parser("gabor", parents=[common], help="Gabor frame tools")
    g.add_argument("action", choices=("dual", "reconstruct"))
    g.add_argument("signal", nargs="?", help="signal CSV (reconstruct)")
    g.add_argument("--N", type=int, default=64)
    g.add_argument("--a", type=int, default=4)
    g.add_argument("--b", type=int, default=4)
    g.add_argument("--window", default=None, help='window spec as JSON, e.g. {"kind": "gaussian", "width": 1}')
    g.add_argument("--method", choices=("direct", "cg"), default="direct")
    g.set_defaults(func=cmd_gabor)

    s = sub.add_parser("psido", parents=[common], help="pseudo-differential operator tools")
    s.add_argument("action", choices=("op", "wigner", "gmatrix"))
    s.add_argument("inputs", nargs="+", help="symbol CSV (op, gmatrix) or two signal CSVs (wigner)")
    s.add_argument("--t", default="0", help="quantization parameter in [0, 1]")
    s.add_argument("--a", type=int, default=4)
    s.add_argument("--b", type=int, default=4)
    s.set_defaults(func=cmd_psido)

    pr = sub.add_parser("probe", parents=[common], help="exploratory probes")
    pr.add_argument("kind", choices=("sharpness",))
    pr.add_argument("--p", default="1")
    pr.add_argument("--q", default="2")
    pr.add_argument("--r", default="1")
    pr.add_argument("--sizes", type=int, nargs="+", default=[16, 32, 64])
    pr.add_argument("--N", type=int, default=127)
    pr.add_argument("--spacing", type=int, default=7)
    pr.set_defaults(func=cmd_probe)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s", stream=sys.stderr)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(json.dumps({"error": "config", "field": exc.field, "message": str(exc)}), file=sys.stderr)
        return 2
    except (ExponentError, WeightConditionError, FrameError, ValueError, FileNotFoundError) as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}), file=sys.stderr)
        return 2


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())

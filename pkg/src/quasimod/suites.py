"""Acceptance suites: seeded instance generation, evaluation and replay.

Each suite provides ``instances(cfg)``, a list of JSON-able parameter dicts,
and ``evaluate(params, tols)``, which rebuilds every random object from the
parameters alone and returns :class:`~quasimod.report.Record` objects.
Because records carry their parameters, any report can be recomputed from
disk (:func:`replay`).

Random streams come from ``SeedSequence([seed, crc32(suite), index])``; the
instance list itself is drawn from ``SeedSequence([seed, crc32(suite)])``.
"""

from __future__ import annotations

import math
import zlib
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

import numpy as np

from .config import ConfigError, ExperimentConfig
from .exponents import parse_exponent, pq_conditions, recip
from .families import (
    atom_params,
    complex_gaussian,
    random_matrix,
    signal_from_atoms,
    symbol_atom_params,
    symbol_from_atoms,
)
from .gabor import (
    GaborSystem,
    FrameError,
    canonical_dual,
    check_stft_window_bound,
    continuum_coords,
    frame_operator,
    gaussian_window,
    modulation_equivalence,
    reconstruct,
    stft,
    time_frequency_shift,
)
from .matrices import (
    LatticeMatrix,
    check_continuity,
    factorize_chain,
    factorize_left_diagonal,
    factorize_right_diagonal,
    u_norm,
)
from .psido import (
    check_factorization_identity,
    check_op_continuity,
    check_op_schatten,
    check_unorm_modnorm_equiv,
    check_wigner_convolution,
    check_wigner_modulation_bound,
    calculus_transform,
    gabor_matrix,
    op_t_matrix,
    phase_space_system,
    symbol_norms,
    symplectic_ft,
    wigner_t,
)
from .report import Record, Report
from .schatten import (
    check_holder_composition,
    check_p_triangle,
    pair_quotient_array,
    schatten_norm,
    singular_values,
    verify_schatten_embedding,
)
from .weights import Lattice, Weight, make_lattice

# Per-suite options with their defaults; the type of each default is the
# accepted type in config files.
SUITE_OPTIONS: dict[str, dict] = {
    "factorization": {"instances": 1200, "max_size": 64, "chain_instances": 60},
    "matrix-schatten": {"instances": 200, "max_size": 32, "probe_instances": 10, "extra_instances": 50},
    "matrix-continuity": {"matrices": 20, "vectors": 10, "tuples": []},
    "gabor-reconstruction": {"signals": 50, "configs": [[64, 4, 4], [128, 4, 4], [128, 8, 8]]},
    "op-factorization": {"symbols": 20, "signals": 20, "size": 64, "step": 4},
    "op-schatten": {"symbols": 4, "sizes": [32, 64, 128]},
    "op-continuity": {"symbols": 3, "signals": 4, "sizes": [32, 64, 128]},
    "wigner": {"trials": 5, "pairs": 4, "sizes": [32, 64, 128]},
    "convolution": {"quadruples": 10, "sizes": [32, 64, 128]},
}


def fmt_exp(p) -> str:
    """Exact string form of an exponent: ``"inf"``, ``"2"``, ``"2/3"``."""
    p = parse_exponent(p)
    if math.isinf(p):
        return "inf"
    return str(Fraction(p).limit_denominator(10**6))


def suite_rng(seed: int, suite: str, index: int | None = None) -> np.random.Generator:
    key = [int(seed), zlib.crc32(suite.encode())]
    if index is not None:
        key.append(int(index))
    return np.random.default_rng(np.random.SeedSequence(key))


def instance_rng(params: dict) -> np.random.Generator:
    return suite_rng(params["seed"], params["suite"], params["index"])


class _Emitter:
    """Collects records for one instance, tagging them with the suite name."""

    def __init__(self, suite: str, params: dict, tols: dict):
        self.suite = suite
        self.params = params
        self.tols = tols
        self.records: list[Record] = []

    def __call__(self, check: str, relation: str, lhs, rhs, normative: bool = True, **extra):
        tag = f"{self.suite}/{check}"
        tol = self.tols[tag] if normative else 0.0
        params = dict(self.params, at=extra) if extra else self.params
        self.records.append(Record(self.suite, tag, relation, lhs, rhs, tol, params, normative))


def _rel_err(x: np.ndarray, ref: np.ndarray) -> tuple[float, float]:
    """``(||x - ref||, ||ref||)`` in the Frobenius norm."""
    return float(np.linalg.norm(x - ref)), float(np.linalg.norm(ref))


def _max_err(x: np.ndarray, ref: np.ndarray) -> tuple[float, float]:
    return float(np.max(np.abs(x - ref))), float(np.max(np.abs(ref)))


def _spread(values) -> float:
    v = np.asarray([x for x in values if x > 0 and math.isfinite(x)])
    return float(v.max() / v.min()) if v.size else math.inf


def _opt(cfg: ExperimentConfig, suite: str, name: str):
    return cfg.suite_options(suite).get(name, SUITE_OPTIONS[suite][name])


# ---------------------------------------------------------------------------
# factorization

_P0_SPLITS = {
    "1/2": [("1", "1"), ("2/3", "2"), ("2", "2/3"), ("inf", "1/2"), ("1/2", "inf"), ("3/4", "3/2")],
    "1": [("2", "2"), ("3/2", "3"), ("3", "3/2"), ("inf", "1"), ("1", "inf"), ("4/3", "4")],
    "3/2": [("3", "3"), ("2", "6"), ("6", "2"), ("inf", "3/2"), ("3/2", "inf")],
}
_MATRIX_KINDS = ("dense", "sparse", "banded", "diagonal", "rank-one", "zero-row")
_WEIGHT_KINDS = ("trivial", "poly", "poly-slack", "exp")


def _random_lattice_params(rng: np.random.Generator, max_size: int) -> dict:
    d = int(rng.integers(1, 3))
    if d == 1:
        shape = [int(rng.integers(2, max_size + 1))]
    else:
        side = int(math.isqrt(max_size))
        shape = [int(rng.integers(2, side + 1)), int(rng.integers(2, side + 1))]
    lo = [int(rng.integers(-3, 2)) for _ in shape]
    theta = [float(rng.choice([0.5, 1.0, 1.5])) for _ in shape]
    return {"theta": theta, "box": [[l, l + n - 1] for l, n in zip(lo, shape)]}


def _lattice(params: dict) -> Lattice:
    return make_lattice(params["theta"], params["box"])


def _factorization_weights(kind: str, side: str, s: float, r: float, u: float):
    """``(w0, w1, w2)`` satisfying the diagonal-factor weight condition of ``side``."""
    if kind == "trivial":
        return None, None, None
    base = Weight.poly if kind in ("poly", "poly-slack") else Weight.exp
    one = Weight.const(1.0)
    w0 = Weight.pair_quotient(base(s), base(r))
    if side == "left":
        w1 = Weight.pair_quotient(base(s), one)
        w2 = Weight.pair_quotient(one, base(r))
    else:
        w1 = Weight.pair_quotient(base(s), base(u))
        w2 = Weight.pair_quotient(base(u), base(r))
    return w0, w1, w2


def _factorization_instances(cfg: ExperimentConfig) -> list[dict]:
    suite = "factorization"
    rng = suite_rng(cfg.seed, suite)
    max_size = _opt(cfg, suite, "max_size")
    out = []
    p0s = sorted(_P0_SPLITS)
    for i in range(_opt(cfg, suite, "instances")):
        p0 = p0s[i % len(p0s)]
        splits = _P0_SPLITS[p0]
        p1, p2 = splits[int(rng.integers(len(splits)))]
        kind = _WEIGHT_KINDS[(i // len(p0s)) % len(_WEIGHT_KINDS)]
        scale = 0.3 if kind == "exp" else 1.5
        out.append({
            "suite": suite, "seed": cfg.seed, "index": i, "task": "split",
            "lattice": _random_lattice_params(rng, max_size),
            "p": [p0, p1, p2], "side": "left" if i % 2 == 0 else "right",
            "weights": kind, "matrix": _MATRIX_KINDS[int(rng.integers(len(_MATRIX_KINDS)))],
            "s": round(float(rng.uniform(-scale, scale)), 6), "r": round(float(rng.uniform(-scale, scale)), 6),
            "u": round(float(rng.uniform(-scale, scale)), 6), "slack": round(float(rng.uniform(0, 2)), 6),
        })
    base = len(out)
    for i in range(_opt(cfg, suite, "chain_instances")):
        out.append({
            "suite": suite, "seed": cfg.seed, "index": base + i, "task": "chain",
            "lattice": _random_lattice_params(rng, max_size), "length": 2 + i % 3,
            "matrix": _MATRIX_KINDS[int(rng.integers(len(_MATRIX_KINDS)))],
            "weighted": bool(i % 2), "s": round(float(rng.uniform(-1, 1)), 6),
            "r": round(float(rng.uniform(-1, 1)), 6),
        })
    return out


def _factorization_evaluate(params: dict, tols: dict) -> list[Record]:
    emit = _Emitter("factorization", params, tols)
    rng = instance_rng(params)
    lat = _lattice(params["lattice"])
    A0 = LatticeMatrix(lat, random_matrix(rng, lat.size, params["matrix"]))
    if params["task"] == "chain":
        w1 = Weight.poly(params["s"]) if params["weighted"] else None
        w2 = Weight.poly(params["r"]) if params["weighted"] else None
        ch = factorize_chain(A0, params["length"], w1, w2)
        emit("chain-product", "err", *_rel_err(ch.product, A0.entries))
        emit("chain-bound", "le", float(np.prod(ch.norms)), ch.source_norm)
        return emit.records
    p0, p1, p2 = params["p"]
    w0, w1, w2 = _factorization_weights(params["weights"], params["side"], params["s"], params["r"], params["u"])
    if params["weights"] == "poly-slack":
        d = lat.dim
        diff = np.hstack([np.eye(d), -np.eye(d)])
        w0 = w0 * Weight.linear(Weight.poly(params["slack"]), diff.tolist())
    if params["side"] == "left":
        A1, A2 = factorize_left_diagonal(A0, p0, p1, p2, w0, w1, w2)
        diag, pd, wd = A1, p1, w1
    else:
        A1, A2 = factorize_right_diagonal(A0, p0, p1, p2, w0, w1, w2)
        diag, pd, wd = A2, p2, w2
    emit("product", "err", *_rel_err(A1.entries @ A2.entries, A0.entries))
    n0 = u_norm(A0, p0, None, w0)
    n1 = u_norm(A1, p1, None, w1)
    n2 = u_norm(A2, p2, None, w2)
    expo = float(recip(pd) / recip(p0))
    emit("norm-law", "eq", u_norm(diag, pd, None, wd), n0**expo)
    emit("multcont", "le", n1 * n2, n0)
    return emit.records


# ---------------------------------------------------------------------------
# matrix-schatten

_EMBED_P = ("1/2", "2/3", "1", "3/2", "2")
_HOLDER = (("1/2", "1", "1"), ("1", "2", "2"), ("2/3", "1", "2"), ("1/3", "1/2", "1"), ("1", "inf", "1"))
_TRIANGLE_P = ("1/2", "2/3", "1")


def _lattice_weight(kind: str, s: float) -> Weight | None:
    if kind == "trivial":
        return None
    return Weight.poly(s) if kind == "poly" else Weight.exp(s)


def _schatten_instances(cfg: ExperimentConfig) -> list[dict]:
    suite = "matrix-schatten"
    rng = suite_rng(cfg.seed, suite)
    max_size = _opt(cfg, suite, "max_size")
    n_inst = _opt(cfg, suite, "instances")
    tasks = [("hs", None)] + [("embed", p) for p in _EMBED_P]
    out = []

    def weights():
        kind = ("poly", "exp")[int(rng.integers(2))]
        scale = 1.5 if kind == "poly" else 0.3
        return {"w_kind": kind, "s1": round(float(rng.uniform(-scale, scale)), 6),
                "s2": round(float(rng.uniform(-scale, scale)), 6)}

    for task, p in tasks:
        for _ in range(n_inst):
            d = {"suite": suite, "seed": cfg.seed, "index": len(out), "task": task,
                 "lattice": _random_lattice_params(rng, max_size),
                 "matrix": _MATRIX_KINDS[int(rng.integers(len(_MATRIX_KINDS)))]}
            if p is not None:
                d["p"] = p
            d.update(weights())
            out.append(d)
    for i in range(_opt(cfg, suite, "probe_instances")):
        out.append({"suite": suite, "seed": cfg.seed, "index": len(out), "task": "probe",
                    "p": ("3", "4")[i % 2], "n": int(rng.integers(8, max_size + 1))})
    for i in range(_opt(cfg, suite, "extra_instances")):
        n = int(rng.integers(2, max_size + 1))
        out.append({"suite": suite, "seed": cfg.seed, "index": len(out), "task": "holder",
                    "p": list(_HOLDER[i % len(_HOLDER)]), "n": n})
        out.append({"suite": suite, "seed": cfg.seed, "index": len(out), "task": "triangle",
                    "p": _TRIANGLE_P[i % len(_TRIANGLE_P)], "n": n, "terms": 2 + i % 4})
        out.append({"suite": suite, "seed": cfg.seed, "index": len(out), "task": "decay",
                    "p": _EMBED_P[i % len(_EMBED_P)], "n": n,
                    "matrix": _MATRIX_KINDS[i % len(_MATRIX_KINDS)]})
    return out


def _schatten_evaluate(params: dict, tols: dict) -> list[Record]:
    emit = _Emitter("matrix-schatten", params, tols)
    rng = instance_rng(params)
    task = params["task"]
    if task in ("hs", "embed"):
        lat = _lattice(params["lattice"])
        A = LatticeMatrix(lat, random_matrix(rng, lat.size, params["matrix"]))
        w1 = _lattice_weight(params["w_kind"], params["s1"])
        w2 = _lattice_weight(params["w_kind"], params["s2"])
        if task == "hs":
            i2 = schatten_norm(singular_values(A, w1, w2), 2)
            emit("hilbert-schmidt", "eq", i2, u_norm(A, 2, 2, pair_quotient_array(A, w1, w2)))
        else:
            rep = verify_schatten_embedding(A, params["p"], w1, w2)
            emit("embedding", "le", rep.i_p, rep.u_p)
    elif task == "probe":
        n = params["n"]
        M = np.ones((n, n)) + 0.1 * complex_gaussian(rng, (n, n))
        A = LatticeMatrix(make_lattice((1.0,), (0, n - 1)), M)
        rep = verify_schatten_embedding(A, params["p"], probe=True)
        emit("probe", "le", rep.i_p, rep.u_p, normative=False)
    elif task == "holder":
        n = params["n"]
        p0, p1, p2 = params["p"]
        T1, T2 = complex_gaussian(rng, (n, n)), complex_gaussian(rng, (n, n))
        rep = check_holder_composition(T1, T2, p0, p1, p2)
        emit("holder", "le", rep.lhs, rep.rhs)
    elif task == "triangle":
        n = params["n"]
        mats = [random_matrix(rng, n, _MATRIX_KINDS[k % len(_MATRIX_KINDS)]) for k in range(params["terms"])]
        rep = check_p_triangle(mats, params["p"])
        emit("p-triangle", "le", rep.lhs, rep.rhs)
    elif task == "decay":
        s = singular_values(random_matrix(rng, params["n"], params["matrix"]))
        p = parse_exponent(params["p"])
        vals = s.as_array()
        j = np.arange(1, vals.size + 1)
        emit("decay", "le", float(np.max(vals * j ** (1.0 / p))), schatten_norm(s, p))
    return emit.records


# ---------------------------------------------------------------------------
# matrix-continuity

DEFAULT_CONTINUITY_TUPLES = (
    (("2", "2"), ("2", "2"), "inf", "1"),
    (("1", "inf"), ("1", "inf"), "inf", "1"),
    (("inf", "inf"), ("1", "1"), "1", "1"),
    (("1", "1"), ("2", "2"), "inf", "2"),
    (("4/3", "2"), ("4", "inf"), "inf", "2"),
    (("2", "inf"), ("1", "2"), "2", "1"),
    (("inf", "inf"), ("2", "2"), "2", "1"),
    (("1/2", "1/2"), ("1/2", "1/2"), "inf", "1/2"),
    (("1", "inf"), ("1/2", "1"), "1", "1/2"),
    (("2", "4"), ("2", "4"), "4", "4/3"),
    (("3/2", "3"), ("3/2", "3"), "3", "3/2"),
    (("2", "2"), ("2", "2"), "2", "2"),
)


def _parse_tuple(t, where: str) -> tuple:
    try:
        p1, p2, p, q = t
        p1 = tuple(fmt_exp(v) for v in p1)
        p2 = tuple(fmt_exp(v) for v in p2)
        p, q = fmt_exp(p), fmt_exp(q)
    except (TypeError, ValueError) as exc:
        raise ConfigError(where, f"expected [[p1...], [p2...], p, q], got {t!r}") from exc
    if len(p1) != len(p2):
        raise ConfigError(where, "p1 and p2 need the same number of entries")
    problems = pq_conditions(p1, p2, p, q)
    if problems:
        raise ConfigError(where, "exponent tuple violates the admissibility conditions: " + "; ".join(problems))
    return p1, p2, p, q


def _continuity_instances(cfg: ExperimentConfig) -> list[dict]:
    suite = "matrix-continuity"
    rng = suite_rng(cfg.seed, suite)
    raw = _opt(cfg, suite, "tuples") or DEFAULT_CONTINUITY_TUPLES
    tuples = [_parse_tuple(t, f"{suite}.tuples[{i}]") for i, t in enumerate(raw)]
    out = []
    for ti, (p1, p2, p, q) in enumerate(tuples):
        d = len(p1)
        for m in range(_opt(cfg, suite, "matrices")):
            shape = [int(rng.integers(3, 7)) for _ in range(d)]
            lo = [int(rng.integers(-3, 1)) for _ in range(d)]
            sigma = list(range(d))
            if d == 2 and m % 4 == 3:
                sigma = [1, 0]
            out.append({
                "suite": suite, "seed": cfg.seed, "index": len(out), "tuple": ti,
                "p1": list(p1), "p2": list(p2), "p": p, "q": q, "sigma": sigma,
                "lattice": {"theta": [1.0] * d, "box": [[l, l + n - 1] for l, n in zip(lo, shape)]},
                "matrix": _MATRIX_KINDS[int(rng.integers(len(_MATRIX_KINDS)))],
                "weighted": bool(m % 2), "vectors": _opt(cfg, suite, "vectors"),
            })
    return out


def _peetre_weights(d: int):
    """``w1 = w2 = <x>``, ``w0(j, k) = sqrt(2) <j - k>`` (Peetre's inequality gives ``w2(j)/w1(k) <= w0``)."""
    diff = np.hstack([np.eye(d), -np.eye(d)]).tolist()
    w0 = Weight.const(math.sqrt(2.0)) * Weight.linear(Weight.poly(1.0), diff)
    return w0, Weight.poly(1.0), Weight.poly(1.0)


def _continuity_evaluate(params: dict, tols: dict) -> list[Record]:
    emit = _Emitter("matrix-continuity", params, tols)
    rng = instance_rng(params)
    lat = _lattice(params["lattice"])
    A = LatticeMatrix(lat, random_matrix(rng, lat.size, params["matrix"]))
    w0 = w1 = w2 = None
    if params["weighted"]:
        w0, w1, w2 = _peetre_weights(lat.dim)
    rep = check_continuity(A, params["p1"], params["p2"], params["p"], params["q"], params["sigma"],
                           w0, w1, w2, trials=params["vectors"], rng=rng)
    for t, ratio in enumerate(rep.ratios):
        emit("bound", "le", float(ratio), 1.0, trial=t)
    return emit.records


# ---------------------------------------------------------------------------
# gabor-reconstruction

_DUALS: dict[tuple, GaborSystem] = {}


def _gabor_system(N: int, a: int, b: int) -> GaborSystem:
    """Gaussian-window system with its canonical dual (cached per process)."""
    key = (N, a, b)
    if key not in _DUALS:
        _DUALS[key] = canonical_dual(GaborSystem(gaussian_window(N), a, b))
    return _DUALS[key]


def _gabor_instances(cfg: ExperimentConfig) -> list[dict]:
    suite = "gabor-reconstruction"
    out = []
    for i, c in enumerate(_opt(cfg, suite, "configs")):
        if not (isinstance(c, list) and len(c) == 3 and all(isinstance(v, int) for v in c)):
            raise ConfigError(f"{suite}.configs[{i}]", f"expected [N, a, b] integers, got {c!r}")
        N, a, b = c
        if N % a or N % b or a * b >= N:
            raise ConfigError(f"{suite}.configs[{i}]", f"steps must divide N and satisfy a*b < N, got {c!r}")
        out.append({"suite": suite, "seed": cfg.seed, "index": len(out), "task": "system", "N": N, "a": a, "b": b})
        for s in range(_opt(cfg, suite, "signals")):
            out.append({"suite": suite, "seed": cfg.seed, "index": len(out), "task": "signal",
                        "N": N, "a": a, "b": b, "signal": s})
    out.append({"suite": suite, "seed": cfg.seed, "index": len(out), "task": "equivalence",
                "N": 128, "a": 4, "b": 4, "signals": _opt(cfg, suite, "signals"),
                "exponents": [["1", "1"], ["2", "2"], ["2", "1"], ["1", "2"]]})
    return out


def _gabor_evaluate(params: dict, tols: dict) -> list[Record]:
    emit = _Emitter("gabor-reconstruction", params, tols)
    rng = instance_rng(params)
    N, a, b = params["N"], params["a"], params["b"]
    try:
        sys = _gabor_system(N, a, b)
    except FrameError as exc:
        emit("dual-residual", "err", math.inf, 1.0, error=str(exc))
        return emit.records
    task = params["task"]
    if task == "system":
        emit("dual-residual", "err", *_rel_err(frame_operator(sys, sys.dual), sys.window))
        f = complex_gaussian(rng, N)
        Sf = frame_operator(sys, f)
        for k in range(5):
            m = int(rng.integers(N // a)) * a
            n = int(rng.integers(N // b)) * b
            lhs = frame_operator(sys, time_frequency_shift(f, (m,), (n,)))
            emit("commutation", "err", *_rel_err(lhs, time_frequency_shift(Sf, (m,), (n,))), shift=[m, n])
        cg_sys = canonical_dual(GaborSystem(sys.window, a, b), method="cg")
        emit("cg-agreement", "err", *_rel_err(cg_sys.dual, sys.dual), normative=False)
        emit("condition", "le", float(sys.condition), 1.0, normative=False)
    elif task == "signal":
        f = complex_gaussian(rng, N)
        rec = reconstruct(sys, f)
        emit("residual", "err", rec.residual, 1.0)
        emit("residual-alt", "err", rec.residual_alt, 1.0)
        emit("order-agreement", "err", *_rel_err(rec.f_rec, rec.f_rec_alt))
        V = stft(f, sys.window)
        emit("moyal", "eq", float(np.sum(np.abs(V) ** 2)),
             float(np.linalg.norm(f) ** 2 * np.linalg.norm(sys.window) ** 2))
    elif task == "equivalence":
        family = [signal_from_atoms(N, atom_params(rng, 4)) for _ in range(params["signals"])]
        for e in params["exponents"]:
            rep = modulation_equivalence(sys, family, tuple(e))
            emit("equivalence", "le", rep.spread, 1.0, exponent=e)
    return emit.records


# ---------------------------------------------------------------------------
# op-factorization

def _opfact_instances(cfg: ExperimentConfig) -> list[dict]:
    suite = "op-factorization"
    N, step = _opt(cfg, suite, "size"), _opt(cfg, suite, "step")
    if N % step or step * step >= N:
        raise ConfigError(f"{suite}.step", f"step must divide N and satisfy step^2 < N (N={N}, step={step})")
    base = {"suite": suite, "seed": cfg.seed, "N": N, "step": step}
    out = []
    for s in range(_opt(cfg, suite, "symbols")):
        out.append(dict(base, index=len(out), task="identity", signals=_opt(cfg, suite, "signals")))
    out.append(dict(base, index=len(out), task="unit-symbol"))
    out.append(dict(base, index=len(out), task="rank-one-atom"))
    out.append(dict(base, index=len(out), task="u-m-equivalence", symbols=_opt(cfg, suite, "symbols"),
                    exponents=[["1", "1"], ["2", "2"], ["inf", "1"]]))
    return out


def _opfact_symbol(rng: np.random.Generator, N: int) -> np.ndarray:
    return symbol_from_atoms(N, symbol_atom_params(rng, 6))


def _opfact_evaluate(params: dict, tols: dict) -> list[Record]:
    emit = _Emitter("op-factorization", params, tols)
    rng = instance_rng(params)
    N, step = params["N"], params["step"]
    phi = gaussian_window(N)
    ps = phase_space_system(phi, phi, step, step)
    task = params["task"]
    if task == "identity":
        a = _opfact_symbol(rng, N)
        rep = check_factorization_identity(a, gabor_matrix(a, phi, phi, step, step, ps), params["signals"], rng)
        for t, r in enumerate(rep.residuals):
            emit("identity", "err", float(r), 1.0, trial=t)
    elif task == "unit-symbol":
        gm = gabor_matrix(np.ones((N, N)), phi, phi, step, step, ps)
        for t in range(5):
            f = complex_gaussian(rng, N)
            emit("unit-symbol", "err", *_rel_err(gm.apply(f), f), trial=t)
    elif task == "rank-one-atom":
        x = continuum_coords((N,))[0]
        f1 = np.exp(-((x - 0.7) ** 2) / 2 + 0.9j * x)
        f2 = np.exp(-((x + 0.4) ** 2) / 2 - 0.6j * x)
        gm = gabor_matrix(wigner_t(f1, f2, 0.0), phi, phi, step, step, ps)
        for t in range(5):
            f = complex_gaussian(rng, N)
            ref = np.vdot(f2, f) * f1 / math.sqrt(N)
            emit("rank-one-atom", "err", *_rel_err(gm.apply(f), ref), trial=t)
    elif task == "u-m-equivalence":
        symbols = [_opfact_symbol(rng, N) for _ in range(params["symbols"])]
        pairs = [tuple(e) for e in params["exponents"]]
        norms = [symbol_norms(a, pairs) for a in symbols]
        for k, (p, q) in enumerate(pairs):
            rep = check_unorm_modnorm_equiv(symbols, p, q, None, phi, phi, step, step,
                                            norms=[n[k] for n in norms])
            emit("u-m-equivalence", "le", rep.spread, 1.0, exponent=[p, q])
    return emit.records


# ---------------------------------------------------------------------------
# stability suites: one instance per family, constants compared across sizes

def _stability_base(cfg: ExperimentConfig, suite: str) -> dict:
    sizes = _opt(cfg, suite, "sizes")
    if len(sizes) < 2 or not all(isinstance(n, int) and n >= 8 for n in sizes):
        raise ConfigError(f"{suite}.sizes", f"need at least two integer sizes >= 8, got {sizes!r}")
    return {"suite": suite, "seed": cfg.seed, "sizes": sizes}


def _phase_weight_variant(weighted: bool):
    """Signal weights ``<X>`` and the symbol weight ``sqrt(2) <(eta, y)>``."""
    if not weighted:
        return None, None, None
    w0 = Weight.const(math.sqrt(2.0)) * Weight.linear(Weight.poly(1.0), [[0, 0, 1, 0], [0, 0, 0, 1]])
    return w0, Weight.poly(1.0), Weight.poly(1.0)


def _opschatten_instances(cfg: ExperimentConfig) -> list[dict]:
    base = _stability_base(cfg, "op-schatten")
    out = []
    for weighted in (False, True):
        out.append(dict(base, index=len(out), task="stability", weighted=weighted, t="1/2",
                        symbols=_opt(cfg, "op-schatten", "symbols"), p=["1/2", "1", "2"]))
    out.append(dict(base, index=len(out), task="hilbert-schmidt", t="1/4"))
    return out


def _opschatten_evaluate(params: dict, tols: dict) -> list[Record]:
    emit = _Emitter("op-schatten", params, tols)
    rng = instance_rng(params)
    t = float(Fraction(params["t"]))
    if params["task"] == "hilbert-schmidt":
        atoms = symbol_atom_params(rng, 6)
        for N in params["sizes"]:
            a = symbol_from_atoms(N, atoms)
            lhs = schatten_norm(singular_values(op_t_matrix(a, t)), 2)
            emit("hilbert-schmidt", "eq", lhs, float(np.linalg.norm(a)) / math.sqrt(N), N=N)
        return emit.records
    families = [symbol_atom_params(rng, 6) for _ in range(params["symbols"])]
    w0, w1, w2 = _phase_weight_variant(params["weighted"])
    ps = [parse_exponent(p) for p in params["p"]]
    consts = {p: [] for p in params["p"]}
    for N in params["sizes"]:
        symbols = [symbol_from_atoms(N, at) for at in families]
        norms = [symbol_norms(a, [(p, p) for p in ps], w0) for a in symbols]
        for k, p in enumerate(params["p"]):
            rep = check_op_schatten(symbols, p, t, w0, w1, w2, norms=[n[k] for n in norms])
            consts[p].append(rep.constant)
            emit("constant", "le", rep.constant, 1.0, normative=False, N=N, p=p)
    for p, c in consts.items():
        emit("stability", "le", _spread(c), 1.0, p=p)
    return emit.records


_OPCONT_TUPLES = (
    (("2", "2"), ("2", "2"), "inf", "1"),
    (("inf", "inf"), ("1", "1"), "1", "1"),
    (("2", "2"), ("2", "2"), "2", "2"),
)


def _opcont_instances(cfg: ExperimentConfig) -> list[dict]:
    base = _stability_base(cfg, "op-continuity")
    out = []
    for weighted in (False, True):
        out.append(dict(base, index=len(out), weighted=weighted, t="0",
                        symbols=_opt(cfg, "op-continuity", "symbols"),
                        signals=_opt(cfg, "op-continuity", "signals"),
                        tuples=[[list(p1), list(p2), p, q] for p1, p2, p, q in _OPCONT_TUPLES]))
    return out


def _opcont_evaluate(params: dict, tols: dict) -> list[Record]:
    emit = _Emitter("op-continuity", params, tols)
    rng = instance_rng(params)
    t = float(Fraction(params["t"]))
    sym_atoms = [symbol_atom_params(rng, 6) for _ in range(params["symbols"])]
    sig_atoms = [atom_params(rng, 4) for _ in range(params["signals"])]
    w0, w1, w2 = _phase_weight_variant(params["weighted"])
    tuples = params["tuples"]
    pairs = [(p, q) for _, _, p, q in tuples]
    consts = [[] for _ in tuples]
    for N in params["sizes"]:
        signals = [signal_from_atoms(N, at) for at in sig_atoms]
        best = [0.0] * len(tuples)
        for at in sym_atoms:
            a = symbol_from_atoms(N, at)
            norms = symbol_norms(a, pairs, w0)
            for k, (p1, p2, p, q) in enumerate(tuples):
                rep = check_op_continuity(a, p1, p2, p, q, signals, t, w0, w1, w2, a_norm=norms[k])
                best[k] = max(best[k], rep.constant)
        for k in range(len(tuples)):
            consts[k].append(best[k])
            emit("constant", "le", best[k], 1.0, normative=False, N=N, tuple=k)
    for k, c in enumerate(consts):
        emit("stability", "le", _spread(c), 1.0, tuple=k)
    return emit.records


# ---------------------------------------------------------------------------
# wigner

_WIGNER_T = ("0", "1/4", "1/2", "1")
_WIGNER_MOD_TUPLES = (
    ("2", "2", "2", "2", "2", "2"),
    ("2", "2", "2", "2", "1", "inf"),
    ("1", "2", "2", "1", "1", "2"),
)


def _wigner_instances(cfg: ExperimentConfig) -> list[dict]:
    suite = "wigner"
    base = {"suite": suite, "seed": cfg.seed}
    trials = _opt(cfg, suite, "trials")
    out = []
    for N in (33, 64):
        for t in _WIGNER_T:
            out.append(dict(base, index=len(out), task="rank-one", N=N, t=t, trials=trials))
        for t1, t2 in (("0", "1/2"), ("1/4", "3/4"), ("1", "0"), ("1/2", "1/3")):
            out.append(dict(base, index=len(out), task="covariance", N=N, t=[t1, t2], trials=trials))
        out.append(dict(base, index=len(out), task="unit-symbol", N=N, t=list(_WIGNER_T)))
    out.append(dict(base, index=len(out), task="symplectic-involution", N=63, trials=trials))
    out.append(dict(base, index=len(out), task="gaussian-weyl", N=127))
    sb = _stability_base(cfg, suite)
    out.append(dict(sb, index=len(out), task="modulation-stability", pairs=_opt(cfg, suite, "pairs"), t="1/2",
                    tuples=[list(v) for v in _WIGNER_MOD_TUPLES]))
    return out


def _wigner_evaluate(params: dict, tols: dict) -> list[Record]:
    emit = _Emitter("wigner", params, tols)
    rng = instance_rng(params)
    task = params["task"]
    N = params.get("N")
    if task == "rank-one":
        t = float(Fraction(params["t"]))
        for k in range(params["trials"]):
            f1, f2, f = (complex_gaussian(rng, N) for _ in range(3))
            lhs = op_t_matrix(wigner_t(f1, f2, t), t) @ f
            emit("rank-one", "err", *_max_err(lhs, np.vdot(f2, f) * f1 / math.sqrt(N)), trial=k)
    elif task == "covariance":
        t1, t2 = (float(Fraction(v)) for v in params["t"])
        for k in range(params["trials"]):
            a = complex_gaussian(rng, (N, N))
            ref = op_t_matrix(a, t1)
            emit("covariance", "err", *_max_err(op_t_matrix(calculus_transform(a, t1, t2), t2), ref), trial=k)
    elif task == "unit-symbol":
        for t in params["t"]:
            emit("unit-symbol", "err", *_max_err(op_t_matrix(np.ones((N, N)), float(Fraction(t))), np.eye(N)), t=t)
    elif task == "symplectic-involution":
        for k in range(params["trials"]):
            a = complex_gaussian(rng, (N, N))
            emit("symplectic-involution", "err", *_max_err(symplectic_ft(symplectic_ft(a)), a), trial=k)
    elif task == "gaussian-weyl":
        g = gaussian_window(N)
        x = continuum_coords((N,))[0]
        ref = math.sqrt(2.0) * np.exp(-x[:, None] ** 2 - x[None, :] ** 2)
        emit("gaussian-weyl", "err", *_max_err(np.abs(wigner_t(g, g, 0.5)), ref))
    elif task == "modulation-stability":
        t = float(Fraction(params["t"]))
        pair_atoms = [(atom_params(rng, 3), atom_params(rng, 3)) for _ in range(params["pairs"])]
        tuples = params["tuples"]
        consts = [[] for _ in tuples]
        for n in params["sizes"]:
            pairs = [(signal_from_atoms(n, a1), signal_from_atoms(n, a2)) for a1, a2 in pair_atoms]
            norms = [symbol_norms(wigner_t(f1, f2, t), [(tp[4], tp[5]) for tp in tuples]) for f1, f2 in pairs]
            for k, tp in enumerate(tuples):
                rep = check_wigner_modulation_bound(pairs, *tp, t=t, norms=[nm[k] for nm in norms])
                consts[k].append(rep.constant)
                emit("constant", "le", rep.constant, 1.0, normative=False, N=n, tuple=k)
        for k, c in enumerate(consts):
            emit("modulation-stability", "le", _spread(c), 1.0, tuple=k)
    return emit.records


# ---------------------------------------------------------------------------
# convolution

def _convolution_instances(cfg: ExperimentConfig) -> list[dict]:
    suite = "convolution"
    base = {"suite": suite, "seed": cfg.seed}
    out = [dict(base, index=0, task="identity", N=63, quadruples=_opt(cfg, suite, "quadruples")),
           dict(base, index=1, task="lp-stability", sizes=[33, 63], p=["1/2", "1"],
                quadruples=_opt(cfg, suite, "quadruples"))]
    sb = _stability_base(cfg, suite)
    for weighted in (False, True):
        out.append(dict(sb, index=len(out), task="window-stability", weighted=weighted, p=["1", "2"],
                        signals=_opt(cfg, suite, "quadruples")))
    return out


def _quadruples(rng: np.random.Generator, count: int) -> list[list[dict]]:
    return [[atom_params(rng, 1)[0] for _ in range(4)] for _ in range(count)]


def _convolution_evaluate(params: dict, tols: dict) -> list[Record]:
    emit = _Emitter("convolution", params, tols)
    rng = instance_rng(params)
    task = params["task"]
    if task == "identity":
        N = params["N"]
        C = None
        for k, quad in enumerate(_quadruples(rng, params["quadruples"])):
            sig = [signal_from_atoms(N, [at]) for at in quad]
            rep = check_wigner_convolution(*sig, p=1.0, constant=C)
            if C is None:
                C = rep.constant
                emit("fitted-constant", "eq", C, 2 * math.pi, normative=False)
            emit("identity", "err", rep.max_deviation, 1.0, quadruple=k)
    elif task == "lp-stability":
        quads = _quadruples(rng, params["quadruples"])
        for p in params["p"]:
            consts = []
            for N in params["sizes"]:
                best = 0.0
                for quad in quads:
                    sig = [signal_from_atoms(N, [at]) for at in quad]
                    best = max(best, check_wigner_convolution(*sig, p=parse_exponent(p)).lp_ratio)
                consts.append(best)
                emit("lp-constant", "le", best, 1.0, normative=False, N=N, p=p)
            emit("lp-stability", "le", _spread(consts), 1.0, p=p)
    elif task == "window-stability":
        fams = [atom_params(rng, 4) for _ in range(params["signals"])]
        win = {"x": 0.3, "xi": -0.5, "width": 0.8}
        if params["weighted"]:
            w, w1, w2 = Weight.poly(1.0), Weight.poly(1.0), Weight.const(math.sqrt(2.0)) * Weight.poly(1.0)
        else:
            w = w1 = w2 = None
        for p in params["p"]:
            consts = []
            for N in params["sizes"]:
                x = continuum_coords((N,))[0]
                phi = np.exp(-((x - win["x"]) ** 2) / (2 * win["width"] ** 2) + 1j * win["xi"] * x)
                best = 0.0
                for at in fams:
                    best = max(best, check_stft_window_bound(signal_from_atoms(N, at), phi, p, w, w1, w2).ratio)
                consts.append(best)
                emit("window-constant", "le", best, 1.0, normative=False, N=N, p=p)
            emit("window-stability", "le", _spread(consts), 1.0, p=p)
    return emit.records


# ---------------------------------------------------------------------------
# runner


@dataclass(frozen=True)
class Suite:
    name: str
    instances: Callable[[ExperimentConfig], list[dict]]
    evaluate: Callable[[dict, dict], list[Record]]


SUITES: dict[str, Suite] = {s.name: s for s in (
    Suite("factorization", _factorization_instances, _factorization_evaluate),
    Suite("matrix-schatten", _schatten_instances, _schatten_evaluate),
    Suite("matrix-continuity", _continuity_instances, _continuity_evaluate),
    Suite("gabor-reconstruction", _gabor_instances, _gabor_evaluate),
    Suite("op-factorization", _opfact_instances, _opfact_evaluate),
    Suite("op-schatten", _opschatten_instances, _opschatten_evaluate),
    Suite("op-continuity", _opcont_instances, _opcont_evaluate),
    Suite("wigner", _wigner_instances, _wigner_evaluate),
    Suite("convolution", _convolution_instances, _convolution_evaluate),
)}


def run_suite(cfg: ExperimentConfig, progress: Callable[[str, int, int], None] | None = None) -> Report:
    """Run every suite named in ``cfg`` and collect the records into a report."""
    records: list[Record] = []
    for name in cfg.suites:
        suite = SUITES[name]
        insts = suite.instances(cfg)
        for i, params in enumerate(insts):
            records.extend(suite.evaluate(params, cfg.tolerances))
            if progress is not None:
                progress(name, i + 1, len(insts))
    return Report(records, cfg.seed, list(cfg.suites))


@dataclass
class ReplayResult:
    checked: int
    mismatches: list[tuple[str, str]]
    missing: list[str]

    @property
    def ok(self) -> bool:
        return not self.mismatches and not self.missing


def _instance_key(params: dict) -> tuple:
    return params["suite"], params["seed"], params["index"]


def replay(report: Report, tolerances: dict | None = None) -> ReplayResult:
    """Recompute every normative record of ``report`` from its stored parameters.

    Per-record details live under the ``at`` key, so dropping it recovers the
    instance parameters.  Each instance is evaluated once and its fresh
    records are matched by digest.  Values must
    agree bit for bit.
    """
    from .config import DEFAULT_TOLERANCES

    tols = dict(DEFAULT_TOLERANCES) if tolerances is None else tolerances
    instances: dict[tuple, dict] = {}
    for r in report.records:
        if r.normative:
            base = {k: v for k, v in r.params.items() if k != "at"}
            instances.setdefault(_instance_key(base), base)
    fresh: dict[str, Record] = {}
    for key, params in sorted(instances.items()):
        suite = SUITES[key[0]]
        for rec in suite.evaluate(params, tols):
            fresh[rec.digest] = rec
    mismatches, missing = [], []
    checked = 0
    for r in report.records:
        if not r.normative:
            continue
        new = fresh.get(r.digest)
        if new is None:
            missing.append(r.digest)
            continue
        checked += 1
        if repr(new.lhs) != repr(r.lhs) or repr(new.rhs) != repr(r.rhs):
            mismatches.append((r.digest, f"lhs {r.lhs!r} -> {new.lhs!r}, rhs {r.rhs!r} -> {new.rhs!r}"))
    return ReplayResult(checked, mismatches, missing)

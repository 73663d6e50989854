"""Experiment configuration (TOML) with validation.

Example::

    seed = 1
    suites = ["factorization", "matrix-schatten"]

    [tolerances]
    "factorization/product" = 1e-13   # may only tighten the default

    [factorization]
    instances = 600
    max_size = 32
"""

from __future__ import annotations

import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover - exercised on 3.10
    import tomli as tomllib


class ConfigError(ValueError):
    """Malformed configuration; ``field`` names the offending entry."""

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field


SUITE_NAMES = (
    "factorization",
    "matrix-schatten",
    "matrix-continuity",
    "gabor-reconstruction",
    "op-factorization",
    "op-schatten",
    "op-continuity",
    "wigner",
    "convolution",
)

# Normative tolerances per check tag.  An "le" record passes iff
# lhs <= rhs * (1 + tol); "eq" and "err" records pass iff their relative
# error is at most tol.  Stability checks are "le" records with rhs = 1, so
# tol = 3 means "spread at most a factor 4".
DEFAULT_TOLERANCES: dict[str, float] = {
    "factorization/product": 1e-12,
    "factorization/norm-law": 1e-10,
    "factorization/multcont": 1e-10,
    "factorization/chain-product": 1e-10,
    "factorization/chain-bound": 1e-10,
    "matrix-schatten/hilbert-schmidt": 1e-10,
    "matrix-schatten/embedding": 1e-10,
    "matrix-schatten/holder": 1e-10,
    "matrix-schatten/p-triangle": 1e-10,
    "matrix-schatten/decay": 1e-12,
    "matrix-continuity/bound": 1e-10,
    "gabor-reconstruction/residual": 1e-8,
    "gabor-reconstruction/residual-alt": 1e-8,
    "gabor-reconstruction/dual-residual": 1e-10,
    "gabor-reconstruction/commutation": 1e-10,
    "gabor-reconstruction/order-agreement": 1e-10,
    "gabor-reconstruction/moyal": 1e-10,
    "gabor-reconstruction/equivalence": 9.0,
    "op-factorization/identity": 1e-6,
    "op-factorization/unit-symbol": 1e-8,
    "op-factorization/rank-one-atom": 1e-8,
    "op-factorization/u-m-equivalence": 99.0,
    "op-schatten/hilbert-schmidt": 1e-10,
    "op-schatten/stability": 3.0,
    "op-continuity/stability": 3.0,
    "wigner/rank-one": 1e-10,
    "wigner/covariance": 1e-12,
    "wigner/symplectic-involution": 1e-12,
    "wigner/unit-symbol": 1e-12,
    "wigner/gaussian-weyl": 1e-3,
    "wigner/modulation-stability": 3.0,
    "convolution/identity": 1e-8,
    "convolution/lp-stability": 1.0,
    "convolution/window-stability": 3.0,
}


@dataclass
class ExperimentConfig:
    suites: list[str] = field(default_factory=list)
    seed: int = 1
    tolerances: dict[str, float] = field(default_factory=lambda: dict(DEFAULT_TOLERANCES))
    options: dict[str, dict[str, Any]] = field(default_factory=dict)

    def suite_options(self, name: str) -> dict[str, Any]:
        return self.options.get(name, {})

    def tol(self, tag: str) -> float:
        return self.tolerances[tag]


def _expand_suites(names) -> list[str]:
    out = []
    for n in names:
        if n == "all":
            out.extend(SUITE_NAMES)
        elif n in SUITE_NAMES:
            out.append(n)
        else:
            raise ConfigError("suites", f"unknown suite {n!r}; choose from {', '.join(SUITE_NAMES)} or 'all'")
    seen = []
    for n in out:
        if n not in seen:
            seen.append(n)
    return seen


def build_config(data: dict[str, Any], suites=None, seed: int | None = None) -> ExperimentConfig:
    """Validate a parsed config mapping; explicit ``suites``/``seed`` win over the file."""
    data = dict(data)
    cfg = ExperimentConfig()
    file_suites = data.pop("suites", [])
    if not isinstance(file_suites, list):
        raise ConfigError("suites", "must be a list of suite names")
    cfg.suites = _expand_suites(suites if suites is not None else file_suites)
    file_seed = data.pop("seed", 1)
    if not isinstance(file_seed, int) or isinstance(file_seed, bool):
        raise ConfigError("seed", f"must be an integer, got {file_seed!r}")
    cfg.seed = int(seed) if seed is not None else file_seed
    tols = data.pop("tolerances", {})
    if not isinstance(tols, dict):
        raise ConfigError("tolerances", "must be a table")
    for key, val in tols.items():
        if key not in DEFAULT_TOLERANCES:
            raise ConfigError(f"tolerances.{key}", "unknown check tag")
        if not isinstance(val, (int, float)) or val < 0:
            raise ConfigError(f"tolerances.{key}", f"must be a nonnegative number, got {val!r}")
        if val > DEFAULT_TOLERANCES[key]:
            raise ConfigError(f"tolerances.{key}", f"{val} loosens the normative tolerance {DEFAULT_TOLERANCES[key]}")
        if val < 1e-15:
            raise ConfigError(f"tolerances.{key}", f"{val} is below the 1e-15 floor")
        cfg.tolerances[key] = float(val)
    from .suites import SUITE_OPTIONS  # local import: suites depends on this module

    for key, val in data.items():
        if key not in SUITE_NAMES:
            raise ConfigError(key, "unknown top-level key")
        if not isinstance(val, dict):
            raise ConfigError(key, "suite options must be a table")
        allowed = SUITE_OPTIONS[key]
        for opt, v in val.items():
            if opt not in allowed:
                raise ConfigError(f"{key}.{opt}", f"unknown option; allowed: {', '.join(sorted(allowed))}")
            kind = type(allowed[opt])
            if kind is int and (not isinstance(v, int) or isinstance(v, bool) or v < 1):
                raise ConfigError(f"{key}.{opt}", f"must be a positive integer, got {v!r}")
            if kind is list and not isinstance(v, list):
                raise ConfigError(f"{key}.{opt}", f"must be a list, got {v!r}")
        cfg.options[key] = dict(val)
    return cfg


def load_config(path, suites=None, seed: int | None = None) -> ExperimentConfig:
    try:
        data = tomllib.loads(Path(path).read_text())
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(str(path), f"invalid TOML: {exc}") from exc
    return build_config(data, suites, seed)

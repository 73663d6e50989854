"""Plain-text and binary round trips for matrices, grid functions and symbols.

Matrix CSV: ``#`` header lines carrying the lattice (``# theta=...``,
``# box=...``, optional ``# period=...``), then one line per row with the
complex entries written as ``re,im`` pairs.  Binary dumps use ``.npz``.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .matrices import LatticeMatrix
from .weights import Lattice

_FMT = "%.17g"


def _lattice_header(lat: Lattice) -> list[str]:
    lines = [f"# theta={json.dumps(list(lat.theta))}", f"# box={json.dumps([list(b) for b in lat.box])}"]
    if lat.period is not None:
        lines.append(f"# period={json.dumps(list(lat.period))}")
    return lines


def _parse_header(lines: list[str]) -> Lattice:
    meta = {}
    for line in lines:
        body = line.lstrip("#").strip()
        if "=" in body:
            key, val = body.split("=", 1)
            meta[key.strip()] = json.loads(val)
    if "theta" not in meta or "box" not in meta:
        raise ValueError("matrix CSV needs '# theta=' and '# box=' header lines")
    period = tuple(meta["period"]) if "period" in meta else None
    return Lattice(tuple(meta["theta"]), tuple(tuple(b) for b in meta["box"]), period)


def write_matrix_csv(path, A: LatticeMatrix) -> None:
    n = A.entries.shape[0]
    pairs = np.empty((n, 2 * n))
    pairs[:, 0::2] = A.entries.real
    pairs[:, 1::2] = A.entries.imag
    with open(path, "w") as fh:
        fh.write("\n".join(_lattice_header(A.lattice)) + "\n")
        np.savetxt(fh, pairs, delimiter=",", fmt=_FMT)


def read_matrix_csv(path) -> LatticeMatrix:
    text = Path(path).read_text().splitlines()
    header = [l for l in text if l.startswith("#")]
    rows = [l for l in text if l.strip() and not l.startswith("#")]
    if header:
        lat = _parse_header(header)
    else:
        lat = Lattice((1.0,), ((0, len(rows) - 1),))
    data = np.array([[float(v) for v in r.split(",")] for r in rows])
    if data.ndim != 2 or data.shape[1] % 2:
        raise ValueError("matrix rows must hold re,im pairs")
    return LatticeMatrix(lat, data[:, 0::2] + 1j * data[:, 1::2])


def save_matrix_npz(path, A: LatticeMatrix) -> None:
    lat = A.lattice
    extra = {} if lat.period is None else {"period": np.asarray(lat.period)}
    np.savez(path, entries=A.entries, theta=np.asarray(lat.theta), box=np.asarray(lat.box), **extra)


def load_matrix_npz(path) -> LatticeMatrix:
    with np.load(path) as z:
        period = tuple(int(v) for v in z["period"]) if "period" in z else None
        lat = Lattice(tuple(z["theta"]), tuple(tuple(int(v) for v in b) for b in z["box"]), period)
        return LatticeMatrix(lat, z["entries"])


def write_grid_csv(path, f: np.ndarray) -> None:
    """One line ``index,re,im`` per sample of a 1-d grid function."""
    f = np.asarray(f, dtype=complex).reshape(-1)
    data = np.column_stack([np.arange(f.size), f.real, f.imag])
    np.savetxt(path, data, delimiter=",", fmt=["%d", _FMT, _FMT], header="index,re,im", comments="")


def read_grid_csv(path) -> np.ndarray:
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    out = np.zeros(int(data[:, 0].max()) + 1, dtype=complex)
    out[data[:, 0].astype(int)] = data[:, 1] + 1j * data[:, 2]
    return out


def write_symbol_csv(path, a: np.ndarray) -> None:
    """One line ``x,xi,re,im`` per sample of an ``N x N`` symbol."""
    a = np.asarray(a, dtype=complex)
    x, xi = np.meshgrid(np.arange(a.shape[0]), np.arange(a.shape[1]), indexing="ij")
    data = np.column_stack([x.ravel(), xi.ravel(), a.real.ravel(), a.imag.ravel()])
    np.savetxt(path, data, delimiter=",", fmt=["%d", "%d", _FMT, _FMT], header="x,xi,re,im", comments="")


def read_symbol_csv(path) -> np.ndarray:
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    x = data[:, 0].astype(int)
    xi = data[:, 1].astype(int)
    out = np.zeros((x.max() + 1, xi.max() + 1), dtype=complex)
    out[x, xi] = data[:, 2] + 1j * data[:, 3]
    return out


def save_array_npz(path, arr: np.ndarray) -> None:
    np.savez(path, values=np.asarray(arr))


def load_array_npz(path) -> np.ndarray:
    with np.load(path) as z:
        return z["values"]

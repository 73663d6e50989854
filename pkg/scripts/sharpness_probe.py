"""Tabulate the Schatten growth probe for a few exponent choices.

Usage: python3 scripts/sharpness_probe.py [--out DIR]

For each ``(q, r)`` pair the probe sums more and more modulated Gaussian
atoms with coefficients in ``l^q`` but not in ``l^r`` and records
``||Op^w(a)||_{I_r}``.  A steadily growing column next to a much slower control column
is the expected picture.  Writes one CSV per pair.
"""

import argparse
from pathlib import Path

from quasimod.probe import sharpness_probe

PAIRS = (("2", "1"), ("1", "1/2"), ("4", "2"))
SIZES = (16, 32, 64, 128)


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="quasimod-out/probe")
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for q, r in PAIRS:
        table = sharpness_probe("1", q, r, SIZES)
        name = f"sharpness_q{q.replace('/', '_')}_r{r.replace('/', '_')}.csv"
        (out / name).write_text(table.to_csv())
        print(f"q={q} r={r}  monotone={table.monotone}")
        for row in table.rows():
            print(f"  {row['size']:4d}  I_r={row['schatten_r']:.4f}  control={row['control_r']:.4f}")


if __name__ == "__main__":
    main()

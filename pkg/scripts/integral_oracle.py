"""Independent trapezoid-rule check of the basis integral ratio.

Reads the packaged basis CSVs with plain-Python parsing and a hand
written trapezoid sum (no numpy), and prints the charge-state fraction
expected from decompose() for equal weights a1 = a2 = 1.  The printed
value is frozen into tests/test_pl.py; rerun this script after any
regeneration of the basis files.
"""
from __future__ import annotations

from pathlib import Path

DATA = Path(__file__).resolve().parents[1] / "src" / "fndspec" / "data"


def read_csv(path):
    xs, ys = [], []
    for line in path.read_text().splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        a, b = line.split(",")
        xs.append(float(a))
        ys.append(float(b))
    return xs, ys


def trapezoid(xs, ys):
    total = 0.0
    for i in range(len(xs) - 1):
        total += (xs[i + 1] - xs[i]) * (ys[i] + ys[i + 1]) / 2.0
    return total


def main():
    x1, y1 = read_csv(DATA / "nv_minus_pl.csv")
    x2, y2 = read_csv(DATA / "nv_zero_pl.csv")
    assert x1 == x2, "basis axes differ"
    i_minus = trapezoid(x1, y1)
    i_zero = trapezoid(x2, y2)
    f = i_minus / (i_minus + i_zero)
    print(f"integral nv_minus = {i_minus!r}")
    print(f"integral nv_zero  = {i_zero!r}")
    print(f"f for a1=a2=1     = {f!r}")


if __name__ == "__main__":
    main()

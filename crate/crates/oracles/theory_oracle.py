#!/usr/bin/env python3
"""Independent 50-digit evaluation of the probability-bound formulas.

Writes data/theory_grid.json next to this script.
"""
import json
import os
from mpmath import mp, mpf, log, exp, floor, expm1

mp.dps = 50

GRID = [
    # n, m, k, delta
    (64, 1, 500, "0.3"),
    (64, 1, 5000, "0.3"),
    (128, 1, 20000, "0.25"),
    (256, 1, 100000, "0.3"),
    (512, 1, 128, "0.3"),
    (512, 1, 260, "0.1"),
    (512, 1, 1000000, "0.2"),
    (1024, 1, 3000000, "0.3"),
    (40, 2, 7000, "0.3"),
    (100, 2, 50000, "0.15"),
    (200, 2, 400000, "0.3"),
    (500, 2, 2000000, "0.33"),
    (1000, 3, 900000, "0.3"),
    (2000, 3, 5000000, "0.05"),
    (4096, 1, 2400, "0.3"),
    (4096, 4, 30000000, "0.3"),
    (10000, 2, 123457, "0.2"),
    (10000, 5, 99999999, "0.31"),
    (300, 1, 777777, "0.01"),
    (50, 1, 1600, "0.3"),
]


def row(n, m, k, d):
    n, m, k, d = mpf(n), mpf(m), mpf(k), mpf(d)
    q = 3 * m * (6 * m - 1) + 1
    c0 = d**2 / 16 - d**3 / 48
    ln12 = log(12 / d)

    def f(kk):
        return c0 * kk - 3 * m * ln12 - log(2)

    f_block = f(floor(k / q))
    lemma = -f_block + log(q)
    union = (-c0 * k / (18 * m**2) + 3 * m * (ln12 + log(n / (3 * m)) + 1)
             + log(2) + log(18 * m**2) + c0)
    c2 = c0 / 36
    simplified = -c2 * k / m**2
    c3 = ln12 + 2 * log(2) + c0 + 4
    c1 = 54 * c3 / (c0 - 18 * c2)
    thr = c1 * m**3 * log(n / m)
    out = {
        "n": int(n), "m": int(m), "k": int(k), "delta": float(d),
        "q": int(q), "c0": c0, "f": f(k), "f_block": f_block,
        "lemma_exponent": lemma, "lemma_raw": -expm1(lemma),
        "union_exponent": union, "union_raw": -expm1(union),
        "simplified_exponent": simplified, "simplified_raw": -expm1(simplified),
        "c3": c3, "c1_min": c1, "k_threshold": thr,
    }
    return {key: (float(v) if not isinstance(v, int) else v) for key, v in out.items()}


if __name__ == "__main__":
    here = os.path.dirname(os.path.abspath(__file__))
    path = os.path.join(here, "data", "theory_grid.json")
    rows = [row(*g) for g in GRID]
    with open(path, "w") as fh:
        json.dump(rows, fh, indent=1)
        fh.write("\n")

#!/usr/bin/env python3
"""Arbitrary-precision reference values for the adaptive priority score.

    S = max(0, alpha*I + beta*sim) * ln(1+C) * exp(-lambda*max(0, dt) / ln(1+C))

Writes tests/data/priority_score_oracle.csv. Tuples whose exact value falls
below the smallest normal double are resampled, since no double result can
carry a relative error bound there.
"""
import csv
import pathlib
import random

import mpmath

mpmath.mp.dps = 50
DBL_MIN = mpmath.mpf("2.2250738585072014e-308")


def exact_score(importance, sim, recall, dt, alpha, beta, lam):
    base = mpmath.mpf(alpha) * importance + mpmath.mpf(beta) * mpmath.mpf(sim)
    if base <= 0:
        return mpmath.mpf(0)
    gain = mpmath.log(1 + mpmath.mpf(recall))
    elapsed = max(mpmath.mpf(0), mpmath.mpf(dt))
    return base * gain * mpmath.exp(-mpmath.mpf(lam) * elapsed / gain)


def draw(rng):
    importance = rng.randint(1, 10)
    sim = rng.uniform(-1.0, 1.0)
    recall = int(round(10 ** rng.uniform(0.0, 6.0)))
    dt = 0 if rng.random() < 0.05 else int(round(10 ** rng.uniform(0.0, 8.0)))
    alpha = rng.uniform(0.0, 2.0)
    beta = rng.uniform(0.0, 2.0)
    lam = 10 ** rng.uniform(-10.0, -4.0)
    return importance, sim, recall, dt, alpha, beta, lam


def main():
    rng = random.Random(20240611)
    out = pathlib.Path(__file__).resolve().parent.parent / "data" / "priority_score_oracle.csv"
    rows = []
    while len(rows) < 1000:
        t = draw(rng)
        value = exact_score(*t)
        if value != 0 and value < DBL_MIN:
            continue
        rows.append((*t, value))
    with out.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["importance", "sim", "recall_count", "dt", "alpha", "beta", "lambda", "expected"])
        for importance, sim, recall, dt, alpha, beta, lam, value in rows:
            w.writerow([importance, repr(sim), recall, dt, repr(alpha), repr(beta), repr(lam),
                        mpmath.nstr(value, 30, min_fixed=-1, max_fixed=-1) if value else "0"])
    print(f"wrote {len(rows)} rows to {out}")

    # Spot values used by the unit tests.
    print("8.5*ln2          =", mpmath.nstr(exact_score(8, 0.5, 1, 0, 1, 1, 0), 20))
    print("8.5*ln4*exp(..)  =", mpmath.nstr(exact_score(8, 0.5, 3, 2, 1, 1, 0.1), 20))


if __name__ == "__main__":
    main()

#!/usr/bin/env python3
"""Regenerate the shared client/server metric parity fixtures.

Writes 20 pairs of raw category totals together with the server-side values
of all four distances (computed on smoothed, normalized distributions).

Usage: python3 scripts/make_metric_fixtures.py  (from frontend/)
"""

import json
import pathlib
import sys

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parents[2] / "src"))

import numpy as np

from landgen.evaluation import SMOOTHING_EPS, cos_dist, hd, js, kl
from landgen.rng import Rng


def smoothed(totals):
    totals = np.asarray(totals, dtype=np.float64)
    base = totals / totals.sum() if totals.sum() > 0 else np.full(totals.size, 1.0 / totals.size)
    return (base + SMOOTHING_EPS) / (1.0 + totals.size * SMOOTHING_EPS)


def main():
    rng = Rng(20240917, 0)
    fixtures = []
    for i in range(20):
        m = 4 + rng.randint_below(20)
        a = rng.poisson(np.full(m, 3.0 + 5.0 * rng.uniform())).astype(float)
        b = rng.poisson(np.full(m, 3.0 + 5.0 * rng.uniform())).astype(float)
        if i == 0:
            b = a.copy()  # identical pair pins the zero case
        if i == 1:
            a[: m // 2] = 0.0
            b[m // 2 :] = 0.0  # near-disjoint support
        p, q = smoothed(a), smoothed(b)
        fixtures.append(
            {
                "totals_a": a.tolist(),
                "totals_b": b.tolist(),
                "expected": {
                    "kl": kl(p, q),
                    "js": js(p, q),
                    "hd": hd(p, q),
                    "cos": cos_dist(p, q),
                },
            }
        )
    out = pathlib.Path(__file__).resolve().parents[1] / "fixtures" / "metric_fixtures.json"
    out.write_text(json.dumps(fixtures, indent=1) + "\n")
    print(f"wrote {len(fixtures)} fixtures to {out}")


if __name__ == "__main__":
    main()

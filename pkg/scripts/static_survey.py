#!/usr/bin/env python3
"""Static-metric diagnostics across the built-in families.

Usage: python scripts/static_survey.py
"""

import sys

import numpy as np

from plurigeo.families import MetricFamily
from plurigeo.grid import sample
from plurigeo.statics import static_report

CASES = [
    (MetricFamily("flat"), (8, 4, 8, 4)),
    (MetricFamily("kahler_potential", 0.4), (16, 4, 16, 4)),
    (MetricFamily("torus_pluriclosed", 0.3), (4, 4, 16, 4)),
    (MetricFamily("torus_pluriclosed", 0.5), (4, 4, 16, 4)),
    (MetricFamily("torus_pluriclosed", 0.7), (4, 4, 16, 4)),
]


def main() -> int:
    bundle = np.diag([1.0, -1.0])
    cols = ("lambda*", "resid_L2", "vol", "E_w", "degree", "gap_wedge")
    print(f"{'family':24s} " + " ".join(f"{c:>11s}" for c in cols))
    for family, dims in CASES:
        rep = static_report(sample(family, dims), bundle)
        label = f"{family.kind}({family.eps:g})"
        vals = (rep.lambda_star, rep.residual_l2, rep.vol, rep.e_w, rep.degree,
                rep.gap_wedge_volume)
        print(f"{label:24s} " + " ".join(f"{v:11.3e}" for v in vals))
    return 0


if __name__ == "__main__":
    sys.exit(main())

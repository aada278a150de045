#!/usr/bin/env python3
"""Comparison-geometry probe battery.

Sweeps the chord/delta brackets of the cone-annulus construction over the
three model spaces, Monte-Carlo-checks the ball sandwich
B(x, delta) c V_delta c B(x, 10 delta) in dimensions 2 and 3, and scans the
curvature ordering of the hinge third side.  Prints a summary table and
writes a JSON report.

Usage:
    python scripts/geometry_probes.py --out runs/geometry [--samples 100000]
"""

import argparse
import json
import math
from pathlib import Path

import numpy as np

from kreinfeller.geometry import (
    ConeAnnulus,
    ModelSpace,
    annulus_chord_bracket,
    hinge_third_side,
    inclusion_probe,
)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="runs/geometry")
    ap.add_argument("--samples", type=int, default=100_000)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    report = {}

    print("chord/delta brackets (Cmin, Cmax):")
    report["brackets"] = {}
    for branch, rho, R in [
        ("flat", 1.0, 1.0), ("flat", 2.5, 1.0),
        ("hyperbolic", 1.0, 1.0), ("hyperbolic", 1.0, 10.0),
        ("spherical", 0.5, 2.0), ("spherical", 1.0, 2.0),
    ]:
        cmin, cmax = annulus_chord_bracket(branch, rho, R,
                                           delta_points=200, lambda_points=200)
        print(f"  {branch:10s} rho={rho:<4} R={R:<5} -> ({cmin:.4f}, {cmax:.4f})")
        report["brackets"][f"{branch}:rho={rho}:R={R}"] = [cmin, cmax]

    print("inclusion probes (inner, outer violations):")
    rng = np.random.default_rng(args.seed)
    report["inclusion"] = []
    for n in (2, 3):
        for _ in range(5):
            rho = float(rng.uniform(0.3, 2.0))
            delta = float(rng.uniform(0.01, 0.2)) * rho
            V = ConeAnnulus(np.zeros(n), np.eye(n)[0], rho=rho, delta=delta)
            rep = inclusion_probe(V, args.samples, seed=int(rng.integers(1 << 30)))
            print(f"  n={n} rho={rho:.3f} delta={delta:.4f} -> "
                  f"({rep['inner_violations']}, {rep['outer_violations']})")
            report["inclusion"].append({"n": n, "rho": rho, "delta": delta, **rep})
    Vc = ConeAnnulus(np.zeros(3), np.array([0.0, 0.0, 1.0]), rho=1.0, delta=0.02)
    control = inclusion_probe(Vc, args.samples, seed=args.seed, widen_beta=6.0)
    print(f"  negative control (6x opening): outer violations "
          f"{control['outer_violations']} (> 0 expected)")
    report["negative_control"] = control

    grid = np.linspace(0.05, 1.5, 40)
    angles = np.linspace(0.0, math.pi, 25)
    worst = 0.0
    for a in grid:
        for alpha in angles:
            s = hinge_third_side(ModelSpace("spherical", 1.0), a, a, alpha)
            f = hinge_third_side(ModelSpace("flat"), a, a, alpha)
            h = hinge_third_side(ModelSpace("hyperbolic", 1.0), a, a, alpha)
            worst = max(worst, s - f, f - h)
    print(f"curvature ordering scan: worst violation {worst:.2e} (<= 0 means clean)")
    report["ordering_worst_violation"] = worst

    (out / "geometry.json").write_text(json.dumps(report, sort_keys=True, indent=2))
    print(f"report in {out}/geometry.json")


if __name__ == "__main__":
    main()

#!/usr/bin/env python3
"""Study how the position weight lambda affects segmentation accuracy on
rough (rugose) surfaces.

Usage:
    python3 scripts/lambda_study.py [--amplitude 0.04] [--seeds 10]
"""

import argparse

import numpy as np

from meshgonio.core import MeasurementParams, measure
from meshgonio.mesh import estimate_normals
from meshgonio.patch import extract_patch_by_point
from meshgonio.shapes import WedgeSpec, label_accuracy, make_rugose_wedge

LAMBDAS = [0.0, 0.5, 1.0, 2.0, 4.0, 8.0]


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--angle", type=float, default=90.0)
    ap.add_argument("--amplitude", type=float, default=0.04)
    ap.add_argument("--seeds", type=int, default=10)
    ap.add_argument("--radius", type=float, default=0.35)
    args = ap.parse_args()

    print(f"{'lambda':>6} {'acc mean':>9} {'acc min':>8} {'theta err':>10}")
    for lam in LAMBDAS:
        accs, errs = [], []
        for seed in range(args.seeds):
            mesh, truth = make_rugose_wedge(
                WedgeSpec(args.angle, vertices_per_side=2000),
                args.amplitude, seed=seed)
            mesh.normals = estimate_normals(mesh)
            patch = extract_patch_by_point(mesh, None, (0.5, 0, 0),
                                           args.radius, "euclidean")
            res = measure(patch, MeasurementParams(
                lam=lam, metric="euclidean", radius=args.radius))
            accs.append(label_accuracy(res.labels, truth.side[patch.indices]))
            errs.append(abs(res.theta - args.angle))
        print(f"{lam:6.1f} {np.mean(accs):9.4f} {np.min(accs):8.4f} "
              f"{np.mean(errs):10.4f}")


if __name__ == "__main__":
    main()

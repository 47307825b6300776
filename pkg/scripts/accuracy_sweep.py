#!/usr/bin/env python3
"""Sweep wedge angles and noise levels, reporting measurement error.

Usage:
    python3 scripts/accuracy_sweep.py [--vertices 2000] [--radius 0.35]
"""

import argparse
import time

from meshgonio.core import MeasurementParams, measure
from meshgonio.mesh import estimate_normals
from meshgonio.patch import extract_patch_by_point
from meshgonio.shapes import WedgeSpec, make_wedge

ANGLES = [1, 2, 5, 10, 20, 45, 60, 90, 120, 150, 170, 179]
SIGMAS = [0.0, 0.001, 0.0035, 0.01]


def run(angle, sigma, vertices, radius, seed=0):
    mesh, _ = make_wedge(WedgeSpec(angle, vertices_per_side=vertices,
                                   noise_sigma=sigma, seed=seed))
    if sigma > 0:
        mesh.normals = estimate_normals(mesh)
    patch = extract_patch_by_point(mesh, None, (0.5, 0, 0), radius,
                                   "euclidean")
    result = measure(patch, MeasurementParams(lam=2.0, metric="euclidean",
                                              radius=radius))
    return result.theta, patch.size


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--vertices", type=int, default=2000)
    ap.add_argument("--radius", type=float, default=0.35)
    args = ap.parse_args()

    print(f"{'angle':>6} {'sigma':>7} {'theta':>9} {'error':>8} {'n':>5}")
    start = time.perf_counter()
    for sigma in SIGMAS:
        for angle in ANGLES:
            theta, n = run(angle, sigma, args.vertices, args.radius)
            print(f"{angle:6.0f} {sigma:7.4f} {theta:9.4f} "
                  f"{abs(theta - angle):8.4f} {n:5d}")
    print(f"\ntotal {time.perf_counter() - start:.2f} s")


if __name__ == "__main__":
    main()

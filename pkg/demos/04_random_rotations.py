"""Influence sums after random rotations.

A convex set aligned with the axes can have a small influence sum, but a
Haar-random rotation spreads its boundary over all coordinates. For a
half-space the rotated sum is ``||M u||_1 phi(b)``, which is about
``sqrt(2n/pi) phi(b)`` for a typical rotation.
"""
import math

import numpy as np

from geoinfluence import BoxLower, Gaussian, HalfSpace, MCConfig, ProductSpace, haar_sample, rotation_scan
from geoinfluence.bounds import box_exact
from geoinfluence.rotation import mean_abs_l1_norm

Q = haar_sample(5, seed=0)
print("Haar sample, n = 5: max |Q^T Q - I| =", f"{np.abs(Q.matrix.T @ Q.matrix - np.eye(5)).max():.1e}")

for n in (4, 16, 64):
    P = ProductSpace.iid(Gaussian(), n)
    H = HalfSpace(np.eye(n)[0], 0.0)
    scan = rotation_scan(H, P, 200, MCConfig(seed=11, samples=1_000))
    phi0 = 1 / math.sqrt(2 * math.pi)
    print(f"n = {n:3d}: mean rotated sum {scan.mean:.4f}, exact expectation "
          f"{mean_abs_l1_norm(n) * phi0:.4f}, sqrt(2n/pi) phi(0) = {math.sqrt(2 * n / math.pi) * phi0:.4f}")

# the half-measure box is estimated by Monte Carlo for each rotation
n = 8
P = ProductSpace.iid(Gaussian(), n)
bx = box_exact(n, "gaussian")
box = BoxLower(np.full(n, bx.a_n))
scan = rotation_scan(box, P, 10, MCConfig(seed=5, samples=5_000))
print(f"\nbox (-inf, {bx.a_n:.3f}]^{n}: aligned sum {bx.total:.4f}, "
      f"rotated sums {scan.sums.min():.4f}..{scan.sums.max():.4f}")
print("rotation lower bound:", scan.report.row())

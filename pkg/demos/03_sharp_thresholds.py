"""Sharp thresholds for increasing sets under shifted Gaussians.

Shifting every coordinate by ``alpha`` moves the measure of an increasing
set from 0 to 1. The speed of that transition is the influence sum, and
for the max threshold ``{max x_i > K}`` the window shrinks like
``1 / sqrt(log n)``. The same computation gives the power of the test that
rejects when the largest observation is large.
"""
import math

import numpy as np

from geoinfluence import Gaussian, MCConfig, MaxThreshold, SumThreshold, max_test_power, measure_curve, russo_check
from geoinfluence.russo import max_threshold_alpha, width_check

G = Gaussian()
A = MaxThreshold(0.0)
curve = measure_curve(A, G, 8, np.linspace(-1.5, 1.5, 7), MCConfig(seed=3, samples=20_000))
print("alpha   measure (n = 8, max threshold at 0)")
for row in curve.rows():
    print(f"{row['alpha']:5.2f}   {row['value']:.4f} +- {row['stderr']:.1e}")

# derivative of the curve against the influence sum under the shifted measure
r = russo_check(SumThreshold(0.0), G, 5, 0.3, MCConfig(seed=3, samples=20_000))
print(f"\nsum threshold, n = 5: derivative {r.finite_difference:.5f}, influence sum {r.influence_sum:.5f}")

print("\n      n   width(eps = 0.1)   width * sqrt(log n)")
for n in (10, 100, 1000, 10_000):
    w = width_check(A, n, 0.1).lhs
    print(f"{n:7d}   {w:16.4f}   {w * math.sqrt(math.log(n)):19.4f}")
print(f"\nshift at which the measure is 1/2 for n = 1000: {max_threshold_alpha(0.0, 1000, 0.5):.4f}")

print("\nmax test at level 0.05, theta1 - theta0 = 0.5")
for n in (10, 100, 1000):
    p = max_test_power(0.0, 0.5, 0.05, n)
    print(f"n = {n:5d}: critical value {p.K:.4f}, power {p.power:.4f}")

"""The box family and the logarithmic gain in the maximal influence.

The box ``(-inf, a_n]^n`` with ``F(a_n)^n = 1/2`` has every influence equal
to ``(1/2)^((n-1)/n) f(a_n)``. Under the Boltzmann measure with exponent
``rho`` the maximal influence scales like ``(log n)^(1-1/rho) / n``, which
is why the normalised column below stays in a narrow band.
"""
import numpy as np

from geoinfluence.bounds import box_exact, check_kkl, rho_exponent

for rho in (1.5, 2.0, 3.0, "gaussian"):
    print(f"rho = {rho}")
    print("      n        a_n   influence   n*I/(t(1-t)(log n)^e)  pass")
    for k in (2, 4, 8, 12):
        n = 2**k
        bx = box_exact(n, rho)
        rep = check_kkl([bx.influence], 0.5, n, rho)
        print(f"{n:7d}  {bx.a_n:9.4f}  {bx.influence:.4e}  {rep.implied_constant:21.4f}  {rep.passed}")
    print()

# the exponent of log n is read off a log-log fit
ns = 2 ** np.arange(2, 13)
for rho in (1.5, 2.0, 3.0):
    I = np.array([box_exact(int(n), rho).influence for n in ns])
    slope = np.polyfit(np.log(np.log(ns)), np.log(ns * I), 1)[0]
    print(f"rho = {rho}: fitted exponent {slope:.3f}, asymptotic {rho_exponent(rho):.3f}")

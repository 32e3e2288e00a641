"""Non-degenerate (ND) power profiles and the Pohozaev identity with absorption.

Run:  python3 demos/04_nd_profiles_and_pohozaev.py
"""
import math

import numpy as np

from blowup_profiles import ProblemParams, identity_residual, integrate, nd_profile, regime_of
from blowup_profiles.params import nd_exponent
from blowup_profiles.pohozaev import nonlinearity, pohozaev_at

# On u* = coeff r^{-p_nd} the two nonlinear terms cancel identically.
for q, mu in [(2.5, 1.0), (2.5, 4.0), (2.8, 0.3)]:
    p = ProblemParams(4, 1.0, q, mu)
    nd = nd_profile(p)
    r = np.geomspace(1e-3, 1.0, 4)
    u = nd(r)
    f = nonlinearity(p, r, u).f
    rel = np.abs(f) / (mu * u ** q)
    print(f"q = {q}, mu = {mu}: p_nd = {nd.p_nd:.4f}, coeff = {nd.coeff:.4f}, max |f(r, u*)| / (mu u*^q) = {rel.max():.1e}")

print("\np_nd against (n-2)/2 = 1 at (n, s) = (4, 1):")
for q in (2.2, 2.6, 2.99, 3.0, 3.5):
    p = ProblemParams(4, 1.0, q, 1.0)
    print(f"  q = {q:<5} p_nd = {nd_exponent(p):.4f}  regime {regime_of(p).tag.value}")

# A solution of the perturbed equation moves P_r by exactly the bulk integral.
p = ProblemParams(4, 1.0, 2.5, 1.0)
tr = integrate(p, (math.log(2), 1.0, 0.0), math.log(20))
rep = identity_residual(p, tr, 0.05, 0.5)
print(f"\nP(0.5) - P(0.05) = {rep.P_r2 - rep.P_r1:.12f}")
print(f"bulk integral    = {rep.bulk:.12f}  (quadrature error {rep.bulk_error:.1e})")
print(f"relative residual {rep.relative_residual:.1e};  exact-invariant drift of the integration {tr.drift:.1e}")
for r in (0.5, 0.2, 0.05):
    print(f"  P_r at r = {r}: {pohozaev_at(p, tr, r):+.9f}")

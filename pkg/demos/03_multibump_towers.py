"""Build a multi-bump tower of bubbles and recover its recurrence.

Run:  python3 demos/03_multibump_towers.py
"""
import math
import warnings

import numpy as np

from blowup_profiles import (
    BubbleSum, ProblemParams, asymptotic_pohozaev, classify, critical_radii, convexity_threshold,
    mb_fit, mb_generate, mb_recurrence_constant, w_trace,
)

p = ProblemParams(4, 1.0, 2.5, 1.0)
rc = mb_recurrence_constant(p)
print(f"r_(k+1) = K r_k^beta   K = {rc.K:.10e} (= 3/9800: {3 / 9800:.10e})   beta = {rc.beta}")

with warnings.catch_warnings(record=True) as caught:
    warnings.simplefilter("always")
    radii = mb_generate(p, 0.9, 12)
print(f"{len(radii)} radii fit in double precision ({caught[0].message if caught else 'no truncation'}):")
for r in radii:
    print(f"  {r:.6e}")

# Superpose the bubbles in Emden-Fowler variables and look at w = r^{(n-2)/2} u.
src = BubbleSum(p, radii)
t = np.linspace(-math.log(radii[0]) - 1, -math.log(radii[-1]) + 10, 40000)
trace = w_trace(p, src, np.exp(-t))
cr = critical_radii(trace, convexity_threshold(p))
print(f"\nmaxima of w (should sit at the radii, w ≈ c_ns/4 = 1.5):")
for r, w in zip(cr.maxima, cr.w_at_max):
    print(f"  r = {r:.6e}  w = {w:.6f}")
print("minima of w, all below eps0 =", convexity_threshold(p), ":", [f"{w:.2e}" for w in cr.w_at_min])

res = classify(p, trace)
print(f"\nverdict: {res.tag.value}  (liminf ≈ {res.liminf_est:.2e}, limsup ≈ {res.limsup_est:.4f}, {res.windows} windows)")
fit = mb_fit(p, cr.maxima, cr.minima)
print(f"fit from located maxima: beta = {fit.beta_hat:.8f}, K = {fit.K_hat:.8e}")
print("tau_k / sqrt(r_k r_(k+1)):", [f"{x:.6f}" for x in fit.tau_check])

asym = asymptotic_pohozaev(p, src)
print(f"\nasymptotic Pohozaev of the tower: {asym.value:.3e} (scale ω K_ns = {p.table.omega * p.table.K_ns:.3f})")

"""Walk through the unperturbed equation (mu = 0) in Emden-Fowler variables.

Run:  python3 demos/01_bubbles_and_periodic_orbits.py
"""
import math

import numpy as np

from blowup_profiles import ProblemParams, dynamics as dy, pohozaev_at

p = ProblemParams(4, 1.0, 2.5, 0.0)
tab = p.table
print(f"(n, s) = ({p.n}, {p.s}):  2*(s) = {tab.two_star_s},  c_ns = {tab.c_ns:.6g},  K_ns = {tab.K_ns:.6g}")

# The bubble U_1 becomes the homoclinic orbit v_0 after the change of variables.
for r in (0.1, 1.0, 10.0):
    st = dy.ef_transform(p, r, dy.bubble_profile(p, 1.0, r), dy.bubble_derivative(p, 1.0, r))
    print(f"  r = {r:5}:  v = {st.v:.12f}   v0(t) = {dy.homoclinic_profile(p, st.t):.12f}")

# Integrating from the apex reproduces v_0 until the saddle at 0 takes over.
tr = dy.integrate(p, dy.PhaseState(0.0, 1.5, 0.0), 30.0, tol=2.5e-14, atol=1e-20)
t = np.linspace(0, 10, 6)
v, _ = tr.ef_state(t)
print("\n  t    integrated        closed form")
for ti, vi in zip(t, v):
    print(f"  {ti:4.1f} {vi:.12e} {dy.homoclinic_profile(p, ti):.12e}")
print(f"  halted at t = {tr.t_span[1]:.2f} ({tr.halt_reason.value}); invariant drift {tr.drift:.1e}")

# Levels 0 < K < K_ns carry periodic orbits; the period grows as K -> 0.
print("\n  K/K_ns    v_min      v_max      period")
for frac in (0.999, 0.5, 0.1, 1e-3, 1e-6):
    K = frac * tab.K_ns
    lo, hi = dy.turning_points(p, K)
    print(f"  {frac:<8g} {lo:.6f}  {hi:.6f}  {dy.period(p, K):.6f}")
print(f"  small-oscillation limit 2π/((n-2)/2 sqrt(2*(s)-2)) = {2 * math.pi / (tab.half * math.sqrt(tab.two_star_s - 2)):.6f}")

# The Pohozaev-type integral reads off the level: 0 on bubbles, ω K on v_K.
vk = dy.ClosedFormProfile.periodic(p, 1 / 12)
print(f"\n  P_r(v_K) at r = 0.3: {pohozaev_at(p, vk, 0.3):.12f}   ω K = {tab.omega / 12:.12f}")
print(f"  P_r(U_1) at r = 0.3: {pohozaev_at(p, dy.ClosedFormProfile.bubble(p), 0.3):.2e}")

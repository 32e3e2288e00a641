"""The critical exponent q = 2*-1: equilibria, thresholds and orbit types.

Run:  python3 demos/02_critical_phase_plane.py
"""
import math

import numpy as np

from blowup_profiles import ProblemParams, crit_classify_orbit, crit_equilibria, critical_thresholds, integrate
from blowup_profiles.params import crit_F

base = ProblemParams(4, 1.0, 3.0, 0.0)
th = critical_thresholds(base)
print(f"mu0 = {th.mu0}   mu1 (operational) = {th.mu1_operational:.12f}   mu1 (closed form) = {th.mu1_printed}")
print("the closed-form mu1 does not reproduce F(v+) = F'(v+) = 0; the operational value does\n")

# Below mu1 the saddle level sits above 0; above mu1 it drops below 0.
print("   mu      v-        v+        E_center    E_sep")
for mu in (0.15, 0.2, 2 / 9, 0.23, 0.24, 0.25):
    p = base.with_mu(mu)
    eq = crit_equilibria(p)
    E_c, E_s = -float(crit_F(p, eq.v_minus)), -float(crit_F(p, eq.v_plus))
    print(f"  {mu:.4f}  {eq.v_minus:.6f}  {eq.v_plus:.6f}  {E_c:+.6f}  {E_s:+.6f}{'  (double root)' if eq.degenerate else ''}")

# Sample orbits at mu = 0.23, where a homoclinic loop to v+ exists.
p = base.with_mu(0.23)
eq = crit_equilibria(p)
E_sep = -float(crit_F(p, eq.v_plus))
starts = {
    "well, low energy": (eq.v_minus, 0.2),
    "separatrix": (eq.v_minus, math.sqrt(2 * (E_sep + float(crit_F(p, eq.v_minus))))),
    "beyond v+": (eq.v_plus * 1.1, 0.0),
    "strong kick": (1.0, 2.0),
}
gaps = {}
print()
for name, (v0, dv0) in starts.items():
    cls = crit_classify_orbit(p, (0.0, v0, dv0))
    tr = integrate(p, (0.0, v0, dv0), 40.0, tol=1e-14, atol=1e-18)
    v = tr.ef_state(np.linspace(0, tr.t_span[1], 20001))[0]
    print(f"  {name:18s} {cls.tag.value:20s} E = {cls.energy:+.5f}  v in [{v.min():.4f}, {v.max():.4g}]"
          f"  ({tr.halt_reason.value} at t = {tr.t_span[1]:.1f})")
    gaps[name] = np.abs(v - eq.v_plus).min()
# Rounding pushes the separatrix orbit off the stable manifold eventually, so
# it overshoots v+ late in the run; what matters is how close it gets first.
print(f"\n  separatrix orbit: closest approach to v+ = {eq.v_plus:.6f} is {gaps['separatrix']:.1e}")

"""Dispersion relation, its special radii, and where quadratic resonances live.

Run: python3 demos/01_dispersion_and_resonances.py
"""
import numpy as np

from wwlab import resonance as res
from wwlab.dispersion import (frequency, frequency_deriv, inflection_radius,
                              resonant_sphere_radius)

# The frequency lam(r) = sqrt(r + r^3) mixes a capillary and a gravity regime.
# Its second derivative changes sign once: curvature vanishes at gamma0.
g0 = inflection_radius()
print(f"inflection radius gamma0 = {g0:.11f}")
for k in range(5):
    print(f"  d^{k} lam(gamma0) = {float(frequency_deriv(g0, k) if k else frequency(g0)):+.8f}")

# Two waves of radius x/2 combine resonantly into one of radius x only at sqrt(2).
g1 = res.spacetime_resonant_radius()
print(f"space-time resonant radius = {g1:.15f} (sqrt 2 = {np.sqrt(2):.15f})")
assert abs(g1 - resonant_sphere_radius()) < 1e-12

# Matching group velocities lam'(a) = lam'(b) pairs each a > gamma0 with a radius below it.
for a in (0.5, 1.0, 5.0, 50.0):
    b = float(res.conjugate_radius(a))
    print(f"  a = {a:5.1f} -> conjugate b = {b:.6f}, ab = {a * b:.4f}")

# Collinear sum resonance lam(a+b) = lam(a) + lam(b) pins the product ab to [4/9, 1/2].
for a in (0.1, 1.0, 10.0):
    b = float(res.sum_resonance_partner(a))
    print(f"  a = {a:5.1f} -> sum partner b = {b:.6f}, ab = {a * b:.4f}")

# Dense sampling certifies sign conditions used by the resonance analysis.
for cid, interval in [("F1", (2 * g0, 1.0)), ("G1", (3.0, 110.0)), ("G1", (1.7, 3.0))]:
    rep = res.certify_positive(cid, interval, 5000)
    print(f"  {cid} on [{interval[0]:.3f}, {interval[1]:.1f}]: {rep.verdict}, "
          f"min {rep.min_value:.4f}, roots {[round(r, 4) for r in rep.roots]}")

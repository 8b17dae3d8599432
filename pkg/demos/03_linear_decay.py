"""Dispersive decay of linear waves and the slowdown caused by the inflection radius.

Generic radial data decay like t^(-5/6) because the frequency has zero
curvature at gamma0. Removing that shell from the spectrum restores the t^(-1)
rate of nondegenerate two-dimensional dispersion.

Run: python3 demos/03_linear_decay.py   (a few minutes)
"""
import numpy as np

from wwlab import benchmarks as bm

times = np.geomspace(10, 1000, 4)
for kind in ("gaussian", "excised"):
    out = bm.linear_decay_benchmark(kind, times=times)
    sups = ", ".join(f"{v:.3e}" for v in out["sup"])
    print(f"{kind:8s}: sup|u(t)| = [{sups}] -> exponent {out['slope']:.3f}")
print(f"reference exponents: {-5 / 6:.3f} (degenerate) and -1 (nondegenerate)")

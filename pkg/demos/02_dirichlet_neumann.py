"""The Dirichlet-Neumann operator and its small-amplitude expansion.

Solves the Laplace problem under a perturbed surface and compares the result
with the linear, quadratic and cubic truncations. Halving the amplitude should
shrink the remainder by 8 after the quadratic term and by 16 after the cubic.

Run: python3 demos/02_dirichlet_neumann.py   (about a minute)
"""
import numpy as np

from wwlab import benchmarks as bm
from wwlab.dirichlet_neumann import dn_cubic, dn_exact, dn_quadratic
from wwlab.grid import Grid2D

grid = Grid2D(32, 16 * np.pi)
base = bm.unit_state(grid, seed=0, band=4)
eps = 2.0 ** -np.arange(7, 11)
rows = []
for e in eps:
    s = base.scaled(e)
    G = dn_exact(s).G
    r1 = G - s.phi.multiply(grid.kabs, real=True)
    r2 = r1 - dn_quadratic(s)
    r3 = r2 - dn_cubic(s)
    rows.append((r1.norm(), r2.norm(), r3.norm()))
    print(f"eps = 2^{int(np.log2(e))}: after linear {rows[-1][0]:.3e}  "
          f"after quadratic {rows[-1][1]:.3e}  after cubic {rows[-1][2]:.3e}")

rows = np.array(rows)
for j, name in enumerate(("linear", "quadratic", "cubic")):
    slope = np.polyfit(np.log(eps), np.log(rows[:, j]), 1)[0]
    print(f"remainder after {name:9s} scales like eps^{slope:.2f}")

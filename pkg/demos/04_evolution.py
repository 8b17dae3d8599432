"""Time evolution of a small Gaussian wave packet.

The truncated system is Hamiltonian, so the energy should be conserved up to
the time-stepping error, and the mean surface height exactly.

Run: python3 demos/04_evolution.py   (under a minute)
"""
import numpy as np

from wwlab import benchmarks as bm
from wwlab.evolution import run

config = bm.reference_config(n=32, L=16 * np.pi, T_final=5.0, cadence=50)
traj = run(config)
H = np.asarray(traj.diagnostics["H"])
for t, h in zip(traj.times, H):
    print(f"t = {t:5.2f}  energy = {h:.15e}")
print(f"relative energy drift {np.max(np.abs(H - H[0])) / abs(H[0]):.2e}")
print(f"mean height change {np.ptp(traj.diagnostics['mean_h']):.1e}")

# A single small Fourier mode oscillates at the linear frequency.
out = bm.single_mode_benchmark()
print(f"single mode: measured frequency {out['measured']:.12f}, "
      f"predicted {out['predicted']:.12f}, relative error {out['relative_error']:.1e}")

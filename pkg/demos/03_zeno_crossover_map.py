"""Quantum Zeno and anti-Zeno regions on the (r, omega_c tau) plane.

The ratio gamma_Z / gamma_0 compares the decay rate under measurements spaced
by tau with the unmeasured Markovian rate.  Below one the measurements slow
the decay (Zeno); above one they speed it up (anti-Zeno).
"""
# %%
import numpy as np

from qbm_decoherence.spectral import SpectralModel, ThermalBath
from qbm_decoherence.zeno import crossover_map, crossover_times, zeno_ratio

bath = ThermalBath(100.0)

# %% [markdown]
# One reservoir, a sweep over the measurement interval.

# %%
m = SpectralModel.named("superohmic", g=0.1, r=1.2)
for wct in (0.05, 0.3, 1.0, 3.0, 10.0):
    print(f"omega_c tau = {wct:5.2f}  ratio = {zeno_ratio(m, bath, wct / m.omega_c):.4f}")
print("crossovers at omega_c tau =", crossover_times(m, bath, (0.05, 10.0)))

# %% [markdown]
# A coarse map.  Each column is one value of r; roots mark where the ratio
# crosses one.

# %%
r_grid = np.linspace(0.5, 2.0, 7)
tau_grid = np.geomspace(0.05, 10.0, 9)
zmap = crossover_map("superohmic", 0.1, bath, r_grid, tau_grid)
labels = {"QZE": "Z", "AZE": "A", "boundary": "="}
print("r      " + " ".join(f"{x:5.2f}" for x in tau_grid))
for i, r in enumerate(zmap.r_grid):
    cells = "".join(f"{labels[c]:>6}" for c in zmap.classification[i])
    print(f"{r:5.2f} {cells}   roots: {np.round(zmap.roots[i], 3).tolist()}")

"""Fringe visibility of a Schrodinger-cat state and a reservoir ranking.

The visibility F measures how much of the interference term between the two
coherent components survives.  Time is shown in the unitless variable
Gamma' t = 2 g^2 omega_0 t.
"""
# %%
import numpy as np

from qbm_decoherence.decoherence import (CatState, Regime, compare_reservoirs,
                                         fringe_trace, fringe_visibility)
from qbm_decoherence.kernels import CoefficientMode
from qbm_decoherence.spectral import SpectralModel, ThermalBath

bath = ThermalBath(100.0)
g = 0.1

# %% [markdown]
# The closed form at fixed heating and damping.  With no diffusion the fringe
# is untouched; on resonance the same heating costs less visibility.

# %%
cat = CatState(1.0)
print("F(N=0)          =", fringe_visibility(cat, 0.0, 0.0, Regime.OFF_RESONANT))
print("F off-resonant  =", fringe_visibility(cat, 0.5, 0.0, Regime.OFF_RESONANT))
print("F resonant      =", fringe_visibility(cat, 0.5, 0.0, Regime.RESONANT))

# %% [markdown]
# Non-Markovian against Markovian coefficients early on.  Far below resonance
# the memory speeds up the loss of the fringe; far above it slows it down.

# %%
gpt = np.linspace(0.0, 0.05, 6)
times = gpt / (2 * g * g)
for r, regime in ((0.1, Regime.OFF_RESONANT), (10.0, Regime.RESONANT)):
    m = SpectralModel.named("ohmic", g, r)
    nm = fringe_trace(cat, m, bath, times, regime).visibility
    mk = fringe_trace(cat, m, bath, times, regime, CoefficientMode.MARKOVIAN).visibility
    print(f"r = {r:g}")
    for x, a, b in zip(gpt, nm, mk):
        print(f"   Gamma't = {x:.3f}  F_NM = {a:.4f}  F_M = {b:.4f}")

# %% [markdown]
# Ranking the three reservoirs for a larger cat.  Areas are taken over the
# decoherence window, the time it takes the slowest reservoir to fall to 1/e.

# %%
gpt = np.concatenate([[0.0], np.geomspace(1e-6, 3.0, 200)])
models = [SpectralModel.named(k, g, 10.0) for k in ("ohmic", "subohmic", "superohmic")]
comp = compare_reservoirs(CatState(2.0), models, bath, gpt / (2 * g * g), Regime.RESONANT)
print("window Gamma't <=", f"{comp.window:.3g}")
for label in comp.ranking:
    print(f"   {label:>10}  area = {comp.area_of(label):.4g}")

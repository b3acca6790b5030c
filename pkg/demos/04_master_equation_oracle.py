"""Checking the closed forms against a truncated Fock-space master equation.

The oracle integrates the density matrix directly.  It reproduces the fringe
visibility from the Wigner function and the survival probability under
repeated nonselective energy measurements.
"""
# %%
import numpy as np

from qbm_decoherence.decoherence import CatState, Regime, fringe_trace
from qbm_decoherence.oracle import (Equation, EvolutionSpec, InterpolatedCoefficients,
                                    evolve_cat, fringe_from_trajectory,
                                    survival_probability)
from qbm_decoherence.spectral import SpectralModel, ThermalBath
from qbm_decoherence.zeno import effective_decay_rate

bath = ThermalBath(100.0)

# %% [markdown]
# Off resonance, secular equation.  The coefficients are splined once and
# handed to the integrator; the diffusion picture takes over automatically
# while Delta is negative.

# %%
m = SpectralModel.named("ohmic", g=0.1, r=0.1)
t_max = 0.5 / (2 * m.g ** 2)
times = np.linspace(0.0, t_max, 11)
coeffs = InterpolatedCoefficients.from_model(m, bath, t_max)
spec = EvolutionSpec(Equation.SECULAR, coeffs, (0.0, t_max))
oracle = fringe_from_trajectory(evolve_cat(1.0, spec, times, dim=74))
closed = fringe_trace(CatState(1.0), m, bath, times, Regime.OFF_RESONANT).visibility
for t, a, b in zip(times, oracle, closed):
    print(f"Gamma't = {2 * m.g ** 2 * t:.2f}  oracle {a:.5f}  closed form {b:.5f}")

# %% [markdown]
# Repeated measurements on Fock states.  The fitted decay rate grows with n,
# because the leak out of |n> scales roughly as (2n + 1) N(tau).  For n = 2 the
# single-interval survival drops just under 0.9 and a RuntimeWarning says so.

# %%
m = SpectralModel.named("ohmic", g=0.05, r=1.0)
tau = 0.3
coeffs = InterpolatedCoefficients.from_model(m, bath, tau)
spec = EvolutionSpec(Equation.SECULAR, coeffs, (0.0, tau))
print("N(tau)/tau =", f"{effective_decay_rate(m, bath, tau):.4f}")
for n in (0, 1, 2):
    res = survival_probability(n, tau, 10, spec)
    print(f"n = {n}  P = {res.probability:.4f}  fitted rate = {res.fitted_rate:.4f}")

"""Time-dependent diffusion and damping for the three reservoir families.

Run with ``python demos/01_reservoir_coefficients.py``.  Times are in units
of 1/omega_0 and r = omega_c / omega_0 sets how far the cutoff sits from the
oscillator frequency.
"""
# %%
import numpy as np

from qbm_decoherence.kernels import compute_coefficients, trace
from qbm_decoherence.spectral import (SpectralModel, ThermalBath, eval_i, eval_j,
                                      markovian_delta, markovian_gamma)

bath = ThermalBath(100.0)          # high-temperature bath, kT = 100 hbar omega_0

# %% [markdown]
# The spectral density J and the thermal weight I = J kT / omega for each family,
# sampled at a few frequencies around omega_0 = 1.

# %%
w = np.array([0.1, 0.5, 1.0, 2.0, 5.0])
for kind in ("ohmic", "subohmic", "superohmic"):
    m = SpectralModel.named(kind, g=0.1, r=1.0)
    print(f"{kind:>10}  J = {np.array2string(eval_j(m, w), precision=4)}")
    print(f"{'':>10}  I = {np.array2string(eval_i(m, bath, w), precision=4)}")

# %% [markdown]
# At a single time the four coefficients come out of one quadrature each.
# Delta and gamma approach their Markovian values once omega_c t >> 1.

# %%
m = SpectralModel.named("ohmic", g=0.1, r=10.0)
for t in (0.01, 0.1, 1.0, 10.0, 50.0):
    (delta, gamma, heating, big_gamma), _err = compute_coefficients(m, bath, t)
    print(f"t = {t:6.2f}  Delta/Delta_M = {delta / markovian_delta(m, bath):.4f}  "
          f"gamma/gamma_M = {gamma / markovian_gamma(m):.4f}  N = {heating:.4g}  "
          f"Gamma = {big_gamma:.4g}")

# %% [markdown]
# A whole trace on a grid.  With the cutoff well below omega_0 (r = 0.1) the
# diffusion coefficient swings far above its Markovian value and changes sign
# repeatedly; Delta_M itself is tiny there because J(omega_0) sits deep in the tail.

# %%
slow = SpectralModel.named("ohmic", g=0.1, r=0.1)
tr = trace(slow, bath, np.linspace(0.0, 60.0, 13))
for t, d in zip(tr.times, tr.delta / tr.delta_markov):
    print(f"t = {t:5.1f}  Delta/Delta_M = {d:+.4f}")
print("Delta < 0 somewhere:", bool(np.any(tr.delta < 0)))

"""Independent reference computations shared by the tests.

None of these reuse the package's closed-form time kernels or its
quadrature; they evaluate the defining integrals directly.
"""

import math

import numpy as np
from scipy.integrate import quad

from qbm_decoherence.spectral import eval_i


def delta_double_integral(model, bath, t, n_nodes=400):
    """2 int dw I(w) int_0^t cos(w t') cos(w0 t') dt', inner integral by
    Gauss-Legendre on the t' axis, outer integral by QUADPACK."""
    x, wts = np.polynomial.legendre.leggauss(n_nodes)
    tp = 0.5 * t * (x + 1.0)
    wts = 0.5 * t * wts
    base = np.cos(model.omega_0 * tp) * wts

    def inner(w):
        return float(np.dot(np.cos(w * tp), base))

    def integrand(w):
        return 2.0 * eval_i(model, bath, w) * inner(w)

    upper = 60.0 * model.omega_c
    brk = [model.omega_0] if model.omega_0 < upper else None
    if model.s < 1:
        # w^(s-1) origin singularity: integrate the regular remainder with the
        # algebraic weight rule on the first stretch.
        head = min(1e-2, 0.5 * model.omega_0)
        def pref(w):
            w = max(w, 1e-300)  # the weighted rule samples the endpoint
            return 2.0 * eval_i(model, bath, w) * w ** (1.0 - model.s) * inner(w)
        h, _ = quad(pref, 0.0, head, weight="alg", wvar=(model.s - 1.0, 0.0),
                    epsabs=0, epsrel=1e-11, limit=500)
        b, _ = quad(integrand, head, upper, points=brk, epsabs=0, epsrel=1e-11, limit=5000)
        return h + b
    v, _ = quad(integrand, 0.0, upper, points=brk, epsabs=0, epsrel=1e-11, limit=5000)
    return v


def correlation_coefficients(g, omega_c, s, kT, t):
    """Delta(t), gamma(t) and N(t) from the high-temperature bath correlation
    functions C(u) = g^2 kT w_c Gamma(s) Re[(1 - i w_c u)^(-s)] and
    S(u) = g^2 w_c^2 Gamma(s+1) Im[(1 - i w_c u)^(-(s+1))]."""
    c0 = g * g * kT * omega_c * math.gamma(s)
    s0 = g * g * omega_c ** 2 * math.gamma(s + 1.0)
    C = lambda u: c0 * ((1 - 1j * omega_c * u) ** (-s)).real
    S = lambda u: s0 * ((1 - 1j * omega_c * u) ** (-(s + 1.0))).imag
    opts = dict(epsabs=1e-14, epsrel=1e-12, limit=2000)
    delta = 2.0 * quad(C, 0.0, t, weight="cos", wvar=1.0, **opts)[0]
    gamma = quad(S, 0.0, t, weight="sin", wvar=1.0, **opts)[0]
    heating = 2.0 * quad(lambda u: (t - u) * C(u), 0.0, t, weight="cos", wvar=1.0, **opts)[0]
    return delta, gamma, heating


def cat_wigner(alpha, beta):
    """Analytic Wigner function of the normalized even cat with real alpha."""
    b = complex(beta)
    norm = 2.0 * (1.0 + math.exp(-2.0 * alpha ** 2))
    val = (math.exp(-2 * abs(b - alpha) ** 2) + math.exp(-2 * abs(b + alpha) ** 2)
           + 2.0 * math.exp(-2 * abs(b) ** 2) * math.cos(4.0 * alpha * b.imag))
    return (2.0 / math.pi) * val / norm

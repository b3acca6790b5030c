"""Time-dependent diffusion and dissipation coefficients.

The time integrals in the second-order coefficients are done analytically,

    Delta(t) = 2 int dw I(w) Kc(w, t),   gamma(t) = int dw J(w) Ks(w, t),
    Kc = sin((w-w0)t)/(2(w-w0)) + sin((w+w0)t)/(2(w+w0)),
    Ks = sin((w-w0)t)/(2(w-w0)) - sin((w+w0)t)/(2(w+w0)),

and so are the cumulative integrals N(t) and Gamma(t), whose kernels are
Fejer-type (1 - cos(x t)) / (2 x^2).  What remains is one oscillatory
frequency integral per quantity, handled by panel-wise Gauss-Kronrod with
panels no wider than a quarter oscillation.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import quadrature
from ._parallel import parallel_map
from .quadrature import ConvergenceError
from .spectral import (SpectralModel, ThermalBath, markovian_delta, markovian_gamma,
                       thermal_weight)

__all__ = [
    "CoefficientMode", "CoefficientTrace", "ConvergenceError", "QuadratureConfig",
    "compute_big_gamma", "compute_coefficients", "compute_delta", "compute_gamma",
    "compute_heating", "trace",
]

# |w - w0| below this fraction of w0 switches the kernels to their Taylor series.
_SERIES_THRESHOLD = 1e-6


class CoefficientMode(enum.Enum):
    NON_MARKOVIAN = "nonmarkovian"
    MARKOVIAN = "markovian"


@dataclass(frozen=True)
class QuadratureConfig:
    rel_tol: float = 1e-8
    abs_tol: float = 1e-12
    omega_max_factor: float = 60.0
    max_subdivisions: int = 2000

    def __post_init__(self):
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise ValueError("quadrature tolerances must be positive")
        if self.omega_max_factor < 30:
            raise ValueError("omega_max_factor must be at least 30")
        if int(self.max_subdivisions) < 1:
            raise ValueError("max_subdivisions must be a positive integer")


DEFAULT_QUADRATURE = QuadratureConfig()


def _half_sinc(x, t):
    """sin(x t) / (2 x), with the removable singularity at x = 0."""
    y = x * t
    small = np.abs(x) < _SERIES_THRESHOLD
    y2 = y * y
    series = 0.5 * t * (1.0 - y2 / 6.0 + y2 * y2 / 120.0)
    safe = np.where(small, 1.0, x)
    return np.where(small, series, np.sin(y) / (2.0 * safe))


def _fejer(x, t):
    """(1 - cos(x t)) / (2 x^2) = sin^2(x t / 2) / x^2."""
    y = x * t
    small = np.abs(x) < _SERIES_THRESHOLD
    y2 = y * y
    series = 0.25 * t * t * (1.0 - y2 / 12.0 + y2 * y2 / 360.0)
    safe = np.where(small, 1.0, x)
    return np.where(small, series, np.sin(0.5 * y) ** 2 / (safe * safe))


def _spectral_weights(model, bath, w):
    """J(w) and I(w) at nodes w > 0, sharing the power and exponential."""
    j = model.g ** 2 * model.omega_c ** (1.0 - model.s) * w ** model.s * np.exp(-w / model.omega_c)
    if bath is None:
        return j, None
    return j, j * thermal_weight(bath, w)


_COMPONENTS = ("delta", "gamma", "heating", "big_gamma")


def _integrand(model, bath, t, which):
    w0 = model.omega_0

    def f(w):
        j, i = _spectral_weights(model, bath, w)
        xm, xp = w - w0, w + w0
        rows = []
        if "delta" in which or "gamma" in which:
            hm, hp = _half_sinc(xm, t), _half_sinc(xp, t)
        if "heating" in which or "big_gamma" in which:
            fm, fp = _fejer(xm, t), _fejer(xp, t)
        for name in which:
            if name == "delta":
                rows.append(2.0 * i * (hm + hp))
            elif name == "gamma":
                rows.append(j * (hm - hp))
            elif name == "heating":
                rows.append(2.0 * i * (fm + fp))
            else:
                rows.append(2.0 * j * (fm - fp))
        return np.vstack(rows)

    return f


def _panel_edges(model, t, lo, hi):
    width = 0.5 * min(model.omega_c, model.omega_0)
    if t > 0:
        width = min(width, math.pi / (4.0 * t))
    n = max(2, int(math.ceil((hi - lo) / width)))
    return np.linspace(lo, hi, n + 1)


def _frequency_integrals(model, bath, t, which, cfg):
    """Value and error estimate of the requested frequency integrals at time t."""
    which = tuple(which)
    m = len(which)
    if t == 0 or model.g == 0:
        return np.zeros(m), np.zeros(m)
    omega_max = cfg.omega_max_factor * model.omega_c
    f = _integrand(model, bath, t, which)
    edges = _panel_edges(model, t, 0.0, omega_max)

    if model.s >= 1:
        res = quadrature.integrate(f, edges, cfg.rel_tol, cfg.abs_tol, cfg.max_subdivisions)
        return res.value, res.error

    # Origin singularity ~ w^(s-1): on the first panel substitute w = u^p with
    # p = 1/s, which turns the integrand into a bounded function of u.
    p = 1.0 / model.s
    head = edges[1]

    def f_head(u):
        w = u ** p
        return f(w) * (p * u ** (p - 1.0))

    u_edges = np.linspace(0.0, head ** (1.0 / p), 9)
    # Split the tolerance between the head and the body panels.
    r_head = quadrature.integrate(f_head, u_edges, 0.5 * cfg.rel_tol, 0.5 * cfg.abs_tol,
                                  cfg.max_subdivisions)
    r_body = quadrature.integrate(f, edges[1:], 0.5 * cfg.rel_tol, 0.5 * cfg.abs_tol,
                                  cfg.max_subdivisions)
    return r_head.value + r_body.value, r_head.error + r_body.error


def _check_time(t):
    if not t >= 0:
        raise ValueError(f"time must be non-negative, got {t!r}")


def compute_delta(model: SpectralModel, bath: ThermalBath, t: float,
                  cfg: QuadratureConfig = DEFAULT_QUADRATURE) -> float:
    """Diffusion coefficient Delta(t) in second-order perturbation theory."""
    _check_time(t)
    return float(_frequency_integrals(model, bath, t, ("delta",), cfg)[0][0])


def compute_gamma(model: SpectralModel, t: float,
                  cfg: QuadratureConfig = DEFAULT_QUADRATURE) -> float:
    """Dissipation coefficient gamma(t). Temperature independent."""
    _check_time(t)
    return float(_frequency_integrals(model, None, t, ("gamma",), cfg)[0][0])


def compute_heating(model: SpectralModel, bath: ThermalBath, t: float,
                    cfg: QuadratureConfig = DEFAULT_QUADRATURE) -> float:
    """Heating function N(t), the time integral of Delta over [0, t]."""
    _check_time(t)
    return float(_frequency_integrals(model, bath, t, ("heating",), cfg)[0][0])


def compute_big_gamma(model: SpectralModel, t: float,
                      cfg: QuadratureConfig = DEFAULT_QUADRATURE) -> float:
    """Damping exponent Gamma(t) = 2 * integral of gamma over [0, t]."""
    _check_time(t)
    return float(_frequency_integrals(model, None, t, ("big_gamma",), cfg)[0][0])


def compute_coefficients(model, bath, t, cfg=DEFAULT_QUADRATURE):
    """(Delta, gamma, N, Gamma) and their quadrature error estimates at one time."""
    _check_time(t)
    return _frequency_integrals(model, bath, t, _COMPONENTS, cfg)


@dataclass(frozen=True)
class CoefficientTrace:
    """Sampled coefficients on a time grid (times in units of 1/omega_0)."""

    times: np.ndarray
    delta: np.ndarray
    gamma: np.ndarray
    heating: np.ndarray
    big_gamma: np.ndarray
    mode: CoefficientMode
    model: SpectralModel
    bath: ThermalBath
    errors: Optional[np.ndarray] = field(default=None, repr=False)
    cfg: QuadratureConfig = DEFAULT_QUADRATURE

    @property
    def omega_c_times(self) -> np.ndarray:
        return self.model.omega_c * self.times

    @property
    def delta_markov(self) -> float:
        return markovian_delta(self.model, self.bath)

    @property
    def gamma_markov(self) -> float:
        return markovian_gamma(self.model)

    def __len__(self):
        return self.times.size


def _check_grid(times):
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or times.size == 0:
        raise ValueError("time grid must be a non-empty 1-D array")
    if times[0] != 0:
        raise ValueError("time grid must start at t = 0")
    if np.any(np.diff(times) <= 0):
        raise ValueError("time grid must be strictly increasing")
    return times


def _coefficients_at(args):
    model, bath, t, cfg = args
    return _frequency_integrals(model, bath, t, _COMPONENTS, cfg)


def trace(model: SpectralModel, bath: ThermalBath, time_grid: Sequence[float],
          mode: CoefficientMode = CoefficientMode.NON_MARKOVIAN,
          cfg: QuadratureConfig = DEFAULT_QUADRATURE,
          workers: Optional[int] = None) -> CoefficientTrace:
    """Coefficient trace on ``time_grid``.

    Every sample is an independent single quadrature (the cumulative integrals
    have closed-form time kernels), so samples can be computed in parallel and
    no integration error accumulates along the grid.
    """
    times = _check_grid(time_grid)
    mode = CoefficientMode(mode)
    if mode is CoefficientMode.MARKOVIAN:
        dm, gm = markovian_delta(model, bath), markovian_gamma(model)
        ones = np.ones_like(times)
        return CoefficientTrace(times, dm * ones, gm * ones, dm * times, 2.0 * gm * times,
                                mode, model, bath, np.zeros((times.size, 4)), cfg)

    results = parallel_map(_coefficients_at, [(model, bath, float(t), cfg) for t in times],
                           workers)
    values = np.array([r[0] for r in results])
    errors = np.array([r[1] for r in results])
    return CoefficientTrace(times, values[:, 0], values[:, 1], values[:, 2], values[:, 3],
                            mode, model, bath, errors, cfg)

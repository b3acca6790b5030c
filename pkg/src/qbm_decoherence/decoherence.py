"""Fringe-visibility decay of a Schrodinger cat state.

The cat (|alpha> + |-alpha>) / sqrt(norm) with real alpha loses its Wigner
interference fringe as

    F = exp[-2 alpha^2 (1 - exp(-Gamma) / (k N + 1))],

with k = 2 off resonance (r << 1, secular dynamics) and k = 4 on resonance
(r >> 1, counter-rotating terms kept).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from ._parallel import parallel_map
from .kernels import (DEFAULT_QUADRATURE, CoefficientMode, CoefficientTrace,
                      QuadratureConfig, trace)
from .spectral import SpectralModel, ThermalBath

OFF_RESONANT_MAX_R = 0.5
RESONANT_MIN_R = 2.0


class RegimeValidityError(ValueError):
    """The fringe formula's denominator k N + 1 is not positive."""


class Regime(enum.Enum):
    OFF_RESONANT = "off"
    RESONANT = "res"

    @property
    def heating_factor(self) -> int:
        return 2 if self is Regime.OFF_RESONANT else 4


@dataclass(frozen=True)
class CatState:
    alpha: float

    def __post_init__(self):
        if not self.alpha > 0:
            raise ValueError(f"alpha must be positive, got {self.alpha!r}")

    @property
    def normalization(self) -> float:
        """<psi|psi> of the unnormalized superposition, 2 (1 + exp(-2 alpha^2))."""
        return 2.0 * (1.0 + math.exp(-2.0 * self.alpha ** 2))


def fringe_visibility(cat: CatState, heating, damping, regime: Regime):
    """Closed-form fringe visibility for given N(t) and Gamma(t) values.

    Accepts scalars or arrays for ``heating`` and ``damping``.
    """
    regime = Regime(regime)
    n = np.asarray(heating, dtype=float)
    denom = regime.heating_factor * n + 1.0
    if np.any(denom <= 0):
        raise RegimeValidityError(
            f"{regime.heating_factor}N + 1 <= 0 (min N = {n.min():g}); the fringe formula "
            "does not apply")
    out = np.exp(-2.0 * cat.alpha ** 2 * (1.0 - np.exp(-np.asarray(damping, float)) / denom))
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class FringeTrace:
    times: np.ndarray
    visibility: np.ndarray
    regime: Regime
    mode: CoefficientMode
    model: SpectralModel
    bath: ThermalBath
    alpha: float
    coefficients: CoefficientTrace = field(repr=False)
    warnings: Tuple[str, ...] = ()

    @property
    def unitless_times(self) -> np.ndarray:
        """Gamma' t = 2 g^2 omega_0 t."""
        return 2.0 * self.model.g ** 2 * self.model.omega_0 * self.times

    def area(self, t_max: Optional[float] = None) -> float:
        """Trapezoidal area under F(Gamma' t), optionally up to Gamma' t = t_max."""
        x, y = self.unitless_times, self.visibility
        if t_max is not None:
            keep = x <= t_max
            x, y = x[keep], y[keep]
        return float(np.trapezoid(y, x))


def regime_warnings(model: SpectralModel, regime: Regime) -> Tuple[str, ...]:
    r = model.r
    if regime is Regime.OFF_RESONANT and r > OFF_RESONANT_MAX_R:
        return (f"off-resonant formula assumes r << 1 but r = {r:g}",)
    if regime is Regime.RESONANT and r < RESONANT_MIN_R:
        return (f"resonant formula assumes r >> 1 but r = {r:g}",)
    return ()


def fringe_trace(cat: CatState, model: SpectralModel, bath: ThermalBath,
                 time_grid: Sequence[float], regime: Regime,
                 mode: CoefficientMode = CoefficientMode.NON_MARKOVIAN,
                 cfg: QuadratureConfig = DEFAULT_QUADRATURE,
                 workers: Optional[int] = None) -> FringeTrace:
    regime = Regime(regime)
    coeffs = trace(model, bath, time_grid, mode, cfg, workers=workers)
    vis = fringe_visibility(cat, coeffs.heating, coeffs.big_gamma, regime)
    return FringeTrace(coeffs.times, np.asarray(vis), regime, CoefficientMode(mode), model,
                       bath, cat.alpha, coeffs, regime_warnings(model, regime))


def decoherence_window(traces: Sequence[FringeTrace], contrast: float = math.exp(-1)) -> float:
    """Gamma' t at which the slowest trace has lost a fraction 1 - contrast of
    its fringe contrast, i.e. F - F_inf <= contrast * (1 - F_inf) with
    F_inf = exp(-2 alpha^2).  Falls back to the grid end if never reached."""
    ends = []
    for tr in traces:
        floor = math.exp(-2.0 * tr.alpha ** 2)
        hit = np.nonzero(tr.visibility - floor <= contrast * (1.0 - floor))[0]
        x = tr.unitless_times
        ends.append(x[hit[0]] if hit.size else x[-1])
    return float(max(ends))


@dataclass(frozen=True)
class ReservoirComparison:
    traces: List[FringeTrace]
    areas: List[float]
    ranking: List[str]
    window: float

    def area_of(self, label: str) -> float:
        return self.areas[[t.model.label for t in self.traces].index(label)]


def _fringe_job(args):
    return fringe_trace(*args)


def compare_reservoirs(cat: CatState, models: Sequence[SpectralModel], bath: ThermalBath,
                       time_grid: Sequence[float], regime: Regime,
                       cfg: QuadratureConfig = DEFAULT_QUADRATURE,
                       mode: CoefficientMode = CoefficientMode.NON_MARKOVIAN,
                       window: Optional[float] = None,
                       workers: Optional[int] = None) -> ReservoirComparison:
    """Rank reservoirs by the area under F over the decoherence window.

    Larger area means slower decoherence; the ranking lists the slowest
    first.  ``window`` (in Gamma' t) defaults to :func:`decoherence_window`.
    """
    models = list(models)
    if not models:
        raise ValueError("need at least one model")
    ref = models[0]
    for m in models[1:]:
        if (m.g, m.omega_c, m.omega_0) != (ref.g, ref.omega_c, ref.omega_0):
            raise ValueError("compared reservoirs must share g and r")
    traces = parallel_map(_fringe_job,
                          [(cat, m, bath, time_grid, regime, mode, cfg) for m in models],
                          workers)
    if window is None:
        window = decoherence_window(traces)
    areas = [tr.area(window) for tr in traces]
    order = sorted(range(len(models)), key=lambda k: -areas[k])
    return ReservoirComparison(traces, areas, [traces[k].model.label for k in order], window)

"""Quantum Zeno / anti-Zeno crossover under repeated nonselective energy measurements.

With measurements every tau the survival probability decays at the
effective rate gamma_Z(tau) = N(tau) / tau, while without measurements the
rate is the Markovian diffusion coefficient.  Their ratio below one signals
the Zeno effect (QZE), above one the anti-Zeno effect (AZE).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from ._parallel import parallel_map
from .kernels import (DEFAULT_QUADRATURE, CoefficientMode, QuadratureConfig,
                      compute_heating)
from .spectral import ReservoirKind, SpectralModel, ThermalBath, markovian_delta

BOUNDARY_TOL = 1e-3
ROOT_TOL = 1e-4
N_SCAN = 400
# Deviations |ratio - 1| at or below this count as exactly on the crossover.
_EXACT_ONE = 1e-12


class DegenerateModelError(ValueError):
    """The measurement-free rate vanishes, so the ratio is undefined."""


class RootRefinementError(RuntimeError):
    pass


class ZenoClass(enum.Enum):
    QZE = "QZE"
    AZE = "AZE"
    BOUNDARY = "boundary"
    MISSING = "missing"


def classify(ratio: float, boundary_tol: float = BOUNDARY_TOL) -> ZenoClass:
    if not np.isfinite(ratio):
        return ZenoClass.MISSING
    if abs(ratio - 1.0) <= boundary_tol:
        return ZenoClass.BOUNDARY
    return ZenoClass.QZE if ratio < 1.0 else ZenoClass.AZE


def effective_decay_rate(model: SpectralModel, bath: ThermalBath, tau: float,
                         cfg: QuadratureConfig = DEFAULT_QUADRATURE,
                         mode: CoefficientMode = CoefficientMode.NON_MARKOVIAN) -> float:
    """Measurement-modified decay rate N(tau) / tau."""
    if not tau > 0:
        raise ValueError(f"tau must be positive, got {tau!r}")
    if CoefficientMode(mode) is CoefficientMode.MARKOVIAN:
        return markovian_delta(model, bath)
    return compute_heating(model, bath, tau, cfg) / tau


def zeno_ratio(model: SpectralModel, bath: ThermalBath, tau: float,
               cfg: QuadratureConfig = DEFAULT_QUADRATURE,
               mode: CoefficientMode = CoefficientMode.NON_MARKOVIAN) -> float:
    """gamma_Z(tau) / gamma_0 with gamma_0 the Markovian diffusion coefficient."""
    d_m = markovian_delta(model, bath)
    if d_m == 0:
        raise DegenerateModelError("Markovian diffusion coefficient is zero")
    if CoefficientMode(mode) is CoefficientMode.MARKOVIAN:
        return 1.0
    return effective_decay_rate(model, bath, tau, cfg) / d_m


def _bisect_log(func, lo, hi, f_lo, root_tol, max_iter=200):
    """Bisection in log(tau) until |func| < root_tol (func = ratio - 1)."""
    a, b, fa = math.log(lo), math.log(hi), f_lo
    for _ in range(max_iter):
        m = 0.5 * (a + b)
        fm = func(math.exp(m))
        if abs(fm) < root_tol:
            return math.exp(m)
        if (fm < 0) == (fa < 0):
            a, fa = m, fm
        else:
            b = m
        if b - a < 1e-14:
            break
    raise RootRefinementError(
        f"bisection stalled in [{math.exp(a):g}, {math.exp(b):g}] with |ratio - 1| = {abs(fm):g}")


def _sign_change_brackets(values):
    """Index pairs (i, j), i < j, of consecutive nonzero samples with opposite
    signs, plus exact zeros reported as (i, i)."""
    out = []
    last = None
    for k, v in enumerate(values):
        if abs(v) <= _EXACT_ONE:
            continue
        if last is not None and (values[last] < 0) != (v < 0):
            if k - last > 1:
                out.append((last + 1, last + 1))  # zero sample(s) between
            else:
                out.append((last, k))
        last = k
    return out


def crossover_times(model: SpectralModel, bath: ThermalBath, tau_range: Tuple[float, float],
                    cfg: QuadratureConfig = DEFAULT_QUADRATURE,
                    mode: CoefficientMode = CoefficientMode.NON_MARKOVIAN,
                    n_scan: int = N_SCAN, root_tol: float = ROOT_TOL) -> List[float]:
    """Measurement intervals tau* (units 1/omega_0) where the ratio crosses one.

    The ratio is scanned on ``n_scan`` log-spaced points over ``tau_range``
    and every sign change of ratio - 1 is refined by bisection.  A ratio that
    is identically one produces no roots.
    """
    tau_min, tau_max = map(float, tau_range)
    if not 0 < tau_min < tau_max:
        raise ValueError("tau_range must satisfy 0 < tau_min < tau_max")
    if CoefficientMode(mode) is CoefficientMode.MARKOVIAN:
        return []

    def dev(tau):
        return zeno_ratio(model, bath, tau, cfg) - 1.0

    taus = np.geomspace(tau_min, tau_max, n_scan)
    values = np.array([dev(t) for t in taus])
    roots = []
    for i, j in _sign_change_brackets(values):
        if i == j:
            roots.append(float(taus[i]))
        else:
            roots.append(_bisect_log(dev, taus[i], taus[j], values[i], root_tol))
    return roots


@dataclass(frozen=True)
class ZenoMap:
    """Ratio gamma_Z / gamma_0 on an (r, omega_c tau) grid.

    ``ratio[i, j]`` belongs to ``r_grid[i]`` and ``tau_grid[j]``; tau values
    (and roots) are in units of the cutoff, omega_c tau.
    """

    r_grid: np.ndarray
    tau_grid: np.ndarray
    ratio: np.ndarray
    roots: List[np.ndarray]
    kind: ReservoirKind
    s: float
    g: float
    bath: ThermalBath
    mode: CoefficientMode = CoefficientMode.NON_MARKOVIAN
    boundary_tol: float = BOUNDARY_TOL
    failures: List[str] = field(default_factory=list)

    @property
    def classification(self) -> np.ndarray:
        return np.vectorize(lambda v: classify(v, self.boundary_tol).value, otypes=[object])(
            self.ratio)

    @property
    def complete(self) -> bool:
        return not self.failures

    def column(self, r: float) -> int:
        """Index of the grid column closest to ``r``."""
        return int(np.argmin(np.abs(self.r_grid - r)))


def _map_column(args):
    model, bath, tau_grid, root_range, cfg, mode, n_scan, root_tol = args
    wc = model.omega_c
    ratios = np.full(tau_grid.size, np.nan)
    failures = []
    for j, wct in enumerate(tau_grid):
        try:
            ratios[j] = zeno_ratio(model, bath, wct / wc, cfg, mode)
        except Exception as exc:  # recorded per cell, never fatal for the map
            failures.append(f"r={model.r:g} omega_c_tau={wct:g}: {exc}")
    try:
        roots = crossover_times(model, bath, (root_range[0] / wc, root_range[1] / wc), cfg,
                                mode, n_scan, root_tol)
        roots = np.array(roots) * wc
    except Exception as exc:
        failures.append(f"r={model.r:g} roots: {exc}")
        roots = np.array([])
    return ratios, roots, failures


def crossover_map(model_kind, g: float, bath: ThermalBath, r_grid: Sequence[float],
                  tau_grid: Sequence[float], cfg: QuadratureConfig = DEFAULT_QUADRATURE,
                  mode: CoefficientMode = CoefficientMode.NON_MARKOVIAN,
                  s: Optional[float] = None,
                  root_range: Optional[Tuple[float, float]] = None,
                  n_scan: int = N_SCAN, root_tol: float = ROOT_TOL,
                  workers: Optional[int] = None) -> ZenoMap:
    """Fill the ratio map for one reservoir family, column by column in r.

    ``tau_grid`` and ``root_range`` are in omega_c tau units; the root search
    defaults to the extent of ``tau_grid``.  Columns are independent and are
    assembled in grid order, so the result does not depend on ``workers``.
    """
    if isinstance(model_kind, str):
        model_kind = ReservoirKind.parse(model_kind)
    if s is None:
        s = model_kind.s
    r_grid = np.asarray(r_grid, dtype=float)
    tau_grid = np.asarray(tau_grid, dtype=float)
    if r_grid.size == 0 or tau_grid.size == 0:
        raise ValueError("grids must be non-empty")
    if np.any(r_grid <= 0) or np.any(tau_grid <= 0):
        raise ValueError("grids must be positive")
    if root_range is None:
        root_range = (float(tau_grid.min()), float(tau_grid.max()))
        if root_range[0] == root_range[1]:
            root_range = (root_range[0] / 2.0, root_range[1] * 2.0)

    jobs = [(SpectralModel(s=s, g=g, omega_c=r, kind=model_kind), bath, tau_grid,
             root_range, cfg, CoefficientMode(mode), n_scan, root_tol) for r in r_grid]
    columns = parallel_map(_map_column, jobs, workers)
    ratio = np.vstack([c[0] for c in columns])
    roots = [c[1] for c in columns]
    failures = [f for c in columns for f in c[2]]
    return ZenoMap(r_grid, tau_grid, ratio, roots, model_kind, s, g, bath,
                   CoefficientMode(mode), failures=failures)

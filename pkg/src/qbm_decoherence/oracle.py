"""Brute-force validator: the high-temperature master equations in a truncated Fock basis.

Interaction picture throughout.  With A = (Delta + gamma)/2 and
B = (Delta - gamma)/2 the generator is

    L rho = A (2 a rho a+ - a+a rho - rho a+a) + B (2 a+ rho a - a a+ rho - rho a a+)
          [ + B e^{-2i w0 t} (2 a rho a - a^2 rho - rho a^2) + h.c.-partner ]

where the bracketed counter-rotating terms are dropped by the secular
equation.  Ladder operators act by index shifts, so one generator call is
O(dim^2).
"""

from __future__ import annotations

import enum
import functools
import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from scipy.integrate import cumulative_simpson, solve_ivp
from scipy.interpolate import CubicSpline
from scipy.linalg import expm
from scipy.special import gammaln

from .kernels import (DEFAULT_QUADRATURE, CoefficientMode, CoefficientTrace,
                      QuadratureConfig, trace)
from .spectral import SpectralModel, ThermalBath

HERMITIAN_TOL = 1e-10
TRACE_TOL = 1e-6
NEGATIVITY_TOL = 1e-6
TAIL_TOL = 1e-6
PREMISE_THRESHOLD = 0.9


class TruncationError(RuntimeError):
    """The Fock-space truncation no longer holds the state."""


class UndefinedVisibilityError(ValueError):
    pass


class Equation(enum.Enum):
    SECULAR = "secular"
    NON_SECULAR = "nonsecular"


# --- states -------------------------------------------------------------------

def cat_dimension(alpha: float) -> int:
    """Truncation for cat-state runs: ceil(4 alpha^2 + 10 max(1, alpha) + 20)."""
    return int(math.ceil(4 * alpha ** 2 + 10 * max(1.0, alpha) + 20))


def fock_dimension(n: int) -> int:
    """max(8 (n + 1), 24): the floor leaves room for heating over many cycles."""
    return max(8 * (n + 1), 24)


def coherent_ket(alpha: complex, dim: int) -> np.ndarray:
    k = np.arange(dim)
    # Amplitudes via logs so large dimensions do not overflow factorials.
    log_mag = -0.5 * abs(alpha) ** 2 + k * np.log(abs(alpha) if alpha != 0 else 1.0) \
        - 0.5 * gammaln(k + 1)
    amp = np.exp(log_mag) * np.exp(1j * k * np.angle(alpha)) if alpha != 0 else \
        (k == 0).astype(float)
    return amp.astype(complex)


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Truncated Fock-basis density matrix."""

    data: np.ndarray

    def __post_init__(self):
        d = np.asarray(self.data, dtype=complex)
        if d.ndim != 2 or d.shape[0] != d.shape[1]:
            raise ValueError("density matrix must be square")
        object.__setattr__(self, "data", d)

    @property
    def dim(self) -> int:
        return self.data.shape[0]

    @classmethod
    def from_ket(cls, ket) -> "DensityMatrix":
        ket = np.asarray(ket, dtype=complex)
        return cls(np.outer(ket, ket.conj()))

    @classmethod
    def fock(cls, n: int, dim: int) -> "DensityMatrix":
        if not 0 <= n < dim:
            raise ValueError("Fock index outside truncation")
        d = np.zeros((dim, dim), complex)
        d[n, n] = 1.0
        return cls(d)

    @classmethod
    def coherent(cls, alpha: complex, dim: int) -> "DensityMatrix":
        return cls.from_ket(coherent_ket(alpha, dim))

    @classmethod
    def cat(cls, alpha: float, dim: int) -> "DensityMatrix":
        ket = coherent_ket(alpha, dim) + coherent_ket(-alpha, dim)
        return cls.from_ket(ket / np.linalg.norm(ket))

    def trace(self) -> float:
        return float(np.trace(self.data).real)

    def populations(self) -> np.ndarray:
        return np.diag(self.data).real.copy()

    def check(self, eigenvalues: bool = True):
        """Validate Hermiticity, unit trace and (optionally) positivity."""
        d = self.data
        herm = np.max(np.abs(d - d.conj().T))
        if herm > HERMITIAN_TOL:
            raise ValueError(f"not Hermitian (deviation {herm:.3g})")
        drift = abs(np.trace(d) - 1.0)
        if drift > TRACE_TOL:
            raise TruncationError(f"trace drifted by {drift:.3g}")
        if eigenvalues:
            low = np.linalg.eigvalsh(0.5 * (d + d.conj().T)).min()
            if low < -NEGATIVITY_TOL:
                raise ValueError(f"negative eigenvalue {low:.3g}")


@dataclass(frozen=True)
class Trajectory:
    times: np.ndarray
    states: np.ndarray  # (n_times, dim, dim)

    def __getitem__(self, k) -> DensityMatrix:
        return DensityMatrix(self.states[k])

    def __len__(self):
        return self.times.size

    @property
    def final(self) -> DensityMatrix:
        return DensityMatrix(self.states[-1])


# --- coefficient sources ------------------------------------------------------

class ConstantCoefficients:
    def __init__(self, delta: float, gamma: float):
        self.delta = float(delta)
        self.gamma = float(gamma)

    def __call__(self, t):
        return self.delta, self.gamma

    def heating(self, t):
        return self.delta * t

    def rotating_heating(self, t, omega_0):
        """Integral of Delta exp(-2i w0 s) over [0, t]."""
        return self.delta * (1.0 - np.exp(-2j * omega_0 * t)) / (2j * omega_0)


class InterpolatedCoefficients:
    """Cubic-spline interpolation of Delta(t), gamma(t) samples."""

    def __init__(self, times, delta, gamma):
        self.t_max = float(times[-1])
        self._delta = CubicSpline(times, delta)
        self._gamma = CubicSpline(times, gamma)
        self._heating = self._delta.antiderivative()
        self._times = np.asarray(times, dtype=float)
        self._rotating = {}

    def __call__(self, t):
        if t > self.t_max * (1 + 1e-12):
            raise ValueError(f"t = {t:g} beyond the tabulated range {self.t_max:g}")
        return float(self._delta(t)), float(self._gamma(t))

    def heating(self, t):
        """Integral of the interpolated Delta from 0 to t."""
        return float(self._heating(t))

    def rotating_heating(self, t, omega_0):
        """Integral of Delta(s) exp(-2i w0 s) over [0, t], from a cumulative
        Simpson rule on a grid resolving both Delta and the phase."""
        if omega_0 not in self._rotating:
            t0 = self._times[0]
            n = max(self._times.size, int(math.ceil((self.t_max - t0) * omega_0 / 2e-3)) + 1)
            grid = np.linspace(t0, self.t_max, n)
            d = self._delta(grid)
            parts = [cumulative_simpson(d * f(2.0 * omega_0 * grid), x=grid, initial=0.0)
                     for f in (np.cos, np.sin)]
            self._rotating[omega_0] = (CubicSpline(grid, parts[0]), CubicSpline(grid, -parts[1]))
        re, im = self._rotating[omega_0]
        return complex(re(t), im(t))

    @classmethod
    def from_trace(cls, tr: CoefficientTrace) -> "InterpolatedCoefficients":
        return cls(tr.times, tr.delta, tr.gamma)

    @classmethod
    def from_model(cls, model: SpectralModel, bath: ThermalBath, t_max: float,
                   mode: CoefficientMode = CoefficientMode.NON_MARKOVIAN,
                   cfg: QuadratureConfig = DEFAULT_QUADRATURE, step: Optional[float] = None,
                   workers: Optional[int] = None) -> "InterpolatedCoefficients":
        """Tabulate on a uniform grid with step 1e-3 / omega_c (or ``step``)."""
        if step is None:
            step = 1e-3 / model.omega_c
        n = max(4, int(math.ceil(t_max / step)) + 1)
        grid = np.linspace(0.0, t_max, n)
        return cls.from_trace(trace(model, bath, grid, mode, cfg, workers=workers))


_INTEGRATORS = ("auto", "direct", "diffusion")


@dataclass(frozen=True)
class EvolutionSpec:
    equation: Equation
    coefficients: Callable[[float], Tuple[float, float]]
    t_span: Tuple[float, float]
    omega_0: Optional[float] = None
    rtol: float = 1e-8
    atol: float = 1e-10
    integrator: str = "auto"

    def __post_init__(self):
        object.__setattr__(self, "equation", Equation(self.equation))
        if self.integrator not in _INTEGRATORS:
            raise ValueError(f"integrator must be one of {_INTEGRATORS}")
        if self.equation is Equation.NON_SECULAR and self.omega_0 is None:
            raise ValueError("the nonsecular equation needs omega_0 for its e^{±2i w0 t} phases")


# --- generator ----------------------------------------------------------------

class _Ladder:
    """Index-shift actions of a, a+ on dim x dim matrices."""

    def __init__(self, dim):
        self.dim = dim
        self.sq = np.sqrt(np.arange(1, dim, dtype=float))
        self.n = np.arange(dim, dtype=float)             # a+ a
        self.m = np.append(np.arange(1, dim, dtype=float), 0.0)  # a a+ in the truncation

    def a_left(self, x):      # a @ x
        out = np.zeros_like(x)
        out[:-1] = self.sq[:, None] * x[1:]
        return out

    def ad_left(self, x):     # a+ @ x
        out = np.zeros_like(x)
        out[1:] = self.sq[:, None] * x[:-1]
        return out

    def a_right(self, x):     # x @ a
        out = np.zeros_like(x)
        out[:, 1:] = x[:, :-1] * self.sq[None, :]
        return out

    def ad_right(self, x):    # x @ a+
        out = np.zeros_like(x)
        out[:, :-1] = x[:, 1:] * self.sq[None, :]
        return out


def _counter_rotating(rho, ladder):
    """The two counter-rotating dissipators (2 a rho a - a^2 rho - rho a^2) and
    (2 a+ rho a+ - a+^2 rho - rho a+^2)."""
    a_rho = ladder.a_left(rho)
    down = 2.0 * ladder.a_right(a_rho) - ladder.a_left(a_rho) - ladder.a_right(ladder.a_right(rho))
    ad_rho = ladder.ad_left(rho)
    up = 2.0 * ladder.ad_right(ad_rho) - ladder.ad_left(ad_rho) \
        - ladder.ad_right(ladder.ad_right(rho))
    return down, up


def generator(rho: np.ndarray, delta: float, gamma: float, equation: Equation,
              phase: complex = 1.0, ladder: Optional[_Ladder] = None) -> np.ndarray:
    """Right-hand side of the master equation; ``phase`` = exp(-2i w0 t)."""
    L = ladder or _Ladder(rho.shape[0])
    A = 0.5 * (delta + gamma)
    B = 0.5 * (delta - gamma)
    n, m = L.n, L.m
    out = A * (2.0 * L.ad_right(L.a_left(rho)) - n[:, None] * rho - rho * n[None, :])
    out += B * (2.0 * L.a_right(L.ad_left(rho)) - m[:, None] * rho - rho * m[None, :])
    if equation is Equation.NON_SECULAR:
        down, up = _counter_rotating(rho, L)
        out += B * (phase * down + np.conj(phase) * up)
    return out


def _uses_diffusion_picture(spec: EvolutionSpec, t0: float, t1: float) -> bool:
    if spec.integrator != "auto":
        return spec.integrator == "diffusion"
    if not _has_integrals(spec):
        return False
    probe = np.linspace(t0, t1, 2001)
    return min(spec.coefficients(t)[0] for t in probe) < 0


def _has_integrals(spec: EvolutionSpec) -> bool:
    need = ["heating"] + (["rotating_heating"] if spec.equation is Equation.NON_SECULAR else [])
    return all(hasattr(spec.coefficients, name) for name in need)


def _direct(rho0, spec, t0, t1, sample_times, ladder):
    dim = ladder.dim
    eq = spec.equation
    w0 = spec.omega_0

    def rhs(t, y):
        rho = y.reshape(dim, dim)
        delta, gamma = spec.coefficients(t)
        phase = np.exp(-2j * w0 * t) if eq is Equation.NON_SECULAR else 1.0
        return generator(rho, delta, gamma, eq, phase, ladder).ravel()

    sol = solve_ivp(rhs, (t0, t1), rho0.ravel(), method="RK45", t_eval=sample_times,
                    rtol=spec.rtol, atol=spec.atol)
    if sol.status != 0:
        raise RuntimeError(f"integration failed: {sol.message}")
    return sol.y.T.reshape(-1, dim, dim)


def _diffusion_picture(rho0, spec, t0, t1, sample_times, ladder):
    """Evolution as rho(t) = exp(A(t)) sigma(t) with A the accumulated diffusion.

    Write L = Delta (L_D + K/2) + gamma (L_g - K/2), where L_D and L_g are the
    secular diffusion and damping parts and K = e^{-2i w0 t} K_down + h.c. the
    counter-rotating part (absent for the secular equation).  All
    diffusion-type terms commute with each other and [X, L_g] = 2 X for each
    of them, so with A(t) = N(t) L_D + (c(t) K_down + conj(c(t)) K_up) / 2,
    N = int Delta and c = int Delta e^{-2i w0 s},

        sigma' = gamma (L_g - 2 A - K / 2) sigma.

    exp(A) is a forward diffusion (A is the accumulated noise of the bath),
    and sigma only sees terms of order gamma, so both factors stay stable
    while Delta(t) is negative.  Direct integration in that case is backward
    diffusion and amplifies rounding noise in the high Fock levels.
    """
    dim = ladder.dim
    sec = Equation.SECULAR
    nonsec = spec.equation is Equation.NON_SECULAR
    src = spec.coefficients
    w0 = spec.omega_0
    n0 = src.heating(t0)
    c0 = src.rotating_heating(t0, w0) if nonsec else 0.0

    def accumulated(rho, t):
        out = (src.heating(t) - n0) * generator(rho, 1.0, 0.0, sec, ladder=ladder)
        if nonsec:
            c = src.rotating_heating(t, w0) - c0
            down, up = _counter_rotating(rho, ladder)
            out += 0.5 * (c * down + np.conj(c) * up)
        return out

    def rhs_sigma(t, y):
        rho = y.reshape(dim, dim)
        _, gamma = src(t)
        if gamma == 0:
            return np.zeros_like(y)
        out = generator(rho, 0.0, 1.0, sec, ladder=ladder) - 2.0 * accumulated(rho, t)
        if nonsec:
            phase = np.exp(-2j * w0 * t)
            down, up = _counter_rotating(rho, ladder)
            out -= 0.5 * (phase * down + np.conj(phase) * up)
        return (gamma * out).ravel()

    sol = solve_ivp(rhs_sigma, (t0, t1), rho0.ravel(), method="RK45", t_eval=sample_times,
                    rtol=spec.rtol, atol=spec.atol)
    if sol.status != 0:
        raise RuntimeError(f"integration failed: {sol.message}")
    states = sol.y.T.reshape(-1, dim, dim)
    for k, t in enumerate(sol.t):
        step = solve_ivp(lambda _, y, t=t: accumulated(y.reshape(dim, dim), t).ravel(),
                         (0.0, 1.0), states[k].ravel(), method="RK45",
                         rtol=spec.rtol, atol=spec.atol)
        if step.status != 0:
            raise RuntimeError(f"diffusion step failed: {step.message}")
        states[k] = step.y[:, -1].reshape(dim, dim)
    return states


def evolve(rho0: DensityMatrix, spec: EvolutionSpec,
           sample_times: Optional[Sequence[float]] = None,
           check_eigenvalues: bool = True) -> Trajectory:
    """Integrate the master equation with an embedded Runge-Kutta 4(5) pair.

    Returns the state at ``sample_times`` (default: the two ends of
    ``spec.t_span``).  Every sample is checked for Hermiticity, trace and
    positivity; population reaching the top Fock levels raises
    TruncationError.

    With ``integrator="auto"`` the evolution switches to the diffusion
    picture whenever Delta(t) turns negative inside the span.  That needs a
    coefficient source with ``heating(t)`` and, for the nonsecular equation,
    ``rotating_heating(t, omega_0)``.
    """
    rho0.check(eigenvalues=False)
    dim = rho0.dim
    t0, t1 = map(float, spec.t_span)
    if sample_times is None:
        sample_times = [t0, t1]
    sample_times = np.asarray(sample_times, dtype=float)
    if t1 == t0:
        states = np.repeat(rho0.data[None], sample_times.size, axis=0)
        return Trajectory(sample_times, states)

    ladder = _Ladder(dim)
    if _uses_diffusion_picture(spec, t0, t1):
        if not _has_integrals(spec):
            raise ValueError("the diffusion picture needs coefficients with heating(t) "
                             "(and rotating_heating(t, w0) for the nonsecular equation)")
        states = _diffusion_picture(rho0.data, spec, t0, t1, sample_times, ladder)
    else:
        states = _direct(rho0.data, spec, t0, t1, sample_times, ladder)
    for k, st in enumerate(states):
        # Hermitize away rounding before checks; the generator preserves it exactly.
        st = 0.5 * (st + st.conj().T)
        states[k] = st
        DensityMatrix(st).check(eigenvalues=check_eigenvalues)
        tail = st[-1, -1].real + st[-2, -2].real
        if tail > TAIL_TOL:
            raise TruncationError(
                f"population {tail:.3g} in the top Fock levels at t = {sample_times[k]:g}; "
                f"increase dim beyond {dim}")
    return Trajectory(sample_times, states)


# --- Wigner function ----------------------------------------------------------

@functools.lru_cache(maxsize=4096)
def _displacement(beta: complex, dim: int) -> np.ndarray:
    # Built in a padded space so the kept block is free of edge artefacts.
    big = 2 * dim + 20
    sq = np.sqrt(np.arange(1, big))
    a = np.diag(sq, 1).astype(complex)
    d = expm(beta * a.conj().T - np.conj(beta) * a)
    return d[:dim, :dim]


def wigner_at(rho, beta: complex) -> float:
    """W(beta) = (2/pi) sum_k (-1)^k <k| D(-beta) rho D(beta) |k>."""
    data = rho.data if isinstance(rho, DensityMatrix) else np.asarray(rho)
    dim = data.shape[0]
    beta = complex(beta)
    if abs(beta) ** 2 >= dim / 4:
        raise TruncationError(f"|beta|^2 = {abs(beta) ** 2:g} needs dim > {4 * abs(beta) ** 2:g}")
    d = _displacement(beta, dim)
    # D(-beta) = D(beta)^dagger
    diag = np.einsum("ki,ij,jk->k", d.conj().T, data, d)
    parity = 1.0 - 2.0 * (np.arange(dim) % 2)
    return float((2.0 / math.pi) * np.real(parity @ diag))


# --- cat-state fringe visibility -----------------------------------------------

@dataclass(frozen=True)
class CatTrajectory:
    """Evolution of a cat state together with one of its coherent components.

    The master equation is linear, so the Wigner peak terms and the
    interference term can be read off separately:
    rho_int = norm * rho_cat - rho_+ - P rho_+ P with P the parity operator.
    """

    alpha: float
    cat: Trajectory
    peak: Trajectory

    @property
    def times(self):
        return self.cat.times


def evolve_cat(alpha: float, spec: EvolutionSpec, sample_times: Sequence[float],
               dim: Optional[int] = None, check_eigenvalues: bool = True) -> CatTrajectory:
    dim = dim or cat_dimension(alpha)
    cat = evolve(DensityMatrix.cat(alpha, dim), spec, sample_times, check_eigenvalues)
    peak = evolve(DensityMatrix.coherent(alpha, dim), spec, sample_times, check_eigenvalues)
    return CatTrajectory(alpha, cat, peak)


def fringe_from_trajectory(traj: CatTrajectory, alpha: Optional[float] = None) -> np.ndarray:
    """F = (1/2) W_int(0) / sqrt(W_+(alpha) W_-(-alpha)) at every sample."""
    alpha = traj.alpha if alpha is None else alpha
    dim = traj.cat.states.shape[1]
    norm = 2.0 * (1.0 + math.exp(-2.0 * alpha ** 2))
    parity = np.diag(1.0 - 2.0 * (np.arange(dim) % 2))
    out = np.empty(len(traj.cat))
    for k in range(len(traj.cat)):
        plus = traj.peak.states[k]
        minus = parity @ plus @ parity
        interference = norm * traj.cat.states[k] - plus - minus
        w_plus = wigner_at(plus, alpha)
        w_minus = wigner_at(minus, -alpha)
        if w_plus <= 0 or w_minus <= 0:
            raise UndefinedVisibilityError(
                f"non-positive peak value at t = {traj.times[k]:g}")
        out[k] = 0.5 * wigner_at(interference, 0.0) / math.sqrt(w_plus * w_minus)
    return out


# --- repeated nonselective measurements -----------------------------------------

@dataclass(frozen=True)
class SurvivalResult:
    n: int
    tau: float
    num_measurements: int
    probability: float          # <n| rho |n> after the last measurement
    single_interval: float      # P_n(tau) for one interval starting from |n>
    record: np.ndarray          # <n| rho |n> at each measurement
    warnings: Tuple[str, ...] = ()

    @property
    def fitted_rate(self) -> float:
        """-ln(P) / (N tau), the effective decay rate of the survival probability."""
        return -math.log(self.probability) / (self.num_measurements * self.tau)

    @property
    def product(self) -> float:
        """P_n(tau)^N."""
        return self.single_interval ** self.num_measurements


def survival_probability(n: int, tau: float, num_measurements: int, spec: EvolutionSpec,
                         dim: Optional[int] = None) -> SurvivalResult:
    """Simulate N cycles of (evolve for tau; dephase in the Fock basis).

    Each interval restarts the coefficient clock at zero: a nonselective
    energy measurement resets the system-reservoir correlations, which is the
    premise behind P_n(tau)^N.  ``spec.t_span`` is ignored.
    """
    if not tau > 0:
        raise ValueError("tau must be positive")
    if num_measurements < 1:
        raise ValueError("need at least one measurement")
    dim = dim or fock_dimension(n)
    if not n < dim / 2:
        raise ValueError(f"Fock index {n} too close to the truncation {dim}")
    cycle = EvolutionSpec(spec.equation, spec.coefficients, (0.0, tau), spec.omega_0,
                          spec.rtol, spec.atol, spec.integrator)
    rho = DensityMatrix.fock(n, dim)
    record = []
    for _ in range(num_measurements):
        rho = evolve(rho, cycle, [0.0, tau]).final
        record.append(rho.data[n, n].real)
        rho = DensityMatrix(np.diag(np.diag(rho.data)))
    record = np.array(record)
    notes = ()
    if record[0] < PREMISE_THRESHOLD:
        notes = (f"P_n(tau) = {record[0]:.3g} < {PREMISE_THRESHOLD}: short-interval premise "
                 "P_n(tau) ~ 1 is violated",)
        warnings.warn(notes[0], RuntimeWarning, stacklevel=2)
    return SurvivalResult(n, tau, num_measurements, float(record[-1]), float(record[0]),
                          record, notes)

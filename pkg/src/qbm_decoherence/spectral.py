"""Ohmic-family spectral densities and thermally weighted spectral distributions.

Units: hbar = 1 and the system frequency omega_0 = 1, so every frequency is
measured in units of omega_0 and every time in units of 1/omega_0.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Union

import numpy as np

ArrayLike = Union[float, np.ndarray]

DEFAULT_KT = 100.0


class SingularPointError(ValueError):
    """Raised when the spectral distribution is evaluated exactly at an
    integrable singularity (omega = 0 with s < 1)."""


class ReservoirKind(enum.Enum):
    OHMIC = "ohmic"
    SUB_OHMIC = "subohmic"
    SUPER_OHMIC = "superohmic"
    CUSTOM = "custom"

    @property
    def s(self) -> float:
        try:
            return _KIND_EXPONENT[self]
        except KeyError:
            raise ValueError("custom reservoirs carry their own exponent") from None

    @classmethod
    def parse(cls, name: str) -> "ReservoirKind":
        key = name.strip().lower().replace("-", "").replace("_", "")
        for kind in cls:
            if kind.value == key:
                return kind
        raise ValueError(f"unknown reservoir kind {name!r}")


_KIND_EXPONENT = {
    ReservoirKind.OHMIC: 1.0,
    ReservoirKind.SUB_OHMIC: 0.5,
    ReservoirKind.SUPER_OHMIC: 3.0,
}

NAMED_KINDS = (ReservoirKind.OHMIC, ReservoirKind.SUB_OHMIC, ReservoirKind.SUPER_OHMIC)


class TemperatureMode(enum.Enum):
    EXACT = "exact"
    HIGH_T = "hight"


@dataclass(frozen=True)
class SpectralModel:
    """Spectral density J(w) = g^2 w_c^(1-s) w^s exp(-w/w_c).

    Parameters
    ----------
    s : float
        Ohmicity exponent (1 Ohmic, 1/2 sub-Ohmic, 3 super-Ohmic).
    g : float
        Dimensionless coupling constant.
    omega_c : float
        Cutoff frequency in units of omega_0.
    omega_0 : float
        System oscillator frequency. Kept explicit but fixed to 1 by convention.
    """

    s: float
    g: float
    omega_c: float
    omega_0: float = 1.0
    kind: ReservoirKind = field(default=ReservoirKind.CUSTOM, compare=False)

    def __post_init__(self):
        for name in ("s", "omega_c", "omega_0"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)!r}")
        # g = 0 is accepted as the decoupled (free evolution) limit.
        if not self.g >= 0:
            raise ValueError(f"g must be non-negative, got {self.g!r}")

    @classmethod
    def named(cls, kind: Union[ReservoirKind, str], g: float, r: float,
              omega_0: float = 1.0) -> "SpectralModel":
        """Build a named reservoir with cutoff omega_c = r * omega_0."""
        if isinstance(kind, str):
            kind = ReservoirKind.parse(kind)
        return cls(s=kind.s, g=g, omega_c=r * omega_0, omega_0=omega_0, kind=kind)

    @property
    def r(self) -> float:
        """Resonance parameter omega_c / omega_0."""
        return self.omega_c / self.omega_0

    @property
    def label(self) -> str:
        if self.kind is ReservoirKind.CUSTOM:
            return f"s={self.s:g}"
        return self.kind.value


@dataclass(frozen=True)
class ThermalBath:
    kT: float = DEFAULT_KT
    mode: TemperatureMode = TemperatureMode.HIGH_T

    def __post_init__(self):
        if not self.kT > 0:
            raise ValueError(f"kT must be positive, got {self.kT!r}")


def eval_j(model: SpectralModel, omega: ArrayLike) -> ArrayLike:
    """Spectral density J(omega); zero at the origin."""
    w = np.asarray(omega, dtype=float)
    if np.any(w < 0):
        raise ValueError("spectral density is defined for omega >= 0 only")
    out = (model.g ** 2 * model.omega_c ** (1.0 - model.s)
           * w ** model.s * np.exp(-w / model.omega_c))
    return out if np.ndim(omega) else float(out)


def thermal_weight(bath: ThermalBath, omega: ArrayLike) -> ArrayLike:
    """N(omega) + 1/2, or its high-temperature form kT/omega."""
    w = np.asarray(omega, dtype=float)
    if bath.mode is TemperatureMode.HIGH_T:
        return bath.kT / w
    # N + 1/2 = coth(x/2)/2, written via expm1 to stay accurate for small x.
    x = w / bath.kT
    return 1.0 / np.expm1(x) + 0.5


def eval_i(model: SpectralModel, bath: ThermalBath, omega: ArrayLike) -> ArrayLike:
    """Spectral distribution I(omega) = J(omega) [N(omega) + 1/2].

    At omega = 0 the analytic limit is returned where it is finite
    (g^2 kT for s = 1, zero for s > 1).  For s < 1 the distribution has an
    integrable omega^(s-1) singularity there and SingularPointError is raised.
    """
    w = np.asarray(omega, dtype=float)
    if np.any(w < 0):
        raise ValueError("spectral distribution is defined for omega >= 0 only")
    zero = w == 0
    if np.any(zero) and model.s < 1:
        raise SingularPointError(
            f"I(omega) ~ omega^{model.s - 1:g} is singular at omega = 0")
    safe = np.where(zero, 1.0, w)
    # J(w) / w times w [N(w) + 1/2]; the second factor stays finite as w -> 0.
    if bath.mode is TemperatureMode.HIGH_T:
        w_weight = bath.kT
    else:
        x = safe / bath.kT
        w_weight = bath.kT * x / np.expm1(x) + 0.5 * safe
    out = (model.g ** 2 * model.omega_c ** (1.0 - model.s) * safe ** (model.s - 1.0)
           * np.exp(-safe / model.omega_c) * w_weight)
    if np.any(zero):
        limit = model.g ** 2 * bath.kT if model.s == 1 else 0.0
        out = np.where(zero, limit, out)
    return out if np.ndim(omega) else float(out)


def markovian_delta(model: SpectralModel, bath: ThermalBath) -> float:
    """Long-time diffusion coefficient pi * I(omega_0)."""
    return math.pi * eval_i(model, bath, model.omega_0)


def markovian_gamma(model: SpectralModel) -> float:
    """Long-time dissipation coefficient (pi/2) * J(omega_0)."""
    return 0.5 * math.pi * eval_j(model, model.omega_0)


def high_t_moment(model: SpectralModel, bath: ThermalBath) -> float:
    """Closed form of the integral of I over [0, inf) for a high-T bath,
    g^2 kT omega_c Gamma(s)."""
    return model.g ** 2 * bath.kT * model.omega_c * math.gamma(model.s)

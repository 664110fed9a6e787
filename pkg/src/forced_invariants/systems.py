"""Forced linear systems and the oscillator parameterization.

The equations of motion are

    dx/dt = v
    dv/dt = a*x + b*v + f(t)

and the harmonic oscillator family maps onto them through
a = -omega**2, b = -lambda/m, f(t) = (A/m) sin(Omega t).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import ParameterError

EPS_CRIT = 1e-9
EPS_RES = 1e-9


def _zero_forcing(t):
    return np.zeros_like(np.asarray(t, dtype=float))


@dataclass(frozen=True)
class SinusoidalForcing:
    """f(t) = (amp/mass) * sin(freq * t). Accepts scalars or arrays."""

    amp: float
    mass: float
    freq: float

    def __call__(self, t):
        return (self.amp / self.mass) * np.sin(self.freq * np.asarray(t, dtype=float))


@dataclass(frozen=True)
class ForcedLinearSystem:
    a: float
    b: float
    forcing: Callable = _zero_forcing

    def __post_init__(self):
        for name in ("a", "b"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise ParameterError(f"{name} must be finite, got {value!r}", field=name)
        if not callable(self.forcing):
            raise ParameterError("forcing must be callable", field="forcing")

    def acceleration(self, x, v, t):
        return self.a * x + self.b * v + self.forcing(t)

    def homogeneous(self) -> "ForcedLinearSystem":
        return ForcedLinearSystem(self.a, self.b)

    @property
    def unforced(self) -> bool:
        f = self.forcing
        return f is _zero_forcing or (isinstance(f, SinusoidalForcing) and (f.amp == 0 or f.freq == 0))

    def same_as(self, other: "ForcedLinearSystem") -> bool:
        """Same coefficients and forcing, treating every zero forcing as equal."""
        if (self.a, self.b) != (other.a, other.b):
            return False
        return self.forcing == other.forcing or (self.unforced and other.unforced)


@dataclass(frozen=True)
class OscillatorParams:
    """Mass, natural frequency, damping, forcing amplitude and forcing frequency."""

    m: float = 1.0
    omega: float = 1.0
    lam: float = 0.0
    amp: float = 0.0
    cap_omega: float = 0.0

    def __post_init__(self):
        for name in ("m", "omega", "lam", "amp", "cap_omega"):
            value = getattr(self, name)
            if not isinstance(value, (int, float)) or not math.isfinite(value):
                raise ParameterError(f"{name} must be a finite real, got {value!r}", field=name)
        if self.m <= 0:
            raise ParameterError("m must be > 0", field="m")
        if self.omega <= 0:
            raise ParameterError("omega must be > 0", field="omega")
        if self.lam < 0:
            raise ParameterError("lambda must be >= 0", field="lambda")
        if self.cap_omega < 0:
            raise ParameterError("cap_omega must be >= 0", field="cap_omega")

    @property
    def gamma(self) -> float:
        """Half the damping rate, lambda / 2m."""
        return self.lam / (2.0 * self.m)

    def to_system(self) -> ForcedLinearSystem:
        forcing = SinusoidalForcing(self.amp, self.m, self.cap_omega)
        return ForcedLinearSystem(a=-self.omega**2, b=-self.lam / self.m, forcing=forcing)

    @classmethod
    def from_system(cls, system: ForcedLinearSystem) -> "OscillatorParams":
        """Inverse of :meth:`to_system`; needs the sinusoidal forcing to recover m and A."""
        f = system.forcing
        if not isinstance(f, SinusoidalForcing):
            raise ParameterError("forcing is not sinusoidal; mass cannot be recovered", field="forcing")
        if system.a >= 0:
            raise ParameterError("a must be negative for an oscillator", field="a")
        return cls(m=f.mass, omega=math.sqrt(-system.a), lam=-system.b * f.mass,
                   amp=f.amp, cap_omega=f.freq)

    def replace(self, **changes) -> "OscillatorParams":
        fields = dict(m=self.m, omega=self.omega, lam=self.lam, amp=self.amp,
                      cap_omega=self.cap_omega)
        fields.update(changes)
        return OscillatorParams(**fields)

    def in_resonance_band(self, eps_res: float = EPS_RES) -> bool:
        return abs(self.cap_omega - self.omega) <= eps_res * self.omega


class Regime(enum.Enum):
    OVERDAMPED = "overdamped"
    CRITICAL = "critical"
    UNDERDAMPED = "underdamped"


@dataclass(frozen=True)
class DampingRegime:
    regime: Regime
    discriminant: float  # omega**2 - (lambda/2m)**2


def classify_damping(p: OscillatorParams, eps_crit: float = EPS_CRIT) -> DampingRegime:
    """Classify by the sign of omega^2 - (lambda/2m)^2.

    The critical band is ``|disc| <= eps_crit * omega**2``.
    """
    if eps_crit < 0:
        raise ParameterError("eps_crit must be >= 0", field="eps_crit")
    w2 = p.omega**2
    disc = w2 - p.gamma**2
    if abs(disc) <= eps_crit * w2:
        regime = Regime.CRITICAL
    elif disc < 0:
        regime = Regime.OVERDAMPED
    else:
        regime = Regime.UNDERDAMPED
    return DampingRegime(regime, disc)

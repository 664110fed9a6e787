"""Closed-form particular solutions of the sinusoidally forced oscillator.

A particular solution alpha(t) of alpha'' = a alpha + b alpha' + f(t) is the
shift that turns an autonomous invariant into one of the forced system.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import ParameterError, ResonanceError
from .systems import EPS_RES, ForcedLinearSystem, OscillatorParams


class Provenance(enum.Enum):
    CLOSED_FORM_NONRESONANT = "closed_form_nonresonant"
    CLOSED_FORM_RESONANT = "closed_form_resonant"
    CLOSED_FORM_DAMPED = "closed_form_damped"
    NUMERIC = "numeric"
    ZERO = "zero"


@dataclass(frozen=True)
class ParticularSolution:
    """alpha, its derivative beta, and alpha''; all vectorized over t."""

    alpha: Callable
    beta: Callable
    alpha_ddot: Callable
    provenance: Provenance
    system: ForcedLinearSystem | None = field(default=None, compare=False)

    def residual(self, t, system: ForcedLinearSystem | None = None):
        """alpha'' - (a alpha + b beta + f) at the given times."""
        system = system or self.system
        if system is None:
            raise ParameterError("no system attached to the particular solution")
        t = np.asarray(t, dtype=float)
        return self.alpha_ddot(t) - system.acceleration(self.alpha(t), self.beta(t), t)


def _zeros(t):
    return np.zeros_like(np.asarray(t, dtype=float))


def zero_solution(system: ForcedLinearSystem | None = None) -> ParticularSolution:
    return ParticularSolution(_zeros, _zeros, _zeros, Provenance.ZERO, system)


def damped_denominator(p: OscillatorParams, cap_omega=None):
    """D = (lambda Omega / m)^2 + (omega^2 - Omega^2)^2; vectorized in Omega."""
    W = p.cap_omega if cap_omega is None else np.asarray(cap_omega, dtype=float)
    return (p.lam * W / p.m) ** 2 + (p.omega**2 - W**2) ** 2


def steady_amplitude(p: OscillatorParams, cap_omega=None):
    """max_t |alpha(t)| for the sinusoidal closed form, |A| / (m sqrt(D))."""
    return abs(p.amp) / (p.m * np.sqrt(damped_denominator(p, cap_omega)))


def _nonresonant(p: OscillatorParams):
    c = p.amp / (p.m * (p.cap_omega**2 - p.omega**2))
    W = p.cap_omega

    def alpha(t):
        return -c * np.sin(W * np.asarray(t, dtype=float))

    def beta(t):
        return -c * W * np.cos(W * np.asarray(t, dtype=float))

    def alpha_ddot(t):
        return c * W**2 * np.sin(W * np.asarray(t, dtype=float))

    return alpha, beta, alpha_ddot


def _resonant(p: OscillatorParams):
    # alpha = c1 sin(wt) - c2 t cos(wt), always with the natural frequency
    w = p.omega
    c1 = p.amp / (4.0 * p.m * w**2)
    c2 = p.amp / (2.0 * p.m * w)

    def alpha(t):
        t = np.asarray(t, dtype=float)
        return c1 * np.sin(w * t) - c2 * t * np.cos(w * t)

    def beta(t):
        t = np.asarray(t, dtype=float)
        return (c1 * w - c2) * np.cos(w * t) + c2 * w * t * np.sin(w * t)

    def alpha_ddot(t):
        t = np.asarray(t, dtype=float)
        return (-c1 * w**2 + 2.0 * c2 * w) * np.sin(w * t) + c2 * w**2 * t * np.cos(w * t)

    return alpha, beta, alpha_ddot


def _damped(p: OscillatorParams):
    W = p.cap_omega
    k = p.amp / p.m / damped_denominator(p)
    u = p.omega**2 - W**2
    r = p.lam * W / p.m

    def alpha(t):
        t = np.asarray(t, dtype=float)
        return k * (u * np.sin(W * t) - r * np.cos(W * t))

    def beta(t):
        return beta_closed_form(t, p)

    def alpha_ddot(t):
        t = np.asarray(t, dtype=float)
        return -W**2 * k * (u * np.sin(W * t) - r * np.cos(W * t))

    return alpha, beta, alpha_ddot


def beta_closed_form(t, p: OscillatorParams):
    """Velocity shift beta(t) = alpha'(t) for the damped sinusoidal solution.

    For lambda = 0 this is the same expression with the damping terms removed,
    i.e. the derivative of the non-resonant alpha.
    """
    t = np.asarray(t, dtype=float)
    if p.amp == 0:
        return np.zeros_like(t)
    W = p.cap_omega
    D = damped_denominator(p)
    if D == 0:
        raise ResonanceError("lambda = 0 and Omega = omega: use the resonant solution",
                             field="cap_omega")
    u = p.omega**2 - W**2
    r = p.lam * W / p.m
    return (p.amp * W / p.m) / D * (u * np.cos(W * t) + r * np.sin(W * t))


def particular_solution_sinusoidal(p: OscillatorParams, eps_res: float = EPS_RES,
                                   mode: str = "auto") -> ParticularSolution:
    """Closed-form particular solution for f(t) = (A/m) sin(Omega t).

    ``mode`` is ``"auto"``, ``"nonresonant"`` or ``"resonant"`` and only matters
    for lambda = 0. Requesting the non-resonant form inside the band
    ``|Omega - omega| <= eps_res * omega`` raises :class:`ResonanceError`.
    """
    if mode not in ("auto", "nonresonant", "resonant"):
        raise ParameterError(f"unknown mode {mode!r}", field="mode")
    system = p.to_system()
    if p.amp == 0:
        return zero_solution(system)
    if p.lam > 0:
        return ParticularSolution(*_damped(p), Provenance.CLOSED_FORM_DAMPED, system)

    resonant = p.in_resonance_band(eps_res)
    if mode == "nonresonant" and resonant:
        raise ResonanceError(
            f"Omega={p.cap_omega!r} is within the resonance band of omega={p.omega!r}; "
            "the non-resonant denominator is near-singular", field="cap_omega")
    if mode == "resonant" and not resonant:
        raise ParameterError("resonant form requested away from resonance", field="cap_omega")
    if resonant:
        return ParticularSolution(*_resonant(p), Provenance.CLOSED_FORM_RESONANT, system)
    return ParticularSolution(*_nonresonant(p), Provenance.CLOSED_FORM_NONRESONANT, system)

"""Closed-form invariants of the forced and damped oscillator, and the shift construction.

Every evaluator is an :class:`InvariantEvaluator`. Evaluators whose formula
contains a multivalued arctangent carry an ``angle_parts`` function returning
``(num, den)`` with angle = arctan(num / den); ``den == 0`` is the branch cut
(the locus x = alpha(t)). The angle policy decides how that angle is computed:

* ``PRINCIPAL``: stateless ``arctan(num/den)``; evaluating on the cut raises.
* ``UNWRAPPED``: the angle is tracked continuously along a sequence of samples,
  adding multiples of pi at each crossing of the cut.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass, replace
from typing import Callable

import numpy as np

from .errors import NearCriticalWarning, ParameterError, ResonanceError, SingularityError
from .particular import ParticularSolution, particular_solution_sinusoidal
from .systems import EPS_CRIT, EPS_RES, ForcedLinearSystem, OscillatorParams, Regime, classify_damping

# Sign of the critical-damping branch of G. The printed branch is +1/(lambda/2m + xi);
# only -1/(lambda/2m + xi) has dG/dt = -1 along the flow (see README).
CRITICAL_SIGN = -1.0

# 1/sqrt(omega^2 - (lambda/2m)^2) above this triggers NearCriticalWarning.
NEAR_CRITICAL_PREFACTOR = 1e6


class AnglePolicy(enum.Enum):
    PRINCIPAL = "principal"
    UNWRAPPED = "unwrapped"


class InvariantKind(enum.Enum):
    UNDAMPED_NONRESONANT = "undamped-nonresonant"
    UNDAMPED_RESONANT = "undamped-resonant"
    DAMPED_EXACT = "damped-exact"
    WEAK_DISSIPATION = "weak-dissipation"
    COMPOSED = "composed"
    AUTONOMOUS_ONLY = "autonomous"


def fold_angle(num, den):
    """arctan(num/den) in (-pi/2, pi/2], finite on den == 0 (gives +-pi/2)."""
    a = np.arctan2(num, den)
    a = np.where(a > np.pi / 2, a - np.pi, a)
    return np.where(a <= -np.pi / 2, a + np.pi, a)


class AngleTracker:
    """Winding state for a continuous arctan along a time-ordered sequence."""

    def __init__(self):
        self.value = None

    def update(self, num: float, den: float) -> float:
        raw = float(fold_angle(num, den))
        if self.value is not None:
            raw += math.pi * round((self.value - raw) / math.pi)
        self.value = raw
        return raw


@dataclass(frozen=True)
class InvariantEvaluator:
    """A function K(x, v, t) that is constant along solutions of ``system``.

    ``value(x, v, t, angle)`` computes K from the (already resolved) angle; it
    ignores ``angle`` when ``angle_parts`` is None. ``scale``, when given, is a
    magnitude of the largest individual term of K, used by drift reports.
    ``pole_gap(x, v, t)`` is a dimensionless distance to poles of K, where defined.
    """

    value: Callable
    kind: InvariantKind
    angle_policy: AnglePolicy = AnglePolicy.PRINCIPAL
    normalization: str = ""
    angle_parts: Callable | None = None
    system: ForcedLinearSystem | None = None
    scale: Callable | None = None
    shift: ParticularSolution | None = None
    pole_gap: Callable | None = None  # small near non-removable poles (eigen-directions)

    def with_policy(self, policy: AnglePolicy) -> "InvariantEvaluator":
        return replace(self, angle_policy=AnglePolicy(policy))

    @property
    def multivalued(self) -> bool:
        return self.angle_parts is not None

    def branch_cut(self, x, v, t):
        """Signed distance-like quantity whose sign changes mark branch-cut crossings."""
        if self.angle_parts is None:
            return None
        return self.angle_parts(x, v, t)[1]

    def angle(self, x, v, t):
        """Pointwise angle under the evaluator's policy (no winding history)."""
        num, den = self.angle_parts(x, v, t)
        if self.angle_policy is AnglePolicy.PRINCIPAL:
            den = np.asarray(den, dtype=float)
            if np.any(den == 0):
                raise SingularityError("principal-branch arctan evaluated on its cut (x = alpha(t))",
                                       branch="arctan", where=(x, v, t))
            return np.arctan(np.asarray(num, dtype=float) / den)
        return fold_angle(num, den)

    def __call__(self, x, v, t):
        angle = self.angle(x, v, t) if self.angle_parts is not None else None
        return self.value(x, v, t, angle)

    def along(self, x, v, t):
        """Evaluate along time-ordered samples, threading winding under UNWRAPPED."""
        x, v, t = (np.asarray(a, dtype=float) for a in (x, v, t))
        if self.angle_parts is None or self.angle_policy is AnglePolicy.PRINCIPAL:
            return np.asarray(self(x, v, t), dtype=float)
        num, den = self.angle_parts(x, v, t)
        angle = np.unwrap(fold_angle(num, den), period=np.pi)
        return np.asarray(self.value(x, v, t, angle), dtype=float)

    def tracker(self) -> Callable:
        """Stateful point-by-point evaluator; samples must arrive in time order."""
        if self.angle_parts is None or self.angle_policy is AnglePolicy.PRINCIPAL:
            return self
        track = AngleTracker()

        def evaluate(x, v, t):
            num, den = self.angle_parts(x, v, t)
            return float(self.value(x, v, t, track.update(num, den)))

        return evaluate


# --- G function -------------------------------------------------------------

def g_function(xi, p: OscillatorParams, eps_crit: float = EPS_CRIT,
               critical_sign: float = CRITICAL_SIGN):
    """G(xi) for the three damping regimes; xi is the ratio (v - beta)/(x - alpha).

    Underdamped: arctan((gamma + xi)/s)/s with s = sqrt(omega^2 - gamma^2).
    Critical: critical_sign / (gamma + xi).
    Overdamped: log|(gamma + xi - s)/(gamma + xi + s)| / (2 s), s = sqrt(gamma^2 - omega^2).
    gamma = lambda/2m. All three satisfy G'(xi) = 1/((xi + gamma)^2 + omega^2 - gamma^2)
    when critical_sign = -1.
    """
    xi = np.asarray(xi, dtype=float)
    g = p.gamma
    reg = classify_damping(p, eps_crit)
    if reg.regime is Regime.UNDERDAMPED:
        s = math.sqrt(reg.discriminant)
        return np.arctan((g + xi) / s) / s
    if reg.regime is Regime.CRITICAL:
        den = g + xi
        if np.any(den == 0):
            raise SingularityError("critical branch of G has a pole at xi = -lambda/2m",
                                   branch="critical", where=xi)
        return critical_sign / den
    s = math.sqrt(-reg.discriminant)
    lo, hi = g + xi - s, g + xi + s
    if np.any(lo == 0) or np.any(hi == 0):
        raise SingularityError("overdamped branch of G: log argument is zero or infinite",
                               branch="overdamped", where=xi)
    return np.log(np.abs(lo / hi)) / (2.0 * s)


# --- autonomous invariants ----------------------------------------------------

def energy_invariant(p: OscillatorParams) -> InvariantEvaluator:
    m, w2 = p.m, p.omega**2

    def value(x, v, t, angle):
        return 0.5 * m * v * v + 0.5 * m * w2 * x * x

    return InvariantEvaluator(value, InvariantKind.AUTONOMOUS_ONLY,
                              system=p.replace(amp=0.0).to_system())


def autonomous_damped_invariant(p: OscillatorParams, policy=AnglePolicy.PRINCIPAL,
                                eps_crit: float = EPS_CRIT,
                                critical_sign: float = CRITICAL_SIGN) -> InvariantEvaluator:
    """(m/2)[v^2 + (lambda/m) x v + omega^2 x^2] exp(-(lambda/m) G(v/x)).

    The over- and critically damped forms are evaluated with x multiplied
    through, so x = 0 is not singular there; only the eigen-directions are.
    """
    policy = AnglePolicy(policy)
    if p.lam == 0:
        return replace(energy_invariant(p), angle_policy=policy)

    m, lam, w2, g = p.m, p.lam, p.omega**2, p.gamma
    rate = lam / m
    system = p.replace(amp=0.0).to_system()
    reg = classify_damping(p, eps_crit)

    def quad(x, v):
        return v * v + rate * x * v + w2 * x * x

    if reg.regime is Regime.UNDERDAMPED:
        s = math.sqrt(reg.discriminant)
        if 1.0 / s > NEAR_CRITICAL_PREFACTOR:
            warnings.warn(f"near-critical damping: G prefactor 1/s = {1.0 / s:.3g}",
                          NearCriticalWarning, stacklevel=2)

        def value(x, v, t, angle):
            return 0.5 * m * quad(x, v) * np.exp(-rate * angle / s)

        def parts(x, v, t):
            return g * x + v, s * x

        return InvariantEvaluator(value, InvariantKind.AUTONOMOUS_ONLY, policy,
                                  "multiplicative constant free (additive constant in G)",
                                  angle_parts=parts, system=system)

    if reg.regime is Regime.CRITICAL:
        def value(x, v, t, angle):
            den = g * x + v
            if np.any(den == 0):
                raise SingularityError("critical invariant on the eigen-direction v = -gamma x",
                                       branch="critical", where=(x, v, t))
            return 0.5 * m * quad(x, v) * np.exp(-rate * critical_sign * x / den)

        def gap(x, v, t):
            return np.abs(g * x + v) / np.hypot(x, v)

        return InvariantEvaluator(value, InvariantKind.AUTONOMOUS_ONLY, policy,
                                  f"critical branch sign {critical_sign:+g}", system=system,
                                  pole_gap=gap)

    s = math.sqrt(-reg.discriminant)

    def value(x, v, t, angle):
        lo = g * x + v - s * x
        hi = g * x + v + s * x
        if np.any(lo == 0) or np.any(hi == 0):
            raise SingularityError("overdamped invariant on an eigen-direction",
                                   branch="overdamped", where=(x, v, t))
        # quad == lo * hi
        return 0.5 * m * lo * hi * np.abs(lo / hi) ** (-rate / (2.0 * s))

    def gap(x, v, t):
        return np.minimum(np.abs(g * x + v - s * x), np.abs(g * x + v + s * x)) / np.hypot(x, v)

    return InvariantEvaluator(value, InvariantKind.AUTONOMOUS_ONLY, policy,
                              "multiplicative constant free (additive constant in G)",
                              system=system, pole_gap=gap)


# --- the shift construction ----------------------------------------------------

def shift_invariant(k0: InvariantEvaluator, ps: ParticularSolution,
                    kind: InvariantKind = InvariantKind.COMPOSED,
                    normalization: str | None = None) -> InvariantEvaluator:
    """K(x, v, t) = k0(x - alpha(t), v - beta(t)).

    If k0 is an invariant of the unforced system and alpha solves the forced
    equation, K is an invariant of the forced system.
    """
    if k0.kind is not InvariantKind.AUTONOMOUS_ONLY:
        raise ParameterError("shift_invariant expects an autonomous invariant", field="k0")
    alpha, beta = ps.alpha, ps.beta

    def value(x, v, t, angle):
        return k0.value(x - alpha(t), v - beta(t), t, angle)

    parts = None
    if k0.angle_parts is not None:
        def parts(x, v, t):
            return k0.angle_parts(x - alpha(t), v - beta(t), t)

    gap = None
    if k0.pole_gap is not None:
        def gap(x, v, t):
            return k0.pole_gap(x - alpha(t), v - beta(t), t)

    note = k0.normalization if normalization is None else normalization
    return InvariantEvaluator(value, kind, k0.angle_policy, note, parts,
                              system=ps.system, shift=ps, pole_gap=gap)


# --- closed-form forced invariants --------------------------------------------------

def undamped_nonresonant_invariant(p: OscillatorParams, eps_res: float = EPS_RES) -> InvariantEvaluator:
    """Invariant of the undamped oscillator forced away from resonance."""
    if p.lam != 0:
        raise ParameterError("undamped invariant requires lambda = 0", field="lambda")
    if p.amp != 0 and p.in_resonance_band(eps_res):
        raise ResonanceError("Omega is inside the resonance band", field="cap_omega")
    m, w2, A, W = p.m, p.omega**2, p.amp, p.cap_omega
    den = W**2 - w2 if A != 0 else 1.0

    def value(x, v, t, angle):
        st = np.sin(W * t)
        return (0.5 * m * v * v + 0.5 * m * w2 * x * x
                + A / den * (W * v * np.cos(W * t) + w2 * x * st)
                - A * A / (2.0 * m * den) * st * st)

    note = "dropped additive constant A^2 Omega^2 / (2 m (Omega^2 - omega^2)^2)"
    return InvariantEvaluator(value, InvariantKind.UNDAMPED_NONRESONANT, normalization=note,
                              system=p.to_system())


def undamped_resonant_invariant(p: OscillatorParams, eps_res: float = EPS_RES,
                                as_printed: bool = False) -> InvariantEvaluator:
    """Invariant of the undamped oscillator forced at Omega = omega.

    K = m v^2/2 + m w^2 x^2/2 + (A/4w)[(v + 2 x w^2 t) cos wt - (x w + 2 v w t) sin wt]
        + (A^2 t / 8 m w)(w t - sin 2wt)

    ``as_printed=True`` uses x w^2 t instead of 2 x w^2 t in the cosine term,
    which is not conserved; it exists to document that discrepancy.
    """
    if p.lam != 0:
        raise ParameterError("undamped invariant requires lambda = 0", field="lambda")
    if p.amp != 0 and not p.in_resonance_band(eps_res):
        raise ParameterError("resonant invariant requires Omega = omega", field="cap_omega")
    m, w, A = p.m, p.omega, p.amp
    cx = 1.0 if as_printed else 2.0

    def value(x, v, t, angle):
        c, s = np.cos(w * t), np.sin(w * t)
        return (0.5 * m * v * v + 0.5 * m * w * w * x * x
                + A / (4.0 * w) * ((v + cx * x * w * w * t) * c - (x * w + 2.0 * v * w * t) * s)
                + A * A * t / (8.0 * m * w) * (w * t - np.sin(2.0 * w * t)))

    def scale(x, v, t):
        return A * A * np.asarray(t, dtype=float) ** 2 / (8.0 * m)

    note = "dropped additive constant A^2 / (32 m omega^2)"
    return InvariantEvaluator(value, InvariantKind.UNDAMPED_RESONANT, normalization=note,
                              system=p.to_system(), scale=scale)


def damped_forced_invariant(p: OscillatorParams, policy=AnglePolicy.PRINCIPAL,
                            eps_crit: float = EPS_CRIT,
                            critical_sign: float = CRITICAL_SIGN) -> InvariantEvaluator:
    """Damped invariant shifted by the damped sinusoidal particular solution."""
    if p.lam <= 0:
        raise ParameterError("damped invariant requires lambda > 0", field="lambda")
    k0 = autonomous_damped_invariant(p, policy, eps_crit, critical_sign)
    return shift_invariant(k0, particular_solution_sinusoidal(p), InvariantKind.DAMPED_EXACT)


def weak_dissipation_invariant(p: OscillatorParams, policy=AnglePolicy.PRINCIPAL,
                               eps_res: float = EPS_RES) -> InvariantEvaluator:
    """First-order expansion of the damped invariant in lambda/2m omega.

    Only approximately conserved: the error is O(lambda^2) per branch arc.
    """
    if p.gamma >= p.omega:
        raise ParameterError("weak dissipation requires lambda/2m < omega", field="lambda")
    ps = particular_solution_sinusoidal(p, eps_res)
    alpha, beta = ps.alpha, ps.beta
    m, w, lam = p.m, p.omega, p.lam

    def value(x, v, t, angle):
        X, V = x - alpha(t), v - beta(t)
        q = V * V + w * w * X * X
        return 0.5 * m * q + 0.5 * lam * X * V - lam / (2.0 * w) * q * angle

    def parts(x, v, t):
        return v - beta(t), w * (x - alpha(t))

    return InvariantEvaluator(value, InvariantKind.WEAK_DISSIPATION, AnglePolicy(policy),
                              "first order in lambda; not an exact invariant", parts,
                              system=p.to_system(), shift=ps)


# --- scalar convenience wrappers -------------------------------------------------

def k_autonomous_damped(x, v, p: OscillatorParams, policy=AnglePolicy.PRINCIPAL):
    return autonomous_damped_invariant(p, policy)(x, v, 0.0)


def k_undamped_forced_nonresonant(x, v, t, p: OscillatorParams):
    return undamped_nonresonant_invariant(p)(x, v, t)


def k_undamped_forced_resonant(x, v, t, p: OscillatorParams):
    return undamped_resonant_invariant(p)(x, v, t)


def k_damped_forced(x, v, t, p: OscillatorParams, policy=AnglePolicy.PRINCIPAL):
    return damped_forced_invariant(p, policy)(x, v, t)


def k_weak_dissipation(x, v, t, p: OscillatorParams, policy=AnglePolicy.PRINCIPAL):
    return weak_dissipation_invariant(p, policy)(x, v, t)


def auto_invariant(p: OscillatorParams, policy=AnglePolicy.UNWRAPPED,
                   eps_res: float = EPS_RES, eps_crit: float = EPS_CRIT) -> InvariantEvaluator:
    """lambda > 0: damped; lambda = 0 in the band: resonant; otherwise non-resonant."""
    if p.lam > 0:
        return damped_forced_invariant(p, policy, eps_crit)
    if p.amp != 0 and p.in_resonance_band(eps_res):
        return undamped_resonant_invariant(p, eps_res)
    return undamped_nonresonant_invariant(p, eps_res)


def build_invariant(kind, p: OscillatorParams, policy=AnglePolicy.UNWRAPPED,
                    eps_res: float = EPS_RES, eps_crit: float = EPS_CRIT) -> InvariantEvaluator:
    """Construct an evaluator by kind name (``"auto"`` or an :class:`InvariantKind` value)."""
    return _build(kind, p, policy, eps_res, eps_crit).with_policy(policy)


def _build(kind, p, policy, eps_res, eps_crit):
    if kind in ("auto", None):
        return auto_invariant(p, policy, eps_res, eps_crit)
    kind = InvariantKind(kind)
    if kind is InvariantKind.UNDAMPED_NONRESONANT:
        return undamped_nonresonant_invariant(p, eps_res)
    if kind is InvariantKind.UNDAMPED_RESONANT:
        return undamped_resonant_invariant(p, eps_res)
    if kind is InvariantKind.DAMPED_EXACT:
        return damped_forced_invariant(p, policy, eps_crit)
    if kind is InvariantKind.WEAK_DISSIPATION:
        return weak_dissipation_invariant(p, policy, eps_res)
    if kind is InvariantKind.AUTONOMOUS_ONLY:
        return autonomous_damped_invariant(p, policy, eps_crit)
    if kind is InvariantKind.COMPOSED:
        k0 = autonomous_damped_invariant(p, policy, eps_crit)
        return shift_invariant(k0, particular_solution_sinusoidal(p, eps_res))
    raise ParameterError(f"unsupported invariant kind {kind!r}", field="invariant")

"""Trajectory integration and numerical particular solutions."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp
from scipy.interpolate import CubicHermiteSpline

from .errors import NumericalAbort, ParameterError
from .particular import ParticularSolution, Provenance, particular_solution_sinusoidal
from .systems import EPS_CRIT, ForcedLinearSystem, OscillatorParams, Regime, classify_damping

MAX_SAMPLES = 10**7


@dataclass(frozen=True)
class TimeGrid:
    """Uniform grid from t_start to t_end. The step is adjusted down so the grid ends exactly at t_end."""

    t_start: float
    t_end: float
    h: float
    max_samples: int = MAX_SAMPLES

    def __post_init__(self):
        if not (math.isfinite(self.t_start) and math.isfinite(self.t_end)):
            raise ParameterError("grid bounds must be finite", field="t_end")
        if self.t_end <= self.t_start:
            raise ParameterError("t_end must exceed t_start", field="t_end")
        if not (self.h > 0 and math.isfinite(self.h)):
            raise ParameterError("step h must be > 0", field="dt")
        if self.n_steps + 1 > self.max_samples:
            raise ParameterError(f"grid needs {self.n_steps + 1} samples, cap is {self.max_samples}",
                                 field="dt")

    @property
    def n_steps(self) -> int:
        span = self.t_end - self.t_start
        n = round(span / self.h)
        if n < 1 or abs(n * self.h - span) > 1e-9 * span:
            n = math.ceil(span / self.h)
        return max(n, 1)

    @property
    def step(self) -> float:
        return (self.t_end - self.t_start) / self.n_steps

    def times(self) -> np.ndarray:
        return np.linspace(self.t_start, self.t_end, self.n_steps + 1)


@dataclass(frozen=True)
class TrajectoryMeta:
    method: str
    h: float
    x0: float
    v0: float
    system: ForcedLinearSystem | None = None
    params: OscillatorParams | None = None


@dataclass(frozen=True)
class Trajectory:
    times: np.ndarray
    x: np.ndarray
    v: np.ndarray
    meta: TrajectoryMeta
    accel: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        if not (len(self.times) == len(self.x) == len(self.v)):
            raise ValueError("times and states must have equal length")
        if len(self.times) > 1 and np.any(np.diff(self.times) <= 0):
            raise ValueError("times must be strictly increasing")

    @property
    def states(self) -> np.ndarray:
        return np.column_stack([self.x, self.v])

    def __len__(self):
        return len(self.times)


def _forcing_on(system: ForcedLinearSystem, t: np.ndarray) -> np.ndarray:
    # non-finite values are reported by _abort_if_nonfinite
    with np.errstate(invalid="ignore", over="ignore"):
        try:
            f = np.asarray(system.forcing(t), dtype=float)
            if f.shape != t.shape:
                f = np.broadcast_to(f, t.shape).astype(float)
        except (TypeError, ValueError):
            f = np.array([float(system.forcing(float(s))) for s in t])
    return f


def _abort_if_nonfinite(times, *arrays):
    bad = np.zeros(len(times), dtype=bool)
    for arr in arrays:
        bad |= ~np.isfinite(arr)
    if bad.any():
        i = int(np.argmax(bad))
        raise NumericalAbort(f"non-finite state at t = {times[i]!r}", time=float(times[i]))


def _rk4(system: ForcedLinearSystem, x0: float, v0: float, times: np.ndarray):
    a, b = float(system.a), float(system.b)
    h = times[1] - times[0]
    f_node = _forcing_on(system, times)
    f_mid = _forcing_on(system, times[:-1] + 0.5 * h)
    _abort_if_nonfinite(times, f_node, np.append(f_mid, 0.0))
    n = len(times)
    xs = np.empty(n)
    vs = np.empty(n)
    x, v = float(x0), float(v0)
    xs[0], vs[0] = x, v
    hh = 0.5 * h
    for i in range(n - 1):
        fm = f_mid[i]
        k1x, k1v = v, a * x + b * v + f_node[i]
        x2, v2 = x + hh * k1x, v + hh * k1v
        k2x, k2v = v2, a * x2 + b * v2 + fm
        x3, v3 = x + hh * k2x, v + hh * k2v
        k3x, k3v = v3, a * x3 + b * v3 + fm
        x4, v4 = x + h * k3x, v + h * k3v
        k4x, k4v = v4, a * x4 + b * v4 + f_node[i + 1]
        x += h / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x)
        v += h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v)
        xs[i + 1], vs[i + 1] = x, v
    _abort_if_nonfinite(times, xs, vs)
    return xs, vs, a * xs + b * vs + f_node


def integrate(system: ForcedLinearSystem, x0: float, v0: float, grid: TimeGrid,
              method: str = "RK4", rtol: float = 1e-10, atol: float = 1e-12,
              params: OscillatorParams | None = None) -> Trajectory:
    """Sample the flow of the system on ``grid``.

    RK4 steps the fixed grid. RK45 integrates adaptively (scipy) and samples
    its fourth-order dense output on the grid.
    """
    times = grid.times()
    method = method.upper()
    if method == "RK4":
        xs, vs, acc = _rk4(system, x0, v0, times)
    elif method == "RK45":
        def rhs(t, y):
            return [y[1], system.a * y[0] + system.b * y[1] + float(system.forcing(t))]

        sol = solve_ivp(rhs, (times[0], times[-1]), [x0, v0], method="RK45",
                        t_eval=times, rtol=rtol, atol=atol)
        if not sol.success:
            raise NumericalAbort(f"RK45 failed: {sol.message}", time=float(sol.t[-1]) if sol.t.size else None)
        xs, vs = sol.y
        _abort_if_nonfinite(times, xs, vs)
        acc = system.acceleration(xs, vs, times)
    else:
        raise ParameterError(f"unknown method {method!r}", field="method")
    meta = TrajectoryMeta(method, grid.step, float(x0), float(v0), system, params)
    return Trajectory(times, xs, vs, meta, acc)


def integrate_oscillator(p: OscillatorParams, x0: float, v0: float, grid: TimeGrid,
                         method: str = "RK4", **kw) -> Trajectory:
    return integrate(p.to_system(), x0, v0, grid, method, params=p, **kw)


def homogeneous_flow(p: OscillatorParams, X0: float, V0: float, tau, eps_crit: float = EPS_CRIT):
    """Exact unforced solution after elapsed time ``tau`` from (X0, V0)."""
    tau = np.asarray(tau, dtype=float)
    g = p.gamma
    reg = classify_damping(p, eps_crit)
    decay = np.exp(-g * tau)
    if reg.regime is Regime.UNDERDAMPED:
        s = math.sqrt(reg.discriminant)
        c, sn = np.cos(s * tau), np.sin(s * tau)
        X = decay * (X0 * c + (V0 + g * X0) / s * sn)
        V = decay * (V0 * c - (g * V0 + p.omega**2 * X0) / s * sn)
    elif reg.regime is Regime.CRITICAL:
        B = V0 + g * X0
        X = decay * (X0 + B * tau)
        V = decay * (V0 - g * B * tau)
    else:
        s = math.sqrt(-reg.discriminant)
        rp, rm = -g + s, -g - s
        c1 = (V0 - rm * X0) / (2.0 * s)
        c2 = X0 - c1
        X = c1 * np.exp(rp * tau) + c2 * np.exp(rm * tau)
        V = rp * c1 * np.exp(rp * tau) + rm * c2 * np.exp(rm * tau)
    return X, V


def exact_flow(p: OscillatorParams, x0: float, v0: float, grid: TimeGrid) -> Trajectory:
    """Closed-form trajectory: sinusoidal particular solution plus homogeneous part."""
    times = grid.times()
    ps = particular_solution_sinusoidal(p)
    t0 = times[0]
    X, V = homogeneous_flow(p, x0 - float(ps.alpha(t0)), v0 - float(ps.beta(t0)), times - t0)
    xs, vs = ps.alpha(times) + X, ps.beta(times) + V
    meta = TrajectoryMeta("exact", grid.step, float(x0), float(v0), p.to_system(), p)
    return Trajectory(times, xs, vs, meta)


def particular_solution_numeric(system: ForcedLinearSystem, grid: TimeGrid) -> ParticularSolution:
    """Particular solution with zero initial data at ``grid.t_start``.

    alpha and beta are cubic Hermite interpolants of the RK4 samples (nodal
    derivatives beta and alpha'' respectively); alpha'' is the right-hand side.
    Queries outside the grid raise ValueError.
    """
    traj = integrate(system, 0.0, 0.0, grid, "RK4")
    t = traj.times
    alpha_spline = CubicHermiteSpline(t, traj.x, traj.v, extrapolate=False)
    beta_spline = CubicHermiteSpline(t, traj.v, traj.accel, extrapolate=False)
    lo, hi = t[0], t[-1]

    def _checked(spline, q):
        q = np.asarray(q, dtype=float)
        if np.any(q < lo) or np.any(q > hi):
            raise ValueError(f"numeric particular solution defined on [{lo}, {hi}] only")
        return spline(q)

    def alpha(q):
        return _checked(alpha_spline, q)

    def beta(q):
        return _checked(beta_spline, q)

    def alpha_ddot(q):
        q = np.asarray(q, dtype=float)
        return system.acceleration(alpha(q), beta(q), q)

    return ParticularSolution(alpha, beta, alpha_ddot, Provenance.NUMERIC, system)

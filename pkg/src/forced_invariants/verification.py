"""Numerical certification of invariance.

Three checks: drift of K along integrated trajectories, the finite-difference
residual of the transport equation v K_x + (a x + b v + f) K_v + K_t = 0, and
refinement studies estimating the order at which drift vanishes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .dynamics import TimeGrid, Trajectory, integrate
from .errors import MetadataMismatch, ParameterError, SingularityError
from .invariants import AnglePolicy, InvariantEvaluator
from .systems import ForcedLinearSystem

DRIFT_FLOOR = 1e-12
# Below this relative drift a refinement study cannot resolve the integrator order.
ROUNDOFF_FLOOR = 32 * np.finfo(float).eps


@dataclass(frozen=True)
class Arc:
    t_start: float
    t_end: float
    n: int
    k0: float
    scale: float
    max_abs_drift: float
    max_rel_drift: float
    max_normalized_drift: float

    def to_dict(self):
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


@dataclass(frozen=True)
class DriftReport:
    """K along a trajectory. ``rel_drift[i] = |K_i - k0_arc| / scale_arc``.

    scale = max(|k0|, max |K|, max term scale, floor) per arc. Under the
    principal branch, arcs are delimited by crossings of x = alpha(t); otherwise
    the whole trajectory is one arc.
    """

    times: np.ndarray = field(repr=False)
    k_values: np.ndarray = field(repr=False)
    rel_drift: np.ndarray = field(repr=False)
    k0: float
    max_abs_drift: float
    max_rel_drift: float
    max_normalized_drift: float
    scale: float
    policy: AnglePolicy
    arcs: tuple[Arc, ...]
    floor: float = DRIFT_FLOOR

    def to_dict(self):
        return {
            "max_abs_drift": self.max_abs_drift,
            "max_rel_drift": self.max_rel_drift,
            "order_estimate": None,
            "policy": self.policy.value,
            "arcs": [a.to_dict() for a in self.arcs],
            "k0": self.k0,
            "scale": self.scale,
            "max_normalized_drift": self.max_normalized_drift,
            "floor": self.floor,
        }


def _check_metadata(inv: InvariantEvaluator, traj: Trajectory):
    a, b = inv.system, traj.meta.system
    if a is None or b is None:
        return
    if not a.same_as(b):
        raise MetadataMismatch(f"trajectory system {b!r} differs from invariant system {a!r}")


def _evaluate(inv: InvariantEvaluator, x, v, t):
    try:
        return inv.along(x, v, t)
    except SingularityError as exc:
        for i in range(len(t)):
            try:
                inv(x[i], v[i], t[i])
            except SingularityError:
                raise SingularityError(f"{exc} at sample {i} (t = {t[i]!r})",
                                       branch=exc.branch, where=(x[i], v[i], t[i])) from exc
        raise


def _arc_segments(inv: InvariantEvaluator, x, v, t):
    if not inv.multivalued or inv.angle_policy is AnglePolicy.UNWRAPPED:
        return [np.arange(len(t))]
    sign = np.sign(inv.branch_cut(x, v, t))
    keep = np.flatnonzero(sign != 0)
    cuts = np.flatnonzero(sign[keep][1:] != sign[keep][:-1]) + 1
    return [seg for seg in np.split(keep, cuts) if seg.size]


def drift(inv: InvariantEvaluator, traj: Trajectory, floor: float = DRIFT_FLOOR,
          check_metadata: bool = True) -> DriftReport:
    """Drift of ``inv`` along ``traj``; winding is threaded in time order under UNWRAPPED."""
    if check_metadata:
        _check_metadata(inv, traj)
    x, v, t = traj.x, traj.v, traj.times
    k_all = np.full(len(t), np.nan)
    rel_all = np.full(len(t), np.nan)
    arcs = []
    for seg in _arc_segments(inv, x, v, t):
        xs, vs, ts = x[seg], v[seg], t[seg]
        k = _evaluate(inv, xs, vs, ts)
        k0 = float(k[0])
        dev = np.abs(k - k0)
        scale = max(abs(k0), float(np.max(np.abs(k))), floor)
        if inv.scale is not None:
            scale = max(scale, float(np.max(inv.scale(xs, vs, ts))))
        norm = float(np.max(np.abs(k / k0 - 1.0))) if k0 != 0 else math.nan
        k_all[seg] = k
        rel_all[seg] = dev / scale
        arcs.append(Arc(float(ts[0]), float(ts[-1]), int(seg.size), k0, scale,
                        float(dev.max()), float(dev.max() / scale), norm))
    if not arcs:
        raise SingularityError("trajectory lies entirely on the branch cut")
    return DriftReport(
        times=t, k_values=k_all, rel_drift=rel_all, k0=arcs[0].k0,
        max_abs_drift=max(a.max_abs_drift for a in arcs),
        max_rel_drift=max(a.max_rel_drift for a in arcs),
        max_normalized_drift=max(a.max_normalized_drift for a in arcs),
        scale=max(a.scale for a in arcs), policy=inv.angle_policy,
        arcs=tuple(arcs), floor=floor)


# --- transport-equation residual ---------------------------------------------------

def _steps(point, h):
    return tuple(h * max(1.0, abs(c)) for c in point)


def _check_off_singular(inv: InvariantEvaluator, point, h):
    if not inv.multivalued:
        return
    x, v, t = point
    hx, hv, ht = _steps(point, 2.0 * h)
    xs = np.array([x, x - hx, x + hx, x, x, x, x])
    vs = np.array([v, v, v, v - hv, v + hv, v, v])
    ts = np.array([t, t, t, t, t, t - ht, t + ht])
    sign = np.sign(inv.branch_cut(xs, vs, ts))
    if np.any(sign == 0) or np.any(sign != sign[0]):
        raise SingularityError(f"point {point!r} is within 2h of the branch cut",
                               branch="arctan", where=point)


def pde_residual(inv: InvariantEvaluator, system: ForcedLinearSystem, point, h: float) -> float:
    """v K_x + (a x + b v + f(t)) K_v + K_t by central differences.

    The step in each coordinate is h * max(1, |coordinate|).
    """
    x, v, t = (float(c) for c in point)
    _check_off_singular(inv, (x, v, t), h)
    hx, hv, ht = _steps((x, v, t), h)
    dkx = (inv(x + hx, v, t) - inv(x - hx, v, t)) / (2.0 * hx)
    dkv = (inv(x, v + hv, t) - inv(x, v - hv, t)) / (2.0 * hv)
    dkt = (inv(x, v, t + ht) - inv(x, v, t - ht)) / (2.0 * ht)
    accel = system.a * x + system.b * v + float(system.forcing(t))
    return float(v * dkx + accel * dkv + dkt)


def _check_geometric(hs: Sequence[float], name: str):
    hs = np.asarray(hs, dtype=float)
    if hs.size < 3:
        raise ParameterError(f"need at least 3 {name}", field=name)
    if np.any(hs <= 0):
        raise ParameterError(f"{name} must be positive", field=name)
    ratios = hs[1:] / hs[:-1]
    if not np.allclose(ratios, ratios[0], rtol=1e-9):
        raise ParameterError(f"{name} must form a geometric progression", field=name)
    return hs


def loglog_slope(hs, errors) -> float:
    """Least-squares slope of log(error) against log(h)."""
    errors = np.abs(np.asarray(errors, dtype=float))
    if np.any(errors == 0) or not np.all(np.isfinite(errors)):
        return math.nan
    return float(np.polyfit(np.log(hs), np.log(errors), 1)[0])


@dataclass(frozen=True)
class ResidualReport:
    points: np.ndarray      # (n, 3) rows of (x, v, t)
    h: np.ndarray
    residuals: np.ndarray   # (n, len(h))
    orders: np.ndarray      # per-point log-log slope, assuming a zero limit
    order_estimate: float   # median of orders
    seed: int | None = None

    def to_dict(self):
        return {
            "max_abs_drift": None,
            "max_rel_drift": None,
            "order_estimate": self.order_estimate,
            "policy": None,
            "arcs": None,
            "seed": self.seed,
            "h": self.h.tolist(),
            "points": self.points.tolist(),
            "residuals": self.residuals.tolist(),
            "orders": self.orders.tolist(),
        }


def residual_study(inv: InvariantEvaluator, system: ForcedLinearSystem, points,
                   hs: Sequence[float] = (1e-2, 5e-3, 2.5e-3), seed: int | None = None) -> ResidualReport:
    """Residuals at each point and step; the order assumes the exact residual is 0."""
    hs = _check_geometric(hs, "h")
    points = np.atleast_2d(np.asarray(points, dtype=float))
    res = np.array([[pde_residual(inv, system, p, h) for h in hs] for p in points])
    orders = np.array([loglog_slope(hs, r) for r in res])
    finite = orders[np.isfinite(orders)]
    est = float(np.median(finite)) if finite.size else math.nan
    return ResidualReport(points, hs, res, orders, est, seed)


def random_points(inv: InvariantEvaluator, n: int, seed: int = 0, box: float = 10.0,
                  t_range=(0.0, 10.0), h_max: float = 1e-2, margin: float = 0.05,
                  pole_margin: float = 0.25, max_tries: int = 100_000) -> np.ndarray:
    """``n`` seeded points with |x|, |v| <= box, clear of singular loci.

    A point is rejected when the branch cut is within 2 h_max of the stencil
    or within ``margin`` (relative) of the point, when ``inv.pole_gap`` is below
    ``pole_margin``, or when evaluation fails.
    """
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(max_tries):
        if len(out) == n:
            break
        x, v = rng.uniform(-box, box, 2)
        t = rng.uniform(*t_range)
        try:
            if inv.multivalued:
                num, den = inv.angle_parts(x, v, t)
                if abs(den) < margin * max(1.0, abs(num)):
                    continue
                _check_off_singular(inv, (x, v, t), h_max)
            if inv.pole_gap is not None and inv.pole_gap(x, v, t) < pole_margin:
                continue
            if not np.isfinite(inv(x, v, t)):
                continue
        except (SingularityError, FloatingPointError):
            continue
        out.append((x, v, t))
    if len(out) < n:
        raise SingularityError(f"could only find {len(out)} off-singular points")
    return np.array(out)


# --- refinement ------------------------------------------------------------------

@dataclass(frozen=True)
class RefinementRecord:
    steps: np.ndarray
    drifts: np.ndarray
    order_estimate: float
    conclusive: bool
    floor: float = ROUNDOFF_FLOOR

    def to_dict(self):
        return {
            "max_abs_drift": None,
            "max_rel_drift": self.drifts.tolist(),
            "order_estimate": self.order_estimate,
            "policy": None,
            "arcs": None,
            "steps": self.steps.tolist(),
            "conclusive": self.conclusive,
        }


def refinement_study(inv: InvariantEvaluator, system: ForcedLinearSystem, ic, t_end: float,
                     steps: Sequence[float], integrator: Callable | None = None,
                     t_start: float = 0.0, floor: float = ROUNDOFF_FLOOR) -> RefinementRecord:
    """max_rel_drift for each step size and the log-log slope against h.

    ``integrator(grid) -> Trajectory`` defaults to RK4 on ``system`` from ``ic``.
    The study is inconclusive (not failed) when drift at the smallest step is
    below ``floor``.
    """
    steps = _check_geometric(steps, "steps")
    x0, v0 = ic
    if integrator is None:
        def integrator(grid):
            return integrate(system, x0, v0, grid, "RK4")
    drifts = np.array([drift(inv, integrator(TimeGrid(t_start, t_end, h))).max_rel_drift
                       for h in steps])
    conclusive = bool(drifts[np.argmin(steps)] > floor)
    return RefinementRecord(steps, drifts, loglog_slope(steps, drifts), conclusive, floor)

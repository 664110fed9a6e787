import math

import numpy as np
import pytest

from forced_invariants import (ForcedLinearSystem, NumericalAbort, OscillatorParams, ParameterError,
                               Provenance, TimeGrid, Trajectory, exact_flow, integrate,
                               integrate_oscillator, particular_solution_numeric,
                               particular_solution_sinusoidal)
from forced_invariants.dynamics import TrajectoryMeta, homogeneous_flow

OSC = ForcedLinearSystem(-1.0, 0.0)


def sin2t(t):
    return np.sin(2.0 * t)


def test_grid_basics():
    g = TimeGrid(0.0, 1.0, 0.1)
    assert g.n_steps == 10
    t = g.times()
    assert t[0] == 0.0 and t[-1] == 1.0 and len(t) == 11
    # non-dividing step is shortened so the grid ends at t_end
    g = TimeGrid(0.0, 1.0, 0.3)
    assert g.n_steps == 4 and g.step == 0.25


@pytest.mark.parametrize("kwargs", [
    dict(t_start=1.0, t_end=1.0, h=0.1),
    dict(t_start=0.0, t_end=1.0, h=0.0),
    dict(t_start=0.0, t_end=1.0, h=1e-3, max_samples=100),
])
def test_grid_validation(kwargs):
    with pytest.raises(ParameterError):
        TimeGrid(**kwargs)


def test_trajectory_validation():
    meta = TrajectoryMeta("RK4", 0.1, 0.0, 0.0)
    with pytest.raises(ValueError):
        Trajectory(np.array([0.0, 0.0]), np.zeros(2), np.zeros(2), meta)
    with pytest.raises(ValueError):
        Trajectory(np.array([0.0, 1.0]), np.zeros(3), np.zeros(2), meta)


def test_unforced_oscillator_returns_after_one_period():
    tr = integrate(OSC, 1.0, 0.0, TimeGrid(0.0, 2 * math.pi, 1e-3))
    assert abs(tr.x[-1] - 1.0) <= 1e-10 and abs(tr.v[-1]) <= 1e-10
    np.testing.assert_allclose(tr.x, np.cos(tr.times), atol=1e-10)


def test_equilibrium_stays_at_rest():
    tr = integrate(OSC, 0.0, 0.0, TimeGrid(0.0, 10.0, 1e-2))
    assert np.all(tr.x == 0.0) and np.all(tr.v == 0.0)


def test_launch_on_particular_solution():
    tr = integrate(ForcedLinearSystem(-1.0, 0.0, sin2t), 0.0, -2.0 / 3.0, TimeGrid(0.0, 20.0, 1e-3))
    np.testing.assert_allclose(tr.x, -np.sin(2 * tr.times) / 3.0, atol=1e-9)


def test_rk4_order_on_unforced_oscillator():
    errs = []
    for h in (2e-2, 1e-2):
        tr = integrate(OSC, 1.0, 0.0, TimeGrid(0.0, 10.0, h))
        errs.append(math.hypot(tr.x[-1] - math.cos(10.0), tr.v[-1] + math.sin(10.0)))
    assert 16 * 0.75 <= errs[0] / errs[1] <= 16 * 1.25


def test_superposition_from_zero_data():
    def f1(t):
        return np.cos(0.7 * t)

    def f2(t):
        return 0.3 * t * np.exp(-0.1 * t)

    def f12(t):
        return f1(t) + f2(t)

    grid = TimeGrid(0.0, 20.0, 1e-3)
    a, b = -2.0, -0.3
    r1, r2, r12 = (integrate(ForcedLinearSystem(a, b, f), 0.0, 0.0, grid) for f in (f1, f2, f12))
    np.testing.assert_allclose(r12.x, r1.x + r2.x, atol=1e-9)
    np.testing.assert_allclose(r12.v, r1.v + r2.v, atol=1e-9)


def test_scalar_only_forcing_is_accepted():
    tr = integrate(ForcedLinearSystem(-1.0, 0.0, lambda t: math.sin(2 * t)), 0.0, -2.0 / 3.0,
                   TimeGrid(0.0, 5.0, 1e-3))
    np.testing.assert_allclose(tr.x, -np.sin(2 * tr.times) / 3.0, atol=1e-9)


def test_rk45_dense_output_on_grid():
    p = OscillatorParams(m=1.0, omega=1.0, lam=0.1, amp=1.0, cap_omega=2.0)
    grid = TimeGrid(0.0, 20.0, 1e-2)
    ref = exact_flow(p, 1.0, 0.0, grid)
    tr = integrate_oscillator(p, 1.0, 0.0, grid, "RK45")
    assert tr.meta.method == "RK45"
    np.testing.assert_allclose(tr.x, ref.x, atol=1e-8)


@pytest.mark.parametrize("lam", [0.0, 0.1, 2.0, 3.0])
def test_exact_flow_matches_rk4(lam):
    p = OscillatorParams(m=1.0, omega=1.0, lam=lam, amp=1.0, cap_omega=2.0)
    grid = TimeGrid(0.0, 10.0, 1e-3)
    ref = exact_flow(p, 1.0, 0.5, grid)
    tr = integrate_oscillator(p, 1.0, 0.5, grid)
    np.testing.assert_allclose(tr.x, ref.x, atol=1e-10)
    np.testing.assert_allclose(tr.v, ref.v, atol=1e-10)


def test_homogeneous_flow_regimes_at_zero_elapsed_time():
    for lam in (0.0, 0.5, 2.0, 5.0):
        X, V = homogeneous_flow(OscillatorParams(lam=lam), 0.3, -1.2, 0.0)
        assert (float(X), float(V)) == pytest.approx((0.3, -1.2), abs=1e-15)


def test_nonfinite_state_aborts_with_time():
    def blow_up(t):
        return np.where(np.asarray(t) > 1.0, np.inf, 0.0)

    with pytest.raises(NumericalAbort) as exc:
        integrate(ForcedLinearSystem(-1.0, 0.0, blow_up), 1.0, 0.0, TimeGrid(0.0, 2.0, 0.01))
    assert exc.value.time == pytest.approx(1.0, abs=0.011)


def test_unknown_method():
    with pytest.raises(ParameterError):
        integrate(OSC, 1.0, 0.0, TimeGrid(0.0, 1.0, 0.1), "euler")


# --- numeric particular solution ------------------------------------------------------

def test_numeric_zero_forcing():
    ps = particular_solution_numeric(OSC, TimeGrid(0.0, 5.0, 1e-2))
    t = np.linspace(0, 5, 33)
    assert ps.provenance is Provenance.NUMERIC
    for fn in (ps.alpha, ps.beta, ps.alpha_ddot):
        np.testing.assert_array_equal(fn(t), 0.0)


def test_numeric_self_residual_off_grid():
    system = ForcedLinearSystem(-1.0, 0.0, sin2t)
    ps = particular_solution_numeric(system, TimeGrid(0.0, 20.0, 1e-3))
    t = np.linspace(0.01, 19.99, 997) + 3.7e-4      # off the grid nodes
    dbeta = (ps.beta(t + 1e-4) - ps.beta(t - 1e-4)) / 2e-4
    assert np.max(np.abs(dbeta - ps.alpha_ddot(t))) <= 1e-8
    assert np.max(np.abs(ps.residual(t))) <= 1e-8


def test_numeric_minus_closed_form_is_homogeneous():
    p = OscillatorParams(m=1.0, omega=1.0, amp=1.0, cap_omega=2.0)
    ps = particular_solution_numeric(p.to_system(), TimeGrid(0.0, 20.0, 1e-3))
    closed = particular_solution_sinusoidal(p)
    t = np.linspace(0.0, 20.0, 801) + 1.3e-4
    t = t[t <= 20.0]
    d0, dv0 = -float(closed.alpha(0.0)), -float(closed.beta(0.0))
    expected = d0 * np.cos(t) + dv0 * np.sin(t)
    assert np.max(np.abs(ps.alpha(t) - closed.alpha(t) - expected)) <= 1e-8
    dd = ps.alpha_ddot(t) - closed.alpha_ddot(t)
    assert np.max(np.abs(dd + (ps.alpha(t) - closed.alpha(t)))) <= 1e-8


@pytest.mark.parametrize("lam, W", [(0.0, 1.0), (0.4, 1.3)])
def test_numeric_vs_closed_form_other_branches(lam, W):
    p = OscillatorParams(m=1.0, omega=1.0, lam=lam, amp=1.0, cap_omega=W)
    grid = TimeGrid(0.0, 15.0, 1e-3)
    ps = particular_solution_numeric(p.to_system(), grid)
    closed = particular_solution_sinusoidal(p)
    t = grid.times()[::37]
    X, V = homogeneous_flow(p, -float(closed.alpha(0.0)), -float(closed.beta(0.0)), t)
    np.testing.assert_allclose(ps.alpha(t) - closed.alpha(t), X, atol=1e-8)
    np.testing.assert_allclose(ps.beta(t) - closed.beta(t), V, atol=1e-8)


def test_numeric_rejects_queries_outside_grid():
    ps = particular_solution_numeric(OSC, TimeGrid(0.0, 1.0, 1e-2))
    with pytest.raises(ValueError):
        ps.alpha(1.5)

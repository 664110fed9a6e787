import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from forced_invariants import (OscillatorParams, ParameterError, Provenance, ResonanceError,
                               beta_closed_form, particular_solution_sinusoidal)
from forced_invariants.particular import _damped, _nonresonant
from forced_invariants.verification import loglog_slope

T100 = np.linspace(0.0, 100.0, 1000)

CASES = {
    "nonresonant": OscillatorParams(m=1.0, omega=1.0, amp=1.0, cap_omega=2.0),
    "resonant": OscillatorParams(m=1.0, omega=1.0, amp=1.0, cap_omega=1.0),
    "damped": OscillatorParams(m=1.0, omega=1.0, lam=0.1, amp=1.0, cap_omega=2.0),
    "damped-heavy": OscillatorParams(m=2.0, omega=0.5, lam=3.0, amp=-0.7, cap_omega=0.9),
    "resonant-m2": OscillatorParams(m=2.0, omega=1.7, amp=0.3, cap_omega=1.7),
}


def test_nonresonant_example():
    ps = particular_solution_sinusoidal(CASES["nonresonant"])
    assert ps.provenance is Provenance.CLOSED_FORM_NONRESONANT
    t = np.linspace(0, 10, 100)
    np.testing.assert_allclose(ps.alpha(t), -np.sin(2 * t) / 3, atol=1e-15)
    # alpha'' + alpha - sin 2t
    assert np.max(np.abs(ps.alpha_ddot(t) + ps.alpha(t) - np.sin(2 * t))) <= 1e-12


def test_resonant_example():
    ps = particular_solution_sinusoidal(CASES["resonant"])
    assert ps.provenance is Provenance.CLOSED_FORM_RESONANT
    t = np.linspace(0, 10, 100)
    np.testing.assert_allclose(ps.alpha(t), 0.25 * np.sin(t) - 0.5 * t * np.cos(t), atol=1e-15)
    assert np.max(np.abs(ps.alpha_ddot(t) + ps.alpha(t) - np.sin(t))) <= 1e-12


def test_damped_example():
    p = OscillatorParams(m=1.0, omega=1.0, lam=1.0, amp=1.0, cap_omega=1.0)
    ps = particular_solution_sinusoidal(p)
    assert ps.provenance is Provenance.CLOSED_FORM_DAMPED
    t = np.linspace(0, 10, 100)
    np.testing.assert_allclose(ps.alpha(t), -np.cos(t), atol=1e-15)
    np.testing.assert_allclose(ps.alpha_ddot(t) + ps.beta(t) + ps.alpha(t), np.sin(t), atol=1e-14)


@pytest.mark.parametrize("lam, W", [(0.0, 2.0), (0.0, 1.0), (0.3, 1.0), (1.0, 5.0)])
def test_zero_forcing_gives_zero_solution(lam, W):
    ps = particular_solution_sinusoidal(OscillatorParams(omega=1.3, lam=lam, amp=0.0, cap_omega=W))
    t = np.linspace(0, 10, 11)
    for fn in (ps.alpha, ps.beta, ps.alpha_ddot):
        np.testing.assert_array_equal(fn(t), 0.0)


def test_beta_examples():
    p = OscillatorParams(m=1.0, omega=1.0, lam=1.0, amp=1.0, cap_omega=1.0)
    assert abs(beta_closed_form(0.0, p)) <= 1e-15
    assert beta_closed_form(np.pi / 2, p) == pytest.approx(1.0, abs=1e-15)
    assert np.all(beta_closed_form(np.linspace(0, 3, 5), p.replace(amp=0.0)) == 0.0)


def test_beta_closed_form_matches_damped_solution():
    p = CASES["damped"]
    t = np.linspace(0, 20, 57)
    np.testing.assert_array_equal(beta_closed_form(t, p), particular_solution_sinusoidal(p).beta(t))


def test_beta_closed_form_undamped_is_alpha_derivative():
    p = CASES["nonresonant"]
    t = np.linspace(0, 20, 57)
    np.testing.assert_allclose(beta_closed_form(t, p), particular_solution_sinusoidal(p).beta(t),
                               rtol=1e-14, atol=1e-15)
    with pytest.raises(ResonanceError):
        beta_closed_form(t, CASES["resonant"])


@pytest.mark.parametrize("name", sorted(CASES))
def test_residual_of_forced_equation(name):
    p = CASES[name]
    ps = particular_solution_sinusoidal(p)
    f = p.to_system().forcing(T100)
    assert np.all(np.abs(ps.residual(T100)) <= 1e-10 * np.maximum(1.0, np.abs(f)))


@pytest.mark.parametrize("name", sorted(CASES))
def test_beta_is_derivative_of_alpha_second_order(name):
    ps = particular_solution_sinusoidal(CASES[name])
    t = np.linspace(0.5, 10, 40)
    hs = np.array([1e-2, 5e-3, 2.5e-3])
    errs = [np.max(np.abs(ps.beta(t) - (ps.alpha(t + h) - ps.alpha(t - h)) / (2 * h))) for h in hs]
    assert 1.8 <= loglog_slope(hs, errs) <= 2.2


def test_resonance_band_selection_and_rejection():
    p = OscillatorParams(omega=1.0, amp=1.0, cap_omega=1.0 + 1e-12)
    assert particular_solution_sinusoidal(p).provenance is Provenance.CLOSED_FORM_RESONANT
    with pytest.raises(ResonanceError):
        particular_solution_sinusoidal(p, mode="nonresonant")
    with pytest.raises(ParameterError):
        particular_solution_sinusoidal(CASES["nonresonant"], mode="resonant")
    # outside a wider band the non-resonant form is used
    assert (particular_solution_sinusoidal(p.replace(cap_omega=1.001)).provenance
            is Provenance.CLOSED_FORM_NONRESONANT)


def test_damped_has_no_resonance_singularity():
    p = OscillatorParams(omega=1.0, lam=0.05, amp=1.0, cap_omega=1.0)
    ps = particular_solution_sinusoidal(p, mode="nonresonant")
    assert ps.provenance is Provenance.CLOSED_FORM_DAMPED
    assert np.all(np.isfinite(ps.alpha(T100)))


def test_damped_formula_at_zero_damping_equals_undamped_formula():
    p = CASES["nonresonant"]
    t = np.linspace(0, 10, 200)
    np.testing.assert_allclose(_damped(p)[0](t), _nonresonant(p)[0](t), rtol=0, atol=1e-15)


def test_damped_alpha_tends_to_undamped_alpha():
    p = CASES["nonresonant"]
    t = np.linspace(0, 10, 1000)
    a16 = particular_solution_sinusoidal(p.replace(lam=1e-8)).alpha(t)
    a10 = particular_solution_sinusoidal(p).alpha(t)
    assert np.max(np.abs(a16 - a10)) <= 1e-6


@settings(max_examples=60, deadline=None)
@given(s=st.floats(-50, 50).filter(lambda s: abs(s) > 1e-3),
       name=st.sampled_from(sorted(CASES)))
def test_scale_covariance_in_amplitude(s, name):
    p = CASES[name]
    t = np.linspace(0, 30, 77)
    base = particular_solution_sinusoidal(p)
    scaled = particular_solution_sinusoidal(p.replace(amp=s * p.amp))
    for f0, f1 in ((base.alpha, scaled.alpha), (base.beta, scaled.beta)):
        ref = s * f0(t)
        assert np.all(np.abs(f1(t) - ref) <= 1e-12 * np.maximum(np.abs(ref).max(), 1e-300))

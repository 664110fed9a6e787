"""Time-dependent constants of motion for forced one-dimensional linear systems.

An invariant K0(x, v) of dx/dt = v, dv/dt = a x + b v is turned into an
invariant of the forced system dv/dt = a x + b v + f(t) by shifting with any
particular solution alpha(t): K(x, v, t) = K0(x - alpha, v - alpha').
"""

__version__ = "0.1.0"

from .errors import (MetadataMismatch, NearCriticalWarning, NumericalAbort, ParameterError,
                     ResonanceError, SingularityError)
from .systems import (DampingRegime, ForcedLinearSystem, OscillatorParams, Regime,
                      SinusoidalForcing, classify_damping)
from .particular import (ParticularSolution, Provenance, beta_closed_form,
                         particular_solution_sinusoidal)
from .invariants import (AnglePolicy, InvariantEvaluator, InvariantKind, auto_invariant,
                         autonomous_damped_invariant, damped_forced_invariant, energy_invariant,
                         g_function, k_autonomous_damped, k_damped_forced, k_undamped_forced_nonresonant,
                         k_undamped_forced_resonant, k_weak_dissipation, shift_invariant,
                         undamped_nonresonant_invariant, undamped_resonant_invariant,
                         weak_dissipation_invariant)
from .dynamics import (TimeGrid, Trajectory, exact_flow, integrate, integrate_oscillator,
                       particular_solution_numeric)
from .verification import (DriftReport, ResidualReport, drift, pde_residual, refinement_study,
                           residual_study)

"""Dissipative Hamiltonian dynamics via symplectic bipotentials.

A simulation library and CLI for dynamics of the form

    qdot = dH/dp + eta_q,   pdot = -dH/dq + eta_p,

where the gap vector eta = zdot - XH carries the deviation from the
conservative flow and is selected by maximizing a tempered likelihood
(equivalently, by closing a bipotential inequality relative to the
symplectic form).  Includes a convex-analysis kernel over arbitrary
dualities, per-step variational solvers, and a diagnostics suite for
energy balance, dissipation inequalities and the minimal-information
principle.
"""

from .convex import (
    ConvexPotential,
    GridSpec,
    PolarEstimate,
    SupportSet,
    fenchel_gap,
    in_right_subgradient,
    indicator_origin,
    left_polar,
    polar_grid_error_bound,
    position_norm,
    quadratic_position,
    right_polar,
    support_set,
    zero_potential,
)
from .diagnostics import (
    BalanceReport,
    CompareReport,
    dissipation,
    dissipation_inequality,
    energy_balance,
    info_gap,
    minimal_dissipation_compare,
    perturbed_rivals,
)
from .dynamics import (
    Scenario,
    Trajectory,
    gap_residual,
    integrate,
    make_scenario,
    pure_dissipative_check,
    scenario_names,
    step_friction,
    step_generic,
    step_pure_hamiltonian,
    step_rayleigh,
    trajectory_from_samples,
)
from .errors import (
    ConfigError,
    DimensionMismatch,
    GridBudgetError,
    HamgapError,
    InfeasibleStepError,
    NumericsError,
    SolverError,
    UntemperedModelError,
    ValidationError,
)
from .likelihood import (
    DissipationModel,
    always_likely_model,
    dominates,
    friction_model,
    likelihood_axioms_check,
    max_likelihood,
    max_likelihood_model,
    minimal_symplectic_bipotential,
    model_from_bipotential,
    pure_hamiltonian_model,
    rayleigh_model,
    separable_bipotential,
    temperedness_check,
)
from .phase_space import (
    EUCLIDEAN,
    OMEGA,
    Duality,
    Hamiltonian,
    PhasePoint,
    conservation_defect,
    euclidean_pairing,
    free_drift,
    hamiltonian_from_value,
    harmonic_oscillator,
    kinetic_plus_potential,
    pairing,
    symplectic_form,
    symplectic_gradient,
)

__version__ = "0.1.0"

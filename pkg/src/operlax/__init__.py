"""Operadic calculus on finite-dimensional spaces and Lax flows built on it.

The package has four layers: dense multilinear operations (`multilinear`),
the composition calculus with its law checkers (`calculus`), the harmonic
oscillator model with its half-angle phase functions (`oscillator`), and the
coupled integration plus verification machinery (`evolution`).  `cli` exposes
all of it as the ``operlax`` command.
"""

from .calculus import (
    LawReport,
    check_compose_evaluate_consistency,
    check_composition_relations,
    check_graded_jacobi,
    check_unit_laws,
    gerstenhaber_bracket,
    operad_law_suite,
    partial_compose,
    random_operation,
    total_compose,
    trial_rng,
)
from .errors import (
    BranchCutError,
    ConfigError,
    DegenerateStateError,
    DimensionMismatchError,
    DivergenceError,
)
from .evolution import (
    CSV_HEADER,
    IntegratorConfig,
    StepRecord,
    SystemState,
    Trajectory,
    analytic_mu,
    analytic_state,
    evolve,
    matrix_lax_rhs,
    operadic_lax_rhs,
    pde_residual,
    pde_residual_field,
    pde_suite,
    rk4_order_check,
    rk4_step,
    structure_constant_rhs,
    structure_rhs_matrix,
    theorem_suite,
    trajectory_csv_lines,
)
from .multilinear import (
    Operation,
    evaluate,
    identity_operation,
    linear_combine,
    make_operation,
    operation_from_dict,
    operation_to_dict,
)
from .oscillator import (
    AuxFunctions,
    GammaMatrix,
    MuParams,
    OscState,
    aux_functions_continuous,
    aux_functions_principal,
    g_functions,
    gamma_matrix,
    hamilton_rhs,
    hamiltonian,
    lax_matrices,
    mu_family,
    proof_identity_residuals,
    proof_identity_suite,
    random_state,
)

__version__ = "0.1.0"

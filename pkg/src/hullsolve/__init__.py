"""hullsolve: linear systems via convex hull membership.

A square system A x = b is recast as asking whether the origin lies in the
convex hull of the matrix columns joined with -b (shifted when the solution
has negative components). The Triangle Algorithm answers the hull question
with either an approximate convex combination, from which a solution with a
certified relative residual is recovered, or a witness certificate of
non-membership that drives the shift upward.
"""

from .bounds import SystemAnalysis, analyze_system, delta0_lower_bound, tau_star_bounds
from .hull import (
    CAP_EXCEEDED,
    IN_HULL_APPROX,
    NOT_IN_HULL,
    DegeneratePivot,
    HullConfig,
    HullInstance,
    HullOutcome,
    Iterate,
    Witness,
    apply_step,
    check_witness,
    find_pivot,
    initial_iterate,
    iteration_cap_from_bound,
    make_iterate,
    run_hull,
    step_size,
)
from .incremental import (
    POLICY_DOUBLE_PLUS_ONE,
    POLICY_QUANTIZED,
    NoPositiveQuadratic,
    ShiftCertificate,
    ShiftQuadratic,
    ShiftState,
    build_quadratics,
    next_shift,
    optimize_shift_tau0,
    shift_solvability_certificate,
    solve_incremental,
    state_from_coeffs,
)
from .oracles import (
    OracleResult,
    delta_brute,
    hull_membership_2d,
    linear_system_oracle,
    solve_exact,
)
from .system import (
    CONVERGED,
    INFEASIBLE_NONNEG,
    SOLVE_CAP_EXCEEDED,
    LinearSystem,
    SingularMatrixError,
    SolveConfig,
    SolveOutcome,
)
from .two_phase import (
    AlphaBVanishes,
    ZeroInColumnHull,
    phase1_witness,
    recover_solution,
    select_inner_epsilon,
    sensitivity_epsilon_prime,
    solve_nonneg,
)

__version__ = "0.1.0"

"""Two-phase solver for A x = b when the solution is nonnegative.

Phase 1 runs the Triangle Algorithm on the columns of A against the origin
to obtain a witness, whose distance to the origin yields a lower bound
delta0' on the hull-to-origin distance. Phase 2 adjoins -b to the point set
and drives an iterate toward the origin; the convex coefficients of the
iterate recover an approximate solution x0 = alpha / alpha_b, whose residual
is A x0 - b = p' / alpha_b. The inner tolerance is chosen from delta0' so
that reaching it guarantees the requested relative residual (sensitivity
argument); in practice the solver checks the recovered residual directly
every iteration and exits as soon as it passes.
"""

from __future__ import annotations

import math

import numpy as np

from . import bounds
from .hull import (
    CAP_EXCEEDED,
    IN_HULL_APPROX,
    NOT_IN_HULL,
    HullConfig,
    HullInstance,
    HullOutcome,
    Iterate,
    Witness,
    apply_step,
    check_witness,
    find_pivot,
    initial_iterate,
    make_iterate,
    run_hull,
    step_size,
)
from .system import (
    CONVERGED,
    DELTA0_FROM_PHASE1,
    DELTA0_SKIP,
    DELTA0_USER,
    INFEASIBLE_NONNEG,
    SOLVE_CAP_EXCEEDED,
    LinearSystem,
    SolveConfig,
    SolveOutcome,
    SolveTraceRecord,
)

__all__ = [
    "ZeroInColumnHull",
    "AlphaBVanishes",
    "HullCapExceeded",
    "phase1_witness",
    "select_inner_epsilon",
    "sensitivity_epsilon_prime",
    "recover_solution",
    "solve_nonneg",
]

# Fallback iteration cap for hull runs whose theoretical bound is unknown
# or impractically large.
DEFAULT_PHASE_CAP = 10**6

# Phase 1 only needs its epsilon as a near-singularity threshold: the
# approximate-membership exit can never fire while epsilon * rho stays
# below the hull-to-origin distance, so it is kept well under any
# realistic conditioning rather than tied to the residual target.
PHASE1_EPSILON_CEIL = 1e-6

# Direct residual recomputation is O(n^2); above this size it runs only
# every ceil(n / 512) iterations, with the O(1) proxy gap / alpha_b
# (exactly the residual in exact arithmetic) triggering early checks.
RESIDUAL_EVERY_N = 512


class ZeroInColumnHull(Exception):
    """The origin lies in conv(columns of A) to tolerance, so A is singular."""


class AlphaBVanishes(Exception):
    """The iterate places (numerically) no weight on -b; x0 is unrecoverable."""


class HullCapExceeded(Exception):
    """A hull run hit its iteration cap before producing a verdict."""

    def __init__(self, message: str, iterations: int = 0):
        super().__init__(message)
        self.iterations = iterations


def _phase_hull_config(config: SolveConfig, epsilon: float) -> HullConfig:
    """Hull settings for an internal phase run, honoring user overrides."""
    base = config.hull
    return HullConfig(
        epsilon=epsilon if base is None else base.epsilon,
        max_iterations=(
            DEFAULT_PHASE_CAP if base is None or base.max_iterations is None
            else base.max_iterations
        ),
        pivot_rule=base.pivot_rule if base is not None else HullConfig().pivot_rule,
        init_rule=base.init_rule if base is not None else HullConfig().init_rule,
        init_coeffs=base.init_coeffs if base is not None else None,
        cache_dots=base.cache_dots if base is not None else False,
        record_trace=config.record_trace,
    )


def _phase1_outcome(system: LinearSystem, config: SolveConfig) -> HullOutcome:
    instance = HullInstance(system.a, np.zeros(system.n))
    epsilon = min(config.epsilon0, PHASE1_EPSILON_CEIL)
    hull_cfg = _phase_hull_config(config, epsilon=epsilon)
    return run_hull(instance, hull_cfg)


def _phase1_decision(
    system: LinearSystem, config: SolveConfig
) -> tuple[Witness, float, int]:
    outcome = _phase1_outcome(system, config)
    if outcome.status == IN_HULL_APPROX:
        raise ZeroInColumnHull(
            "origin lies in the convex hull of the columns to tolerance "
            f"(gap {outcome.iterate.gap:.3e}); the matrix is singular"
        )
    if outcome.status == CAP_EXCEEDED:
        raise HullCapExceeded(
            f"phase 1 exceeded {outcome.iterations} iterations without a verdict",
            iterations=outcome.iterations,
        )
    witness = outcome.witness
    assert witness is not None
    return witness, 0.5 * witness.iterate.gap, outcome.iterations


def phase1_witness(system: LinearSystem, config: SolveConfig) -> tuple[Witness, float]:
    """Witness that the origin is outside conv(columns of A), plus delta0'.

    delta0' = 0.5 * ||p'|| is a valid lower bound on the hull-to-origin
    distance by the factor-two property of witnesses. Raises
    ZeroInColumnHull when the hull run instead reaches an approximate
    membership (the origin is within epsilon of the column hull, i.e. A is
    singular or nearly so), and HullCapExceeded on an inconclusive run.
    """
    witness, delta0_prime, _ = _phase1_decision(system, config)
    return witness, delta0_prime


def select_inner_epsilon(
    epsilon0: float, delta0_prime: float, system: LinearSystem
) -> float:
    """Inner hull tolerance guaranteeing an epsilon0-approximate solution.

    Returns (delta0' / 2) * min(1 / rho, epsilon0 / (delta0' + ||b||)).
    By construction the result is at most delta0' / (2 rho), which is the
    precondition of the sensitivity guarantee.
    """
    if delta0_prime <= 0.0:
        raise ValueError("delta0_prime must be positive")
    return 0.5 * delta0_prime * min(
        1.0 / system.rho, epsilon0 / (delta0_prime + system.norm_b)
    )


def sensitivity_epsilon_prime(
    epsilon: float, delta0_prime: float, b_norm: float
) -> float:
    """Guaranteed relative residual 2 (1 + ||b|| / delta0') epsilon.

    Valid when epsilon <= delta0' / (2 rho) was enforced upstream; reported
    in diagnostics.
    """
    return 2.0 * (1.0 + b_norm / delta0_prime) * epsilon


def recover_solution(
    iterate: Iterate, system: LinearSystem, alpha_floor: float = 1e-12
) -> np.ndarray:
    """x0 = (alpha_1, ..., alpha_n) / alpha_b from an iterate over
    conv({a_1, ..., a_n, -b}), where alpha_b is the coefficient of -b.

    Raises AlphaBVanishes when alpha_b < alpha_floor: the hull
    approximation then carries no usable weight on -b and the residual
    guarantee is unavailable.
    """
    alpha_b = float(iterate.coeffs[-1])
    if alpha_b < alpha_floor:
        raise AlphaBVanishes(f"coefficient of -b is {alpha_b:.3e}")
    return iterate.coeffs[:-1] / alpha_b


def _resolve_delta0(
    system: LinearSystem, config: SolveConfig
) -> tuple[float | None, Iterate | None, int, dict]:
    """delta0' per policy, plus the Phase 2 warm start when Phase 1 ran."""
    diagnostics: dict = {"phase1_iterations": 0}
    if config.delta0_policy == DELTA0_USER:
        diagnostics["delta0_source"] = "user"
        return config.delta0_user, None, 0, diagnostics
    if config.delta0_policy == DELTA0_SKIP:
        eigen = bounds.delta0_lower_bound(system)
        if eigen > 0.0:
            diagnostics["delta0_source"] = "eigenvalue_bound"
            return eigen, None, 0, diagnostics
        diagnostics["delta0_source"] = "unavailable"
        diagnostics["guarantee"] = "direct residual check only"
        return None, None, 0, diagnostics
    witness, delta0_prime, iterations = _phase1_decision(system, config)
    diagnostics["delta0_source"] = "phase1_witness"
    diagnostics["phase1_iterations"] = iterations
    # Embed the witness in the enlarged hull: coefficient of -b starts at 0.
    start = np.append(witness.iterate.coeffs, 0.0)
    return delta0_prime, start, iterations, diagnostics


def solve_nonneg(system: LinearSystem, config: SolveConfig) -> SolveOutcome:
    """Solve A x = b assuming x >= 0, to relative residual epsilon0.

    Runs Phase 1 per the delta0 policy, then iterates the Triangle
    Algorithm on conv({a_1, ..., a_n, -b}) against the origin. Every
    iterate update recovers x0 and tests ||A x0 - b|| <= epsilon0 * rho
    directly (when residual_first, the default), returning early on
    success; the theoretically selected inner epsilon governs the
    iteration cap cap = ceil((48 / epsilon0^2) (rho / delta0')^2). A
    witness means no nonnegative solution exists.
    """
    rho = system.rho
    eps0 = config.epsilon0
    n = system.n

    try:
        delta0_prime, start_coeffs, phase1_steps, diagnostics = _resolve_delta0(
            system, config
        )
    except HullCapExceeded as exc:
        return SolveOutcome(
            status=SOLVE_CAP_EXCEEDED,
            x=None,
            residual_norm=None,
            relative_residual=None,
            shift_t=0.0,
            phase1_delta0_prime=None,
            inner_epsilon=None,
            iterations=exc.iterations,
            diagnostics={"phase1": str(exc)},
        )

    inner_eps: float | None = None
    eps_prime: float | None = None
    if delta0_prime is not None and delta0_prime > 0.0:
        inner_eps = select_inner_epsilon(eps0, delta0_prime, system)
        eps_prime = sensitivity_epsilon_prime(inner_eps, delta0_prime, system.norm_b)
        diagnostics["epsilon_prime"] = eps_prime

    hull_cfg = _phase_hull_config(config, epsilon=eps0)
    if config.hull is not None and config.hull.max_iterations is not None:
        cap = config.hull.max_iterations
    elif delta0_prime is not None and delta0_prime > 0.0:
        cap = math.ceil((48.0 / (eps0 * eps0)) * (rho / delta0_prime) ** 2)
    else:
        cap = DEFAULT_PHASE_CAP
    diagnostics["phase2_cap"] = cap

    points = np.hstack([system.a, -system.b[:, None]])
    instance = HullInstance(points, np.zeros(n))
    if start_coeffs is not None:
        iterate = make_iterate(instance, start_coeffs, cache_dots=hull_cfg.cache_dots)
    else:
        iterate = initial_iterate(instance, hull_cfg)

    trace: list[SolveTraceRecord] | None = [] if config.record_trace else None
    stride = 1 if n <= RESIDUAL_EVERY_N else math.ceil(n / RESIDUAL_EVERY_N)
    threshold = eps0 * rho
    steps = 0

    def outcome(status, x, residual, witness=None):
        return SolveOutcome(
            status=status,
            x=x,
            residual_norm=residual,
            relative_residual=None if residual is None else residual / rho,
            shift_t=0.0,
            phase1_delta0_prime=delta0_prime,
            inner_epsilon=inner_eps,
            iterations=phase1_steps + steps,
            witness=witness,
            trace=trace,
            diagnostics=diagnostics,
        )

    while True:
        alpha_b = float(iterate.coeffs[-1])
        if config.residual_first and alpha_b >= config.alpha_floor:
            proxy = iterate.gap / alpha_b
            if proxy <= threshold or steps % stride == 0:
                x0 = iterate.coeffs[:-1] / alpha_b
                residual = system.residual_norm(x0)
                if residual <= threshold:
                    if trace is not None:
                        trace.append(
                            SolveTraceRecord(steps, 0.0, residual, alpha_b, None, False)
                        )
                    return outcome(CONVERGED, x0, residual)
        if inner_eps is not None and iterate.gap <= inner_eps * rho:
            # Theoretical target: the sensitivity bound now guarantees the
            # recovered residual, provided delta0' really was a lower bound.
            if alpha_b < config.alpha_floor:
                diagnostics["alpha_b_vanished"] = True
                return outcome(SOLVE_CAP_EXCEEDED, None, None)
            x0 = iterate.coeffs[:-1] / alpha_b
            residual = system.residual_norm(x0)
            if residual <= threshold:
                if trace is not None:
                    trace.append(
                        SolveTraceRecord(steps, 0.0, residual, alpha_b, None, False)
                    )
                return outcome(CONVERGED, x0, residual)
            # Only reachable when the supplied delta0' overstated the hull
            # distance; keep iterating on the direct check instead.
            diagnostics["hull_target_residual_miss"] = True

        j = find_pivot(instance, iterate, hull_cfg.pivot_rule)
        if j is None:
            witness = check_witness(instance, iterate)
            if trace is not None:
                trace.append(
                    SolveTraceRecord(steps, 0.0, iterate.gap, alpha_b, None, True)
                )
            return outcome(INFEASIBLE_NONNEG, None, None, witness=witness)
        if steps >= cap:
            diagnostics["last_gap"] = iterate.gap
            return outcome(SOLVE_CAP_EXCEEDED, None, None)
        alpha = step_size(instance.target, iterate, instance.points[:, j])
        iterate = apply_step(instance, iterate, j, alpha)
        steps += 1
        if trace is not None:
            trace.append(
                SolveTraceRecord(
                    steps, 0.0, iterate.gap, float(iterate.coeffs[-1]), j, False
                )
            )

"""Incremental shift solver for a general square system A x = b.

No sign information about the solution is needed: the system is replaced by
A x = b + t u with u = A e, whose solution is nonnegative once t is large
enough. Starting from t = 0, the solver alternates Triangle Algorithm steps
on conv({a_1, ..., a_n, -b(t)}) with shift increases driven by witnesses.
When the iterate is a witness at the current shift, each point of the set
induces a quadratic g_i(t) in the shift whose sign tells whether the same
iterate stays a witness at shift t; the smallest root beyond the current
shift gives the next shift to try. The final answer is x = x0 - t e.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import bounds
from .hull import (
    HullConfig,
    HullInstance,
    Iterate,
    apply_step,
    find_pivot,
    initial_iterate,
    make_iterate,
    step_size,
)
from .system import (
    CONVERGED,
    SOLVE_CAP_EXCEEDED,
    LinearSystem,
    SolveConfig,
    SolveOutcome,
    SolveTraceRecord,
)
from .two_phase import DEFAULT_PHASE_CAP, AlphaBVanishes

__all__ = [
    "POLICY_QUANTIZED",
    "POLICY_DOUBLE_PLUS_ONE",
    "NoPositiveQuadratic",
    "ShiftQuadratic",
    "ShiftState",
    "ShiftCertificate",
    "shifted_instance",
    "state_from_coeffs",
    "optimize_shift_tau0",
    "build_quadratics",
    "next_shift",
    "shift_solvability_certificate",
    "solve_incremental",
]

POLICY_QUANTIZED = "quantized"
POLICY_DOUBLE_PLUS_ONE = "double_plus_one"

DEFAULT_ESCALATION_CAP = 10**6

# Floor on the shift increase per escalation, guarding against a root that
# lands on the current shift through roundoff.
ROOT_TINY = 1e-12


class NoPositiveQuadratic(Exception):
    """No column quadratic opens upward (the -b coefficient vanished)."""


@dataclass
class ShiftQuadratic:
    """g_i(t) = c2 t^2 + c1 t + c0 for one point of the shifted hull.

    Column quadratics (is_rhs False) open upward whenever the -b(t)
    coefficient is positive; the right-hand-side quadratic opens downward
    and stays negative, so it never drives the shift selection.
    """

    index: int
    c2: float
    c1: float
    c0: float
    is_rhs: bool = False

    def value(self, t: float) -> float:
        return (self.c2 * t + self.c1) * t + self.c0


@dataclass
class ShiftState:
    """Iterate over conv({a_1, ..., a_n, -b(t0)}) with its shift bookkeeping.

    p_base is the shift-independent part of the iterate's point:
    point(t) = p_base - t * alpha_b * u.
    """

    t0: float
    iterate: Iterate
    p_base: np.ndarray

    @property
    def alpha_b(self) -> float:
        return float(self.iterate.coeffs[-1])


@dataclass
class ShiftCertificate:
    """Proof that A x = b + t0 u, x >= 0 is infeasible.

    margins holds the n+1 expanded witness inequalities
    ||p'||^2 - 2 p'^T a_i < 0 and ||p'||^2 + 2 p'^T b(t0) < 0 (these are
    exactly twice the hull pivot margins).
    """

    t0: float
    margins: np.ndarray
    coeffs: np.ndarray


def shifted_instance(
    system: LinearSystem, t0: float, column_sq: np.ndarray | None = None
) -> HullInstance:
    """Hull instance for conv({a_1, ..., a_n, -b(t0)}) against the origin."""
    rhs = -system.rhs_shifted(t0)
    points = np.hstack([system.a, rhs[:, None]])
    if column_sq is None:
        column_sq = system.column_norms**2
    sq = np.append(column_sq, rhs @ rhs)
    return HullInstance(points, np.zeros(system.n), squared_norms=sq)


def _rebase(system: LinearSystem, iterate: Iterate, t0: float) -> np.ndarray:
    """Shift-independent part of the iterate's point."""
    return iterate.point + (t0 * float(iterate.coeffs[-1])) * system.u


def _iterate_from_base(
    system: LinearSystem, p_base: np.ndarray, coeffs: np.ndarray, t0: float
) -> Iterate:
    """Warm-started iterate at a new shift: same coefficients, moved point."""
    point = p_base - (t0 * float(coeffs[-1])) * system.u
    return Iterate(coeffs=coeffs, point=point, gap=float(np.linalg.norm(point)))


def state_from_coeffs(
    system: LinearSystem, coeffs: np.ndarray, t0: float
) -> ShiftState:
    """Build the full shift state from explicit convex coefficients."""
    instance = shifted_instance(system, t0)
    iterate = make_iterate(instance, coeffs)
    return ShiftState(t0=t0, iterate=iterate, p_base=_rebase(system, iterate, t0))


def optimize_shift_tau0(
    system: LinearSystem, x0: np.ndarray, t_floor: float
) -> tuple[float, float]:
    """Shift minimizing E(t) = ||A x0 - (b + t u)|| subject to t >= t_floor.

    E^2 is a convex quadratic in t with unconstrained minimizer
    u^T (A x0 - b) / ||u||^2; the constrained optimum clamps it at t_floor.
    Returns (tau0, E(tau0)).
    """
    r0 = system.a @ x0 - system.b
    u = system.u
    u_sq = float(u @ u)
    t_hat = float(u @ r0) / u_sq if u_sq > 0.0 else t_floor
    tau0 = max(t_floor, t_hat)
    err = float(np.linalg.norm(r0 - tau0 * u))
    return tau0, err


def build_quadratics(
    state: ShiftState, system: LinearSystem, alpha_floor: float = 1e-12
) -> list[ShiftQuadratic]:
    """Shift quadratics g_i(t) for the current witness state.

    For a column a_i: c2 = alpha_b^2 ||u||^2, c1 = -2 alpha_b (p' - a_i)^T u,
    c0 = ||p'||^2 - 2 p'^T a_i, with p' the shift-independent base point.
    The right-hand-side entry expands ||p'(t)||^2 + 2 p'(t)^T (b + t u).
    """
    alpha_b = state.alpha_b
    if alpha_b < alpha_floor:
        raise AlphaBVanishes(f"coefficient of -b(t) is {alpha_b:.3e}")
    base = state.p_base
    u = system.u
    n = system.n
    u_sq = float(u @ u)
    base_sq = float(base @ base)
    base_u = float(base @ u)
    col_u = system.a.T @ u
    col_base = system.a.T @ base
    c2 = alpha_b * alpha_b * u_sq
    quads = [
        ShiftQuadratic(
            index=i,
            c2=c2,
            c1=-2.0 * alpha_b * (base_u - float(col_u[i])),
            c0=base_sq - 2.0 * float(col_base[i]),
        )
        for i in range(n)
    ]
    quads.append(
        ShiftQuadratic(
            index=n,
            c2=alpha_b * (alpha_b - 2.0) * u_sq,
            c1=2.0 * (1.0 - alpha_b) * base_u - 2.0 * alpha_b * float(u @ system.b),
            c0=base_sq + 2.0 * float(base @ system.b),
            is_rhs=True,
        )
    )
    return quads


def _larger_root(c2: float, c1: float, c0: float) -> float:
    """Larger real root of an upward quadratic known to dip negative.

    Uses the sign of c1 to pick the cancellation-free form; when the
    discriminant sits within roundoff of zero, falls back to the Cauchy
    upper bound 1 + max(|c1|, |c0|) / c2 on the roots.
    """
    disc = c1 * c1 - 4.0 * c2 * c0
    scale = max(c1 * c1, abs(4.0 * c2 * c0), 1e-300)
    if disc <= 1e-12 * scale:
        return 1.0 + max(abs(c1), abs(c0)) / c2
    s = math.sqrt(disc)
    if c1 >= 0.0:
        return -2.0 * c0 / (c1 + s)
    return (s - c1) / (2.0 * c2)


def next_shift(
    quadratics: list[ShiftQuadratic], t0: float, quantum: int | None = 1
) -> float:
    """Smallest shift at which some column quadratic becomes nonnegative.

    quantum = None returns the raw minimal root; otherwise the increase
    over t0 is rounded up to a positive multiple of quantum so that
    consecutive shifts differ by a natural number. The right-hand-side
    quadratic is never consulted (it stays negative).
    """
    upward = [q for q in quadratics if not q.is_rhs and q.c2 > 0.0]
    if not upward:
        raise NoPositiveQuadratic(
            "no column quadratic opens upward; the -b(t) coefficient is zero"
        )
    raw = min(_larger_root(q.c2, q.c1, q.c0) for q in upward)
    if quantum is None:
        return raw
    if quantum < 1:
        raise ValueError("quantum must be a positive integer")
    excess = max(raw - t0, ROOT_TINY)
    return t0 + quantum * math.ceil(excess / quantum)


def shift_solvability_certificate(
    state: ShiftState, system: LinearSystem
) -> ShiftCertificate:
    """Package the witness at the current shift as an infeasibility proof."""
    point = state.iterate.point
    p_sq = float(point @ point)
    col_margins = p_sq - 2.0 * (system.a.T @ point)
    rhs_margin = p_sq + 2.0 * float(point @ system.rhs_shifted(state.t0))
    margins = np.append(col_margins, rhs_margin)
    if not (margins < 0.0).all():
        raise ValueError("state is not a witness at its shift")
    return ShiftCertificate(
        t0=state.t0, margins=margins, coeffs=state.iterate.coeffs.copy()
    )


def _reseed(instance: HullInstance, iterate: Iterate) -> Iterate:
    """Move half the mass onto -b(t0) when its coefficient vanished.

    Keeps the point inside the hull while restoring a positive -b(t)
    coefficient, which the shift quadratics need.
    """
    coeffs = 0.5 * iterate.coeffs
    coeffs[-1] += 0.5
    return make_iterate(instance, coeffs)


def _default_escalation_cap(system: LinearSystem) -> int:
    log_prime, _, flags = bounds.tau_star_bounds(system)
    if flags["near_singular"] or not math.isfinite(log_prime):
        return DEFAULT_ESCALATION_CAP
    if log_prime < math.log(DEFAULT_ESCALATION_CAP / 10.0):
        return math.ceil(10.0 * max(math.exp(log_prime), 1.0))
    return DEFAULT_ESCALATION_CAP


def solve_incremental(
    system: LinearSystem,
    config: SolveConfig,
    *,
    policy: str = POLICY_QUANTIZED,
    quantum: int | None = 1,
    tau_hook=None,
    max_escalations: int | None = None,
    max_steps: int | None = None,
) -> SolveOutcome:
    """Solve A x = b with no sign assumption, to relative residual epsilon0.

    The loop per pass: recover x0 from the iterate, optimize the shift
    tau0 >= t0 minimizing E(t) = ||A x0 - (b + t u)||, stop with
    x = x0 - t0 e once E(t0) <= epsilon0 * rho; otherwise take one Triangle
    step at the current shift, or, when the iterate is a witness, raise the
    shift to the next quadratic root (policy "quantized", increase rounded
    up to a multiple of quantum) or to 2 t0 + 1 (policy "double_plus_one")
    and warm-start from the same coefficients.

    tau_hook, when given, post-processes tau0 (clamped below by the current
    shift); it exists to reproduce hand-worked shift sequences in tests.
    """
    if policy not in (POLICY_QUANTIZED, POLICY_DOUBLE_PLUS_ONE):
        raise ValueError(f"unknown increment policy {policy!r}")
    n = system.n
    rho = system.rho
    eps0 = config.epsilon0
    threshold = eps0 * rho
    hull_cfg = config.hull if config.hull is not None else HullConfig()
    rule = hull_cfg.pivot_rule
    column_sq = system.column_norms**2
    ones = np.ones(n)

    if max_steps is None:
        max_steps = (
            hull_cfg.max_iterations
            if hull_cfg.max_iterations is not None
            else DEFAULT_PHASE_CAP
        )
    if max_escalations is None:
        max_escalations = _default_escalation_cap(system)

    t0 = 0.0
    instance = shifted_instance(system, t0, column_sq)
    iterate = initial_iterate(
        instance,
        HullConfig(
            epsilon=hull_cfg.epsilon,
            init_rule=hull_cfg.init_rule,
            init_coeffs=hull_cfg.init_coeffs,
        ),
    )
    trace: list[SolveTraceRecord] | None = [] if config.record_trace else None
    steps = 0
    escalations = 0
    reseeds = 0
    shifts = [t0]
    diagnostics: dict = {
        "policy": policy,
        "max_escalations": max_escalations,
        "max_steps": max_steps,
    }

    def capped() -> SolveOutcome:
        diagnostics.update(
            escalations=escalations, reseeds=reseeds, shifts=shifts, last_t=t0
        )
        return SolveOutcome(
            status=SOLVE_CAP_EXCEEDED,
            x=None,
            residual_norm=None,
            relative_residual=None,
            shift_t=t0,
            phase1_delta0_prime=None,
            inner_epsilon=None,
            iterations=steps,
            trace=trace,
            diagnostics=diagnostics,
        )

    while True:
        # Step 1: re-optimize the shift for the current x0, test the stop rule.
        if float(iterate.coeffs[-1]) < config.alpha_floor:
            iterate = _reseed(instance, iterate)
            reseeds += 1
        alpha_b = float(iterate.coeffs[-1])
        x0 = iterate.coeffs[:-1] / alpha_b
        tau0, err = optimize_shift_tau0(system, x0, t_floor=t0)
        if tau_hook is not None:
            tau0 = max(t0, float(tau_hook(tau0)))
            err = float(np.linalg.norm(system.a @ x0 - system.rhs_shifted(tau0)))
        if tau0 != t0:
            base = _rebase(system, iterate, t0)
            t0 = tau0
            instance = shifted_instance(system, t0, column_sq)
            iterate = _iterate_from_base(system, base, iterate.coeffs, t0)
        if err <= threshold:
            x = x0 - t0 * ones
            residual = system.residual_norm(x)
            if trace is not None:
                trace.append(
                    SolveTraceRecord(steps, t0, residual, alpha_b, None, False)
                )
            diagnostics.update(
                escalations=escalations, reseeds=reseeds, shifts=shifts
            )
            return SolveOutcome(
                status=CONVERGED,
                x=x,
                residual_norm=residual,
                relative_residual=residual / rho,
                shift_t=t0,
                phase1_delta0_prime=None,
                inner_epsilon=None,
                iterations=steps,
                trace=trace,
                diagnostics=diagnostics,
            )

        # Step 2: witness check via pivot search; Step 3: shift escalation.
        j = find_pivot(instance, iterate, rule)
        while j is None:
            if policy == POLICY_DOUBLE_PLUS_ONE:
                new_t = 2.0 * t0 + 1.0
            else:
                if float(iterate.coeffs[-1]) < config.alpha_floor:
                    iterate = _reseed(instance, iterate)
                    reseeds += 1
                    j = find_pivot(instance, iterate, rule)
                    continue
                state = ShiftState(
                    t0=t0, iterate=iterate, p_base=_rebase(system, iterate, t0)
                )
                try:
                    new_t = next_shift(
                        build_quadratics(state, system, config.alpha_floor),
                        t0,
                        quantum,
                    )
                except NoPositiveQuadratic:
                    iterate = _reseed(instance, iterate)
                    reseeds += 1
                    j = find_pivot(instance, iterate, rule)
                    continue
            escalations += 1
            if escalations > max_escalations:
                return capped()
            base = _rebase(system, iterate, t0)
            t0 = new_t
            shifts.append(t0)
            instance = shifted_instance(system, t0, column_sq)
            iterate = _iterate_from_base(system, base, iterate.coeffs, t0)
            if trace is not None:
                trace.append(
                    SolveTraceRecord(
                        steps, t0, iterate.gap, float(iterate.coeffs[-1]), None, True
                    )
                )
            j = find_pivot(instance, iterate, rule)

        if steps >= max_steps:
            return capped()
        alpha = step_size(instance.target, iterate, instance.points[:, j])
        iterate = apply_step(instance, iterate, j, alpha)
        steps += 1
        if trace is not None:
            # ||p'(t)|| / alpha_b equals the residual of the recovered x0.
            new_ab = float(iterate.coeffs[-1])
            estimate = (
                iterate.gap / new_ab if new_ab >= config.alpha_floor else iterate.gap
            )
            trace.append(SolveTraceRecord(steps, t0, estimate, new_ab, j, False))

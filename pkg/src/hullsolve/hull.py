"""Triangle Algorithm for the convex hull decision problem.

Given a finite point set S = {v_1, ..., v_n} and a target p, the algorithm
either pulls an iterate p' inside conv(S) to within a relative tolerance of
p, or halts with a witness: a point of conv(S) strictly closer to every v_i
than p is, which certifies p is not in the hull (the orthogonal bisector of
the segment p p' separates p from conv(S)).

All pivot and witness tests are done in the square-root-free margin form

    margin_i = (p - p')^T v_i - (||p||^2 - ||p'||^2) / 2

where v_i is a pivot point iff margin_i >= 0, and p' is a witness iff every
margin is strictly negative.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "PIVOT_MOST_VIOLATED",
    "PIVOT_FIRST_FOUND",
    "INIT_NEAREST_VERTEX",
    "INIT_CENTROID",
    "INIT_GIVEN",
    "IN_HULL_APPROX",
    "NOT_IN_HULL",
    "CAP_EXCEEDED",
    "DegeneratePivot",
    "HullInstance",
    "Iterate",
    "Witness",
    "HullConfig",
    "HullOutcome",
    "HullTraceRecord",
    "make_iterate",
    "initial_iterate",
    "pivot_margins",
    "find_pivot",
    "check_witness",
    "step_size",
    "apply_step",
    "run_hull",
    "iteration_cap_from_bound",
]

PIVOT_MOST_VIOLATED = "most_violated"
PIVOT_FIRST_FOUND = "first_found"
INIT_NEAREST_VERTEX = "nearest_vertex"
INIT_CENTROID = "centroid"
INIT_GIVEN = "given"

IN_HULL_APPROX = "in_hull_approx"
NOT_IN_HULL = "not_in_hull"
CAP_EXCEEDED = "cap_exceeded"

# Negative convex coefficients smaller than this in magnitude are rounding
# dust and are clamped to zero before renormalizing.
COEFF_DUST = 1e-15

# ||v_j - p'||^2 below this means the pivot coincides with the iterate; a
# strict pivot margin rules that out in exact arithmetic, so hitting it
# signals numerical breakdown rather than a recoverable state.
DEGENERATE_PIVOT_SQ = 1e-30


class DegeneratePivot(Exception):
    """Pivot point coincides with the current iterate (stalled geometry)."""


class HullInstance:
    """A membership query: point set S (matrix columns) and target p.

    Parameters
    ----------
    points : (m, n) array
        Columns are the points v_1 ... v_n.
    target : (m,) array
        The query point p.
    squared_norms : (n,) array, optional
        Precomputed ||v_i||^2, reused when constructing many instances that
        share columns (e.g. shifted right-hand sides).
    """

    def __init__(self, points, target, squared_norms=None):
        points = np.ascontiguousarray(points, dtype=float)
        target = np.ascontiguousarray(target, dtype=float)
        if points.ndim != 2:
            raise ValueError("points must be a 2-d array with one column per point")
        m, n = points.shape
        if n < 1 or m < 1:
            raise ValueError("need at least one point in at least one dimension")
        if target.shape != (m,):
            raise ValueError(f"target has dimension {target.shape}, points have {m}")
        if not np.isfinite(points).all() or not np.isfinite(target).all():
            raise ValueError("points and target must be finite")
        self.points = points
        self.target = target
        if squared_norms is None:
            squared_norms = np.einsum("ij,ij->j", points, points)
        else:
            squared_norms = np.asarray(squared_norms, dtype=float)
            if squared_norms.shape != (n,):
                raise ValueError("squared_norms must have one entry per point")
        self.squared_norms = squared_norms
        self.target_dots = points.T @ target  # p^T v_i, fixed for the run
        self.target_sq = float(target @ target)
        self._radius = None
        self._gram_cols: dict[int, np.ndarray] = {}

    @property
    def n_points(self) -> int:
        return self.points.shape[1]

    @property
    def dim(self) -> int:
        return self.points.shape[0]

    @property
    def radius_R(self) -> float:
        """max_i ||p - v_i||, computed on first use."""
        if self._radius is None:
            diffs = self.points - self.target[:, None]
            self._radius = float(np.sqrt(np.einsum("ij,ij->j", diffs, diffs).max()))
        return self._radius

    def distance_to_point(self, j: int) -> float:
        """||p - v_j||."""
        d = self.target - self.points[:, j]
        return float(np.sqrt(d @ d))

    def gram_column(self, j: int) -> np.ndarray:
        """v_i^T v_j for all i, memoized per pivot index."""
        col = self._gram_cols.get(j)
        if col is None:
            col = self.points.T @ self.points[:, j]
            self._gram_cols[j] = col
        return col


@dataclass
class Iterate:
    """A point of conv(S) with its explicit convex combination.

    coeffs is a probability vector over the columns, point equals
    points @ coeffs up to roundoff, gap is ||target - point||, and
    dot_cache (when maintained) holds point^T v_i for all i.
    """

    coeffs: np.ndarray
    point: np.ndarray
    gap: float
    dot_cache: np.ndarray | None = None


@dataclass
class Witness:
    """Certificate that the target is outside the hull.

    Every margin is strictly negative, and the distance from the target to
    the hull lies in distance_bracket = (gap / 2, gap).
    """

    iterate: Iterate
    margins: np.ndarray
    distance_bracket: tuple[float, float]


@dataclass
class HullTraceRecord:
    iteration: int
    gap: float
    pivot: int
    step: float


@dataclass
class HullConfig:
    """Settings for a Triangle Algorithm run.

    max_iterations defaults to the worst-case membership bound
    ceil(48 / epsilon^2) when left as None.
    """

    epsilon: float = 1e-4
    max_iterations: int | None = None
    pivot_rule: str = PIVOT_MOST_VIOLATED
    init_rule: str = INIT_NEAREST_VERTEX
    init_coeffs: np.ndarray | None = None
    cache_dots: bool = False
    record_trace: bool = False

    def __post_init__(self):
        if not 0.0 < self.epsilon < 1.0:
            raise ValueError("epsilon must lie strictly between 0 and 1")
        if self.max_iterations is not None and self.max_iterations < 1:
            raise ValueError("max_iterations must be at least 1")
        if self.pivot_rule not in (PIVOT_MOST_VIOLATED, PIVOT_FIRST_FOUND):
            raise ValueError(f"unknown pivot rule {self.pivot_rule!r}")
        if self.init_rule not in (INIT_NEAREST_VERTEX, INIT_CENTROID, INIT_GIVEN):
            raise ValueError(f"unknown init rule {self.init_rule!r}")
        if self.init_rule == INIT_GIVEN and self.init_coeffs is None:
            raise ValueError("init_rule 'given' requires init_coeffs")

    def resolved_cap(self) -> int:
        if self.max_iterations is not None:
            return self.max_iterations
        return iteration_cap_from_bound(self.epsilon)


@dataclass
class HullOutcome:
    """Result of run_hull.

    status is one of IN_HULL_APPROX, NOT_IN_HULL, CAP_EXCEEDED. On
    IN_HULL_APPROX the final gap satisfies gap <= epsilon * ||p - v_j||
    for the certifying vertex j; on NOT_IN_HULL witness is set.
    """

    status: str
    iterate: Iterate
    iterations: int
    initial_gap_delta0: float
    witness: Witness | None = None
    certifying_vertex: int | None = None
    trace: list[HullTraceRecord] | None = None


def _clean_coeffs(coeffs: np.ndarray) -> np.ndarray:
    """Clamp rounding dust at zero and renormalize to sum exactly one."""
    coeffs = np.array(coeffs, dtype=float)
    if (coeffs < -COEFF_DUST).any():
        raise ValueError("convex coefficients must be nonnegative")
    coeffs[np.abs(coeffs) < COEFF_DUST] = 0.0
    total = coeffs.sum()
    if total <= 0.0:
        raise ValueError("convex coefficients must have positive sum")
    return coeffs / total


def make_iterate(instance: HullInstance, coeffs, cache_dots: bool = False) -> Iterate:
    """Build an Iterate from explicit convex coefficients."""
    coeffs = _clean_coeffs(np.asarray(coeffs, dtype=float))
    if coeffs.shape != (instance.n_points,):
        raise ValueError("coefficient vector length must match the point count")
    point = instance.points @ coeffs
    gap = float(np.linalg.norm(instance.target - point))
    cache = instance.points.T @ point if cache_dots else None
    return Iterate(coeffs=coeffs, point=point, gap=gap, dot_cache=cache)


def initial_iterate(instance: HullInstance, config: HullConfig) -> Iterate:
    """Starting iterate per the configured init rule."""
    n = instance.n_points
    if config.init_rule == INIT_CENTROID:
        coeffs = np.full(n, 1.0 / n)
    elif config.init_rule == INIT_GIVEN:
        coeffs = np.asarray(config.init_coeffs, dtype=float)
    else:  # nearest vertex: the cheapest start that is often already close
        diffs = instance.points - instance.target[:, None]
        k = int(np.argmin(np.einsum("ij,ij->j", diffs, diffs)))
        coeffs = np.zeros(n)
        coeffs[k] = 1.0
    return make_iterate(instance, coeffs, cache_dots=config.cache_dots)


def pivot_margins(instance: HullInstance, iterate: Iterate) -> np.ndarray:
    """Square-root-free pivot margins for every point.

    margin_i >= 0 means v_i is a pivot point (equivalently
    ||p' - v_i|| >= ||p - v_i||); all margins < 0 means the iterate is a
    witness. No square roots are taken.
    """
    point_sq = float(iterate.point @ iterate.point)
    shift = 0.5 * (instance.target_sq - point_sq)
    if iterate.dot_cache is not None:
        return instance.target_dots - iterate.dot_cache - shift
    return instance.points.T @ (instance.target - iterate.point) - shift


def find_pivot(
    instance: HullInstance, iterate: Iterate, rule: str = PIVOT_MOST_VIOLATED
) -> int | None:
    """Index of a pivot point, or None when the iterate is a witness.

    Under PIVOT_MOST_VIOLATED the pivot maximizes the margin (ties to the
    lowest index); under PIVOT_FIRST_FOUND it is the lowest index with a
    nonnegative margin.
    """
    margins = pivot_margins(instance, iterate)
    if rule == PIVOT_FIRST_FOUND:
        hits = np.flatnonzero(margins >= 0.0)
        return int(hits[0]) if hits.size else None
    j = int(np.argmax(margins))
    return j if margins[j] >= 0.0 else None


def check_witness(instance: HullInstance, iterate: Iterate) -> Witness | None:
    """Witness certificate when every pivot margin is strictly negative."""
    margins = pivot_margins(instance, iterate)
    if (margins < 0.0).all():
        bracket = (0.5 * iterate.gap, iterate.gap)
        return Witness(iterate=iterate, margins=margins, distance_bracket=bracket)
    return None


def step_size(target: np.ndarray, iterate: Iterate, pivot: np.ndarray) -> float:
    """Step size toward the pivot, clamped to [0, 1].

    The unclamped value places the new iterate at the closest point to the
    target on the line through p' and v_j; a returned value of 1 means jump
    to the pivot vertex itself.
    """
    direction = pivot - iterate.point
    denom = float(direction @ direction)
    if denom < DEGENERATE_PIVOT_SQ:
        raise DegeneratePivot("pivot coincides with the current iterate")
    alpha = float((target - iterate.point) @ direction) / denom
    return min(1.0, max(0.0, alpha))


def apply_step(
    instance: HullInstance, iterate: Iterate, j: int, alpha: float
) -> Iterate:
    """New iterate after pulling toward pivot j with step alpha in [0, 1]."""
    if not 0.0 <= alpha <= 1.0:
        raise ValueError("alpha must lie in [0, 1]")
    if alpha == 1.0:
        # Exact jump to the vertex: the combination collapses to e_j.
        coeffs = np.zeros(instance.n_points)
        coeffs[j] = 1.0
        point = instance.points[:, j].copy()
        cache = instance.gram_column(j).copy() if iterate.dot_cache is not None else None
    else:
        coeffs = (1.0 - alpha) * iterate.coeffs
        coeffs[j] += alpha
        coeffs = _clean_coeffs(coeffs)
        point = (1.0 - alpha) * iterate.point + alpha * instance.points[:, j]
        cache = None
        if iterate.dot_cache is not None:
            cache = (1.0 - alpha) * iterate.dot_cache + alpha * instance.gram_column(j)
    gap = float(np.linalg.norm(instance.target - point))
    return Iterate(coeffs=coeffs, point=point, gap=gap, dot_cache=cache)


def run_hull(instance: HullInstance, config: HullConfig) -> HullOutcome:
    """Run the Triangle Algorithm to an eps-approximation or a witness.

    Loops pivot search / step-size / update. Returns IN_HULL_APPROX as soon
    as gap <= epsilon * ||p - v_j|| for the current pivot j (checked before
    stepping; when no pivot exists the reference falls back to
    min_i ||p - v_i||), NOT_IN_HULL with a witness when no pivot exists and
    the approximation test fails, and CAP_EXCEEDED once max_iterations
    steps were taken without either. Deterministic for a fixed
    configuration.
    """
    iterate = initial_iterate(instance, config)
    delta0 = iterate.gap
    cap = config.resolved_cap()
    trace: list[HullTraceRecord] | None = [] if config.record_trace else None
    steps = 0
    while True:
        j = find_pivot(instance, iterate, config.pivot_rule)
        if j is not None:
            reference_vertex = j
        else:
            diffs = instance.points - instance.target[:, None]
            reference_vertex = int(np.argmin(np.einsum("ij,ij->j", diffs, diffs)))
        if iterate.gap <= config.epsilon * instance.distance_to_point(reference_vertex):
            return HullOutcome(
                status=IN_HULL_APPROX,
                iterate=iterate,
                iterations=steps,
                initial_gap_delta0=delta0,
                certifying_vertex=reference_vertex,
                trace=trace,
            )
        if j is None:
            witness = check_witness(instance, iterate)
            return HullOutcome(
                status=NOT_IN_HULL,
                iterate=iterate,
                iterations=steps,
                initial_gap_delta0=delta0,
                witness=witness,
                trace=trace,
            )
        if steps >= cap:
            return HullOutcome(
                status=CAP_EXCEEDED,
                iterate=iterate,
                iterations=steps,
                initial_gap_delta0=delta0,
                trace=trace,
            )
        alpha = step_size(instance.target, iterate, instance.points[:, j])
        iterate = apply_step(instance, iterate, j, alpha)
        steps += 1
        if trace is not None:
            trace.append(HullTraceRecord(steps, iterate.gap, j, alpha))


def iteration_cap_from_bound(epsilon: float) -> int:
    """Worst-case iteration count ceil(48 / epsilon^2) for membership runs."""
    if not 0.0 < epsilon < 1.0:
        raise ValueError("epsilon must lie strictly between 0 and 1")
    return math.ceil(48.0 / (epsilon * epsilon))

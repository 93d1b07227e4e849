"""Threshold-greedy ascent solvers and the exhaustive grid oracle.

The deterministic solver sweeps a threshold down from an upper bound on the
optimum.  At each level it selects every basis direction whose gradient inner
product clears the threshold, advances all selected coordinates together by
the largest step that keeps a per-step gain test satisfied, and decays the
threshold when no direction qualifies or no admissible step remains.  The
stochastic variant replaces the gradient with a momentum-averaged estimate
built from noisy samples and widens the gain test by a variance envelope.

Accounting: a value query is one objective evaluation (one empirical batch
for the stochastic solver), a gradient query is one gradient evaluation (one
sample for the stochastic solver), and an adaptive round is one batch of
oracle work with no internal sequential dependency (a selection scan, a
step-size search whose probes are batchable, or an estimator refresh).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Tuple

import numpy as np

from .core import (
    RoundLimitError,
    Solution,
    SolverConfig,
    SolverError,
    SolverTrace,
    GridBudgetError,
    Vector,
    check_finite,
)
from .objectives import OssObjective, StochasticObjective
from .polytopes import Polytope, opt_bounds

GRID_POINT_BUDGET = 10_000_000

# lambda floor guard: treat thresholds below this fraction of the initial
# upper bound as numerically irrelevant even when the lower bound is zero
_LAMBDA_FLOOR_SCALE = 1e-12


def _lambda_floor(mu: float, lower: float, upper: float, polytope: Polytope) -> float:
    """Threshold level below which the outer loop stops.

    Selection compares per-direction inner products (per-unit-l1-mass
    quantities) against the threshold, while the optimum bounds live at
    total mass up to the max-l1 norm of the region, so the lower bound is
    rescaled by that mass before the ``exp(-mu)`` stopping margin is
    applied.  Rescaling only lowers the floor, i.e. only lengthens the run.
    """
    mass = max(1.0, float(polytope.max_l1_point.sum()))
    return math.exp(-mu) * max(lower / mass, _LAMBDA_FLOOR_SCALE * upper)


@dataclass(frozen=True)
class DirectionSet:
    """Basis indices selected at one threshold level."""

    members: np.ndarray
    threshold: float
    round_index: int


@dataclass(frozen=True)
class GradientEstimate:
    """Momentum-averaged gradient estimate for the stochastic solver."""

    d: Vector
    t_last: float
    rho_last: float


def initial_gradient_estimate(dimension: int) -> GradientEstimate:
    return GradientEstimate(d=np.zeros(dimension), t_last=0.0, rho_last=0.0)


def momentum_weight(t: float) -> float:
    """Averaging weight ``(4 / (t + 8)) ** (2/3)``; lies in (0, 1] for t >= 0."""
    return (4.0 / (t + 8.0)) ** (2.0 / 3.0)


def update_gradient_estimate(estimate: GradientEstimate, sample, t: float) -> GradientEstimate:
    """One momentum update ``d <- (1 - rho_t) d + rho_t * sample``."""
    if t < 0.0:
        raise ValueError(f"t must be nonnegative, got {t}")
    rho = momentum_weight(t)
    sample = np.asarray(sample, dtype=float)
    d = (1.0 - rho) * estimate.d + rho * sample
    return GradientEstimate(d=d, t_last=float(t), rho_last=rho)


def kappa_envelope(
    t: float, theta: float, lipschitz: float, diameter: float, grad_gap_sq: float = 0.0
) -> float:
    """Variance-decay envelope for the estimate's mean squared error.

    ``max(5 * grad_gap_sq, 16 theta^2 + 2 L^2 D^2) / (t + 9)^(2/3)`` where
    ``grad_gap_sq`` is the squared initial gap ``||grad F(x0) - d0||^2`` when
    known.  Solvers use the configured-constants branch only; tests with
    ground-truth access may supply the gap.
    """
    numerator = max(5.0 * grad_gap_sq, 16.0 * theta**2 + 2.0 * (lipschitz**2) * (diameter**2))
    return numerator / (t + 9.0) ** (2.0 / 3.0)


def select_directions(
    gradient,
    basis: np.ndarray,
    lam: float,
    cfg: SolverConfig,
    trace: Optional[SolverTrace] = None,
    candidates: Optional[np.ndarray] = None,
    round_index: int = 0,
) -> DirectionSet:
    """All basis directions whose inner product clears ``(1-eps) * mu * lam``.

    The inner products form one batched scan with no cross-dependency, so a
    call counts exactly one adaptive round on the trace.  ``candidates``
    optionally restricts selection to directions that can still move.
    """
    g = np.asarray(gradient, dtype=float)
    scores = basis @ g
    cutoff = (1.0 - cfg.epsilon) * cfg.mu * lam - cfg.value_tol
    mask = scores >= cutoff
    if candidates is not None:
        mask &= candidates
    if trace is not None:
        trace.adaptive_rounds += 1
    return DirectionSet(members=np.flatnonzero(mask), threshold=float(lam), round_index=round_index)


def _feasible_cap(polytope: Optional[Polytope], x: Vector, v: Vector, cap: float, cfg: SolverConfig) -> float:
    """Largest step along ``v`` from ``x`` that stays inside the region, up to ``cap``.

    Membership tests are closed-form, so the bisection costs no oracle work.
    """
    if polytope is None or polytope.contains(x + cap * v, cfg.value_tol):
        return cap
    lo, hi = 0.0, cap
    while hi - lo > cfg.delta_tol:
        mid = 0.5 * (lo + hi)
        if polytope.contains(x + mid * v, cfg.value_tol):
            lo = mid
        else:
            hi = mid
    return lo


def _line_search(
    evaluate: Callable[[np.ndarray], float],
    fx: float,
    x: Vector,
    v: Vector,
    rate: float,
    cap: float,
    polytope: Optional[Polytope],
    cfg: SolverConfig,
    trace: Optional[SolverTrace],
) -> Tuple[float, Optional[float]]:
    """Largest step in [delta_tol, cap] whose gain beats ``rate * delta``.

    Probes the cap first (so flat gain tests return the cap exactly), then
    doubles from delta_tol and bisects to delta_tol resolution.  Returns
    (0, None) when even delta_tol fails, signalling a stale direction set.
    All probes of one search are batchable, so the search counts one
    adaptive round.
    """
    if cap < cfg.delta_tol:
        return 0.0, None
    cap = _feasible_cap(polytope, x, v, cap, cfg)
    if cap < cfg.delta_tol:
        return 0.0, None

    slack = cfg.value_tol * (1.0 + abs(fx))
    probes = 0

    def probe(delta: float) -> float:
        nonlocal probes
        probes += 1
        return evaluate(x + delta * v)

    def passes(delta: float, f_at: float) -> bool:
        return f_at - fx >= rate * delta - slack

    try:
        f_cap = probe(cap)
        if passes(cap, f_cap):
            return cap, f_cap
        f_lo = probe(cfg.delta_tol)
        if not passes(cfg.delta_tol, f_lo):
            return 0.0, None
        lo, f_best = cfg.delta_tol, f_lo
        hi = cap
        d = cfg.delta_tol
        while 2.0 * d < hi:
            d = 2.0 * d
            f_d = probe(d)
            if passes(d, f_d):
                lo, f_best = d, f_d
            else:
                hi = d
                break
        while hi - lo > cfg.delta_tol:
            mid = 0.5 * (lo + hi)
            f_mid = probe(mid)
            if passes(mid, f_mid):
                lo, f_best = mid, f_mid
            else:
                hi = mid
        return lo, f_best
    finally:
        if trace is not None and probes > 0:
            trace.adaptive_rounds += 1


def _step_cap(cfg: SolverConfig, dimension: int, fill: float, quadratic_mu: bool = False) -> float:
    """Per-step cap: min(1/(n*eta), 1/(mu^p (1-eps)), headroom to the unit box)."""
    mu = cfg.mu
    terms = [1.0 - fill]
    if cfg.eta > 0.0:
        terms.append(1.0 / (dimension * cfg.eta))
    power = 2.0 if quadratic_mu else 1.0
    terms.append(1.0 / (mu**power * (1.0 - cfg.epsilon)))
    return min(terms)


def choose_step_size(
    obj: OssObjective,
    x,
    members,
    lam: float,
    t: float,
    cfg: SolverConfig,
    polytope: Optional[Polytope] = None,
    basis: Optional[np.ndarray] = None,
    trace: Optional[SolverTrace] = None,
) -> float:
    """Largest admissible step size for the selected directions.

    The candidate range is [delta_tol, cap] with
    ``cap = min(1/(n*eta), 1/(mu*(1-eps)), 1 - t)``, shrunk further by
    region membership along the summed direction.  Within the range the
    accepted step is the largest whose objective gain is at least
    ``mu * (1-eps)^2 * delta * lam``.  Returns 0 when no step of at least
    delta_tol qualifies.
    """
    x = np.asarray(x, dtype=float)
    members = np.asarray(members, dtype=int)
    if members.size == 0:
        return 0.0
    if basis is None:
        basis = np.eye(len(x))
    v = basis[members].sum(axis=0)
    rate = cfg.mu * (1.0 - cfg.epsilon) ** 2 * lam
    cap = _step_cap(cfg, len(x), t)

    def evaluate(point):
        if trace is not None:
            trace.value_queries += 1
        return obj.value(point)

    fx = evaluate(x)
    delta, _ = _line_search(evaluate, fx, x, v, rate, cap, polytope, cfg, trace)
    return delta


def _movable_mask(polytope: Polytope, x: Vector, cfg: SolverConfig) -> np.ndarray:
    """Directions that can still take a delta_tol step inside the region."""
    probes = x[None, :] + cfg.delta_tol * polytope.basis
    return polytope.contains_many(probes, cfg.value_tol)


def parallel_greedy(
    obj: OssObjective,
    polytope: Polytope,
    cfg: SolverConfig,
    selection_log: Optional[list] = None,
) -> Solution:
    """Deterministic jump-started threshold greedy.

    Starts from ``alpha`` times the region's max-l1 point, initializes the
    threshold at the optimum's upper bound, and stops when every coordinate
    is saturated or the threshold falls below ``exp(-mu)`` times the lower
    bound.  Raises RoundLimitError if the outer loop exceeds its safety cap,
    and SolverError on empty bases or non-finite oracle output.

    ``selection_log``, when given, collects ``(lam, gradient, candidates,
    members)`` tuples for selection replay.
    """
    n = polytope.dimension
    if obj.dimension != n:
        raise SolverError(f"objective dimension {obj.dimension} != polytope dimension {n}")
    basis = polytope.basis
    if basis.shape[0] == 0:
        raise SolverError("polytope supplies no basis directions")
    mu = cfg.mu
    trace = SolverTrace()

    def value(point) -> float:
        trace.value_queries += 1
        return obj.value(point)

    def gradient(point) -> Vector:
        trace.gradient_queries += 1
        return obj.gradient(point)

    x = np.minimum(cfg.alpha * polytope.max_l1_point, 1.0)
    t = cfg.alpha
    lower, upper = opt_bounds(obj, polytope, trace=trace)
    fx = value(x)
    lam = upper
    trace.record(t, lam, 0.0, 0, fx)
    if upper <= cfg.value_tol:
        # objective is flat at the top of the box; nothing to gain
        return Solution(x=x, value=fx, trace=trace, lambda_final=lam, t_final=t)

    floor = _lambda_floor(mu, lower, upper, polytope)
    movable = _movable_mask(polytope, x, cfg)
    g = gradient(x)
    round_index = 0

    while lam >= floor and movable.any():
        trace.outer_rounds += 1
        if trace.outer_rounds > cfg.max_outer_rounds:
            raise RoundLimitError(
                f"outer threshold loop exceeded {cfg.max_outer_rounds} rounds"
            )
        selected = select_directions(
            g, basis, lam, cfg, trace=trace, candidates=movable, round_index=round_index
        )
        round_index += 1
        if selection_log is not None:
            selection_log.append((lam, g.copy(), movable.copy(), selected.members.copy()))
        while selected.members.size:
            v = basis[selected.members].sum(axis=0)
            fill = float(x[selected.members].max())
            cap = _step_cap(cfg, n, fill)
            rate = mu * (1.0 - cfg.epsilon) ** 2 * lam
            delta, f_new = _line_search(value, fx, x, v, rate, cap, polytope, cfg, trace)
            if delta <= 0.0:
                break  # stale set at this threshold
            x = np.minimum(x + delta * v, 1.0)
            t = float(x.max())
            fx = f_new if f_new is not None else value(x)
            trace.inner_rounds += 1
            trace.record(t, lam, delta, selected.members.size, fx)
            movable = _movable_mask(polytope, x, cfg)
            if not movable.any():
                break
            g = gradient(x)
            selected = select_directions(
                g, basis, lam, cfg, trace=trace, candidates=movable, round_index=round_index
            )
            round_index += 1
            if selection_log is not None:
                selection_log.append((lam, g.copy(), movable.copy(), selected.members.copy()))
        lam *= 1.0 - cfg.epsilon

    return Solution(x=x, value=fx, trace=trace, lambda_final=lam, t_final=t)


def stochastic_parallel_greedy(
    sobj: StochasticObjective,
    polytope: Polytope,
    cfg: SolverConfig,
    selection_log: Optional[list] = None,
) -> Solution:
    """Threshold greedy under sample access to values and gradients.

    Starts from zero with a zero gradient estimate, refreshes the estimate
    with one sample before the first selection (a zero estimate selects
    nothing) and after every accepted step, and widens the per-step gain
    requirement by ``sqrt(kappa) * rank / mu`` where ``kappa`` is the
    variance envelope from the configured constants.  Objective values in
    the gain test are empirical means of ``spg_batch`` fresh samples.

    Reported values and history snapshots read the wrapped ground truth for
    monitoring; the solver's decisions never touch it.
    """
    n = sobj.dimension
    if polytope.dimension != n:
        raise SolverError(f"objective dimension {n} != polytope dimension {polytope.dimension}")
    basis = polytope.basis
    if basis.shape[0] == 0:
        raise SolverError("polytope supplies no basis directions")
    mu = cfg.mu
    trace = SolverTrace()

    def empirical(point) -> float:
        trace.value_queries += 1
        v = sobj.empirical_value(point, cfg.spg_batch)
        if not math.isfinite(v):
            raise SolverError("empirical value is non-finite")
        return v

    def refresh(estimate: GradientEstimate, point, at_t: float) -> GradientEstimate:
        trace.gradient_queries += 1
        trace.adaptive_rounds += 1
        sample = check_finite(sobj.sample_gradient(point), "stochastic gradient sample")
        return update_gradient_estimate(estimate, sample, at_t)

    x = np.zeros(n)
    t = 0.0
    seen = {}
    for point in (polytope.max_l1_point, np.ones(n), polytope.bounding_point):
        key = point.tobytes()
        if key not in seen:
            seen[key] = empirical(point)
    lower = seen[polytope.max_l1_point.tobytes()]
    upper = min(seen[np.ones(n).tobytes()], seen[polytope.bounding_point.tobytes()])

    truth = sobj.ground_truth
    f_true = truth.value(x)
    lam = upper
    trace.record(t, lam, 0.0, 0, f_true)
    if upper <= cfg.value_tol:
        return Solution(x=x, value=f_true, trace=trace, lambda_final=lam, t_final=t)

    kap_num = 16.0 * cfg.noise_theta**2 + 2.0 * (cfg.lipschitz_L**2) * (cfg.diameter_D**2)
    if not math.isfinite(kap_num):
        raise SolverError("variance envelope is non-finite; check L, D, theta")
    floor = _lambda_floor(mu, lower, upper, polytope)
    estimate = refresh(initial_gradient_estimate(n), x, t)
    movable = _movable_mask(polytope, x, cfg)
    round_index = 0

    while lam >= floor and movable.any():
        trace.outer_rounds += 1
        if trace.outer_rounds > cfg.max_outer_rounds:
            raise RoundLimitError(
                f"outer threshold loop exceeded {cfg.max_outer_rounds} rounds"
            )
        selected = select_directions(
            estimate.d, basis, lam, cfg, trace=trace, candidates=movable, round_index=round_index
        )
        round_index += 1
        if selection_log is not None:
            selection_log.append((lam, estimate.d.copy(), movable.copy(), selected.members.copy()))
        while selected.members.size:
            v = basis[selected.members].sum(axis=0)
            fill = float(x[selected.members].max())
            cap = _step_cap(cfg, n, fill, quadratic_mu=True)
            kappa = kap_num / (t + 9.0) ** (2.0 / 3.0)
            rate = mu * (1.0 - cfg.epsilon) ** 2 * (lam + math.sqrt(kappa) * polytope.rank / mu)
            fx = empirical(x)
            delta, _ = _line_search(empirical, fx, x, v, rate, cap, polytope, cfg, trace)
            if delta <= 0.0:
                break
            x = np.minimum(x + delta * v, 1.0)
            estimate = refresh(estimate, x, t)  # weight uses the pre-step clock
            t = float(x.max())
            f_true = truth.value(x)
            trace.inner_rounds += 1
            trace.record(t, lam, delta, selected.members.size, f_true)
            movable = _movable_mask(polytope, x, cfg)
            if not movable.any():
                break
            selected = select_directions(
                estimate.d, basis, lam, cfg, trace=trace, candidates=movable, round_index=round_index
            )
            round_index += 1
            if selection_log is not None:
                selection_log.append(
                    (lam, estimate.d.copy(), movable.copy(), selected.members.copy())
                )
        lam *= 1.0 - cfg.epsilon

    return Solution(x=x, value=truth.value(x), trace=trace, lambda_final=lam, t_final=t)


def serial_greedy(obj: OssObjective, polytope: Polytope, cfg: SolverConfig) -> Solution:
    """Single-direction ascent with the fixed conservative step ``eps / n``.

    Picks the best movable basis direction each step.  Every step is its own
    oracle phase, so the adaptive-round count grows with the step count;
    this is the baseline the parallel solver's adaptivity is measured
    against, not a solver with guarantees.
    """
    n = polytope.dimension
    if obj.dimension != n:
        raise SolverError(f"objective dimension {obj.dimension} != polytope dimension {n}")
    basis = polytope.basis
    if basis.shape[0] == 0:
        raise SolverError("polytope supplies no basis directions")
    trace = SolverTrace()

    x = np.minimum(cfg.alpha * polytope.max_l1_point, 1.0)
    mass_scale = float(polytope.max_l1_point.sum())
    if mass_scale <= 0.0:
        raise SolverError("max-l1 point has zero mass")
    step = cfg.epsilon / n

    trace.value_queries += 1
    fx = obj.value(x)
    t = float(x.sum()) / mass_scale
    trace.record(t, 0.0, 0.0, 0, fx)

    step_limit = 4 * math.ceil(n * mass_scale / step) + 16 * n
    for _ in range(step_limit):
        movable = _movable_mask(polytope, x, cfg)
        if not movable.any():
            break
        trace.gradient_queries += 1
        trace.adaptive_rounds += 1
        g = obj.gradient(x)
        scores = np.where(movable, basis @ g, -np.inf)
        best = int(np.argmax(scores))
        if scores[best] <= cfg.value_tol:
            break  # no ascent direction left
        v = basis[best]
        delta = _feasible_cap(polytope, x, v, min(step, 1.0 - float(x[best])), cfg)
        if delta < cfg.delta_tol:
            break
        x = np.minimum(x + delta * v, 1.0)
        trace.value_queries += 1
        fx = obj.value(x)
        t = float(x.sum()) / mass_scale
        trace.inner_rounds += 1
        trace.record(t, 0.0, delta, 1, fx)
    else:
        raise SolverError("serial baseline failed to terminate within its step limit")

    return Solution(x=x, value=fx, trace=trace, lambda_final=0.0, t_final=t)


def grid_maximum(obj: OssObjective, polytope: Polytope, resolution: int) -> float:
    """Exhaustive maximum of the objective over the feasible grid.

    Enumerates the lattice with spacing ``1/resolution`` inside the unit box,
    keeps the feasible points, and returns the best objective value.  The
    value is a certified lower bound on the optimum; for smooth objectives
    with bounded gradients the gap is at most ``n * max|grad| / resolution``.

    Raises GridBudgetError when the lattice would exceed the point budget
    or the dimension exceeds 8.
    """
    n = polytope.dimension
    if obj.dimension != n:
        raise ValueError(f"objective dimension {obj.dimension} != polytope dimension {n}")
    if resolution < 1:
        raise ValueError("resolution must be at least 1")
    if n > 8:
        raise GridBudgetError(f"grid oracle supports n <= 8, got {n}")
    per_axis = resolution + 1
    total = per_axis**n
    if total > GRID_POINT_BUDGET:
        raise GridBudgetError(f"grid of {total} points exceeds the budget of {GRID_POINT_BUDGET}")

    axis = np.linspace(0.0, 1.0, per_axis)
    if n == 1:
        points = axis[:, None]
        feasible = polytope.contains_many(points)
        if not feasible.any():
            raise SolverError("no feasible grid points")
        return float(obj.value_many(points[feasible]).max())

    tail = np.stack(np.meshgrid(*([axis] * (n - 1)), indexing="ij"), axis=-1).reshape(-1, n - 1)
    best = -math.inf
    block = np.empty((len(tail), n))
    for head in axis:
        block[:, 0] = head
        block[:, 1:] = tail
        feasible = polytope.contains_many(block)
        if feasible.any():
            best = max(best, float(obj.value_many(block[feasible]).max()))
    if not math.isfinite(best):
        raise SolverError("no feasible grid points")
    return best

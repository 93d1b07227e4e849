"""Objective oracles, instance generators, and property verifiers.

Two concrete families are shipped:

* ``QuadraticSemiMetricObjective`` -- ``F(x) = x'Mx/2 + b'x`` with a
  nonnegative symmetric semi-metric matrix ``M``; one-sided smooth with the
  matrix's semi-metric parameter.
* ``CoverageMultilinearObjective`` -- the multilinear extension of a weighted
  coverage set function, evaluated in closed form; all mixed second partials
  are nonpositive, so it is one-sided 0-smooth.

``StochasticObjective`` wraps a deterministic oracle and serves noisy value
and gradient samples for the stochastic solver.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Tuple

import numpy as np

from .core import SolverError, Vector, check_finite

FD_STEP = 1e-4  # central-difference step for the Hessian fallback


class _CallCounter:
    """Contention-safe tally of oracle invocations."""

    __slots__ = ("_lock", "count")

    def __init__(self):
        self._lock = threading.Lock()
        self.count = 0

    def bump(self, k: int = 1) -> None:
        with self._lock:
            self.count += k

    def reset(self) -> None:
        with self._lock:
            self.count = 0


class OssObjective:
    """Deterministic first-order oracle with invocation counting.

    Wraps a value function, a gradient function, and optionally an exact
    Hessian quadratic form ``(x, u) -> u' H(x) u``.  When the quadratic form
    is absent it falls back to a central second difference along ``u``; the
    fallback is meant for verification, not for solver hot paths.
    """

    def __init__(
        self,
        dimension: int,
        value_fn: Callable[[np.ndarray], float],
        gradient_fn: Callable[[np.ndarray], np.ndarray],
        hessian_quadratic_fn: Optional[Callable[[np.ndarray, np.ndarray], float]] = None,
        sigma_claimed: float = 0.0,
        label: str = "objective",
    ):
        if dimension < 1:
            raise ValueError(f"dimension must be at least 1, got {dimension}")
        if sigma_claimed < 0.0:
            raise ValueError("sigma_claimed must be nonnegative")
        self.dimension = int(dimension)
        self.sigma_claimed = float(sigma_claimed)
        self.label = label
        self._value_fn = value_fn
        self._gradient_fn = gradient_fn
        self._hessian_fn = hessian_quadratic_fn
        self._value_calls = _CallCounter()
        self._gradient_calls = _CallCounter()

    @property
    def value_calls(self) -> int:
        return self._value_calls.count

    @property
    def gradient_calls(self) -> int:
        return self._gradient_calls.count

    def reset_counters(self) -> None:
        self._value_calls.reset()
        self._gradient_calls.reset()

    def _coerce(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.shape != (self.dimension,):
            raise ValueError(f"expected a vector of length {self.dimension}, got shape {x.shape}")
        return x

    def value(self, x) -> float:
        x = self._coerce(x)
        self._value_calls.bump()
        v = float(self._value_fn(x))
        if not math.isfinite(v):
            raise SolverError(f"{self.label}: value oracle returned {v}")
        return v

    def gradient(self, x) -> Vector:
        x = self._coerce(x)
        self._gradient_calls.bump()
        g = np.asarray(self._gradient_fn(x), dtype=float)
        if g.shape != (self.dimension,):
            raise SolverError(f"{self.label}: gradient oracle returned shape {g.shape}")
        return check_finite(g, f"{self.label}: gradient oracle")

    def hessian_quadratic_form(self, x, u) -> float:
        x = self._coerce(x)
        u = self._coerce(u)
        if self._hessian_fn is not None:
            return float(self._hessian_fn(x, u))
        h = FD_STEP
        return (self.value(x + h * u) - 2.0 * self.value(x) + self.value(x - h * u)) / (h * h)

    def value_many(self, X) -> np.ndarray:
        """Vectorized batch evaluation; counts one invocation per row."""
        X = np.asarray(X, dtype=float)
        self._value_calls.bump(len(X))
        return np.array([float(self._value_fn(row)) for row in X])


class QuadraticSemiMetricObjective(OssObjective):
    """``F(x) = x'Mx/2 + b'x`` for a nonnegative symmetric matrix ``M``.

    The gradient is ``Mx + b`` and the Hessian quadratic form is ``u'Mu``
    exactly.  With ``M`` a sigma-semi-metric (``M[i,j] <= sigma * (M[i,k] +
    M[k,j])`` for distinct triples) the objective is one-sided sigma-smooth;
    pairwise distances of points in a metric space give ``sigma = 1``.
    """

    def __init__(self, M, b, sigma: float = 1.0, label: str = "quadratic-semimetric"):
        M = np.asarray(M, dtype=float)
        b = np.asarray(b, dtype=float)
        if M.ndim != 2 or M.shape[0] != M.shape[1]:
            raise ValueError("M must be a square matrix")
        n = M.shape[0]
        if b.shape != (n,):
            raise ValueError(f"b must have length {n}, got shape {b.shape}")
        if not np.allclose(M, M.T):
            raise ValueError("M must be symmetric")
        if np.any(M < 0.0) or np.any(b < 0.0):
            raise ValueError("M and b must be nonnegative")
        self.M = M.copy()
        self.b = b.copy()
        super().__init__(
            n,
            value_fn=lambda x: 0.5 * float(x @ self.M @ x) + float(self.b @ x),
            gradient_fn=lambda x: self.M @ x + self.b,
            hessian_quadratic_fn=lambda x, u: float(u @ self.M @ u),
            sigma_claimed=sigma,
            label=label,
        )

    def value_many(self, X):
        X = np.asarray(X, dtype=float)
        self._value_calls.bump(len(X))
        return 0.5 * np.einsum("ij,jk,ik->i", X, self.M, X) + X @ self.b


class CoverageMultilinearObjective(OssObjective):
    """Multilinear extension of weighted coverage, in closed form.

    ``F(x) = sum_e w_e * (1 - prod_{i covers e} (1 - x_i))`` equals the
    expected covered weight when coordinate ``i`` is rounded to 1
    independently with probability ``x_i``.  Mixed second partials are
    nonpositive, so ``sigma_claimed`` is 0.
    """

    def __init__(self, weights, covers: Sequence[Sequence[int]], label: str = "coverage"):
        weights = np.asarray(weights, dtype=float)
        if weights.ndim != 1 or len(weights) < 1:
            raise ValueError("weights must be a nonempty vector")
        if np.any(weights < 0.0):
            raise ValueError("weights must be nonnegative")
        n = len(covers)
        if n < 1:
            raise ValueError("at least one coordinate is required")
        m = len(weights)
        incidence = np.zeros((m, n), dtype=bool)
        for i, elements in enumerate(covers):
            for e in elements:
                if not 0 <= int(e) < m:
                    raise ValueError(f"coordinate {i} covers unknown element {e}")
                incidence[int(e), i] = True
        self.weights = weights.copy()
        self.covers = [tuple(sorted(int(e) for e in elements)) for elements in covers]
        self.incidence = incidence
        super().__init__(
            n,
            value_fn=self._value_impl,
            gradient_fn=self._gradient_impl,
            hessian_quadratic_fn=self._quad_impl,
            sigma_claimed=0.0,
            label=label,
        )

    def _survival(self, x) -> np.ndarray:
        # probability each element stays uncovered
        return np.prod(np.where(self.incidence, 1.0 - x, 1.0), axis=1)

    def _value_impl(self, x) -> float:
        return float(self.weights @ (1.0 - self._survival(x)))

    def _gradient_impl(self, x) -> np.ndarray:
        base = np.where(self.incidence, 1.0 - x, 1.0)
        grad = np.zeros(self.dimension)
        for i in range(self.dimension):
            rows = self.incidence[:, i]
            if not rows.any():
                continue
            sub = base[rows].copy()
            sub[:, i] = 1.0
            grad[i] = float(self.weights[rows] @ np.prod(sub, axis=1))
        return grad

    def _quad_impl(self, x, u) -> float:
        # diagonal Hessian entries vanish (the extension is multilinear)
        base = np.where(self.incidence, 1.0 - x, 1.0)
        total = 0.0
        for i in range(self.dimension):
            rows_i = self.incidence[:, i]
            if not rows_i.any():
                continue
            for j in range(i + 1, self.dimension):
                rows = rows_i & self.incidence[:, j]
                if not rows.any():
                    continue
                sub = base[rows].copy()
                sub[:, i] = 1.0
                sub[:, j] = 1.0
                total -= 2.0 * u[i] * u[j] * float(self.weights[rows] @ np.prod(sub, axis=1))
        return total

    def value_many(self, X):
        X = np.asarray(X, dtype=float)
        self._value_calls.bump(len(X))
        out = np.empty(len(X))
        chunk = max(1, 8_000_000 // (self.incidence.size or 1))
        for start in range(0, len(X), chunk):
            block = X[start : start + chunk]
            survival = np.prod(
                np.where(self.incidence[None, :, :], 1.0 - block[:, None, :], 1.0), axis=2
            )
            out[start : start + chunk] = (1.0 - survival) @ self.weights
        return out


def make_semimetric_instance(points, b) -> QuadraticSemiMetricObjective:
    """Quadratic objective from pairwise distances of ``points``.

    ``M[i, j]`` is the Euclidean distance between point ``i`` and point ``j``;
    the triangle inequality makes ``M`` a 1-semi-metric, so the returned
    objective claims ``sigma = 1``.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1:
        pts = pts[:, None]
    if pts.ndim != 2 or pts.shape[0] < 2:
        raise ValueError("at least two points are required")
    b = np.asarray(b, dtype=float)
    if b.shape != (pts.shape[0],):
        raise ValueError(f"b must have length {pts.shape[0]}, got shape {b.shape}")
    M = np.linalg.norm(pts[:, None, :] - pts[None, :, :], axis=-1)
    return QuadraticSemiMetricObjective(M, b, sigma=1.0)


def make_coverage_instance(
    n: int,
    m: int,
    density: float = 0.4,
    weight_range: Tuple[float, float] = (0.5, 1.5),
    seed: Optional[int] = None,
) -> CoverageMultilinearObjective:
    """Random coverage instance: each coordinate covers each element with
    probability ``density``; elements left uncovered are resampled."""
    if n < 1 or m < 1:
        raise ValueError("n and m must be at least 1")
    if not 0.0 < density <= 1.0:
        raise ValueError(f"density must lie in (0, 1], got {density}")
    lo, hi = weight_range
    if lo < 0.0 or hi < lo:
        raise ValueError(f"invalid weight range {weight_range}")
    rng = np.random.default_rng(seed)
    incidence = rng.random((m, n)) < density
    for e in range(m):
        while not incidence[e].any():
            incidence[e] = rng.random(n) < density
    weights = rng.uniform(lo, hi, size=m)
    covers = [np.flatnonzero(incidence[:, i]).tolist() for i in range(n)]
    return CoverageMultilinearObjective(weights, covers)


def random_semimetric_instance(
    n: int,
    seed: Optional[int] = None,
    point_dim: int = 2,
    b_range: Tuple[float, float] = (0.25, 1.0),
) -> QuadraticSemiMetricObjective:
    """Distance-matrix quadratic from ``n`` random points in the unit cube."""
    if n < 2:
        raise ValueError("n must be at least 2")
    rng = np.random.default_rng(seed)
    points = rng.random((n, point_dim))
    b = rng.uniform(b_range[0], b_range[1], size=n)
    return make_semimetric_instance(points, b)


class StochasticObjective:
    """Noisy sample access ``f(x, y)`` to a hidden objective ``F``.

    Wraps a deterministic ground-truth oracle.  Gradient samples are
    ``grad F(x)`` plus zero-mean per-coordinate noise with total variance
    ``theta**2``; value samples add zero-mean scalar noise of variance
    ``theta**2``.  The default noise is uniform, whose bounded support keeps
    the variance bound literal; Gaussian noise is available for contrast.
    Counters tally gradient samples and empirical-value batches so solver
    accounting can be audited.
    """

    def __init__(self, ground_truth: OssObjective, theta: float, seed=None, noise: str = "uniform"):
        if theta < 0.0:
            raise ValueError("theta must be nonnegative")
        if noise not in ("uniform", "gaussian"):
            raise ValueError(f"unknown noise model {noise!r}")
        self.ground_truth = ground_truth
        self.theta = float(theta)
        self.noise = noise
        self._seed_seq = np.random.SeedSequence(seed)
        self._rng = np.random.default_rng(self._seed_seq)
        self._spawned = 0
        self._gradient_samples = _CallCounter()
        self._value_batches = _CallCounter()

    @property
    def dimension(self) -> int:
        return self.ground_truth.dimension

    @property
    def gradient_sample_calls(self) -> int:
        return self._gradient_samples.count

    @property
    def value_batch_calls(self) -> int:
        return self._value_batches.count

    def reset_counters(self) -> None:
        self._gradient_samples.reset()
        self._value_batches.reset()

    def spawn(self) -> "StochasticObjective":
        """Independent stream over the same ground truth, for concurrent callers."""
        self._spawned += 1
        child = StochasticObjective(self.ground_truth, self.theta, noise=self.noise)
        child._seed_seq = self._seed_seq.spawn(1)[0]
        child._rng = np.random.default_rng(child._seed_seq)
        return child

    def _gradient_noise(self, n: int) -> np.ndarray:
        if self.theta == 0.0:
            return np.zeros(n)
        if self.noise == "uniform":
            half_width = self.theta * math.sqrt(3.0 / n)
            return self._rng.uniform(-half_width, half_width, size=n)
        return self._rng.normal(0.0, self.theta / math.sqrt(n), size=n)

    def sample_gradient(self, x) -> Vector:
        """One noisy gradient sample; counts one gradient query."""
        self._gradient_samples.bump()
        g = self.ground_truth.gradient(x)
        return g + self._gradient_noise(len(g))

    def empirical_value(self, x, n_samples: int) -> float:
        """Mean of ``n_samples`` value samples; counts one batch query."""
        if n_samples < 1:
            raise ValueError("n_samples must be at least 1")
        self._value_batches.bump()
        base = self.ground_truth.value(x)
        if self.theta == 0.0:
            return base
        if self.noise == "uniform":
            draws = self._rng.uniform(-self.theta * math.sqrt(3.0), self.theta * math.sqrt(3.0), size=n_samples)
        else:
            draws = self._rng.normal(0.0, self.theta, size=n_samples)
        return base + float(draws.mean())


def sample_stoch_gradient(sobj: StochasticObjective, x) -> Vector:
    """One gradient sample from the stochastic oracle (counts one query)."""
    return sobj.sample_gradient(x)


@dataclass(frozen=True)
class VerificationReport:
    """Outcome of a sampled inequality check."""

    passed: bool
    worst_violation: float
    witness: Optional[tuple]
    trials: int
    checked: str = ""

    def summary(self) -> str:
        status = "pass" if self.passed else "FAIL"
        return f"{self.checked or 'check'}: {status} (worst violation {self.worst_violation:.3e}, {self.trials} trials)"


def verify_oss(
    obj: OssObjective,
    sigma: float,
    trials: int = 1000,
    seed: Optional[int] = None,
    value_tol: float = 1e-9,
) -> VerificationReport:
    """Sampled check of the one-sided smoothness inequality.

    Samples ``x`` uniformly from (0,1]^n (resampling while ``||x||_1 < 1e-6``,
    since the inequality divides by it) and ``u`` from [0,1]^n, then requires
    ``u'H(x)u <= sigma * (2 ||u||_1 / ||x||_1) * u' grad F(x)`` within
    relative slack at every sample.
    """
    if trials < 1:
        raise ValueError("trials must be at least 1")
    if sigma < 0.0:
        raise ValueError("sigma must be nonnegative")
    rng = np.random.default_rng(seed)
    n = obj.dimension
    worst = -math.inf
    witness = None
    passed = True
    for _ in range(trials):
        x = rng.uniform(size=n)
        while x.sum() < 1e-6:
            x = rng.uniform(size=n)
        u = rng.uniform(size=n)
        lhs = obj.hessian_quadratic_form(x, u)
        rhs = sigma * (2.0 * u.sum() / x.sum()) * float(u @ obj.gradient(x))
        violation = lhs - rhs
        if violation > worst:
            worst = violation
            witness = (x.copy(), u.copy())
        if lhs > rhs + value_tol * (1.0 + abs(rhs)):
            passed = False
    return VerificationReport(passed, worst, witness, trials, checked=f"one-sided {sigma:g}-smooth")


def verify_eta_local(
    obj: OssObjective,
    eta: float,
    trials: int = 1000,
    seed: Optional[int] = None,
    value_tol: float = 1e-9,
) -> VerificationReport:
    """Sampled check of gradient locality along feasible rays.

    Samples feasible ``(x, u, eps)`` with ``x + eps * u`` inside the unit box
    and requires ``u' grad F(x + eps u) >= (1 - eta * eps) * u' grad F(x)``
    within slack at every sample.
    """
    if trials < 1:
        raise ValueError("trials must be at least 1")
    if eta < 0.0:
        raise ValueError("eta must be nonnegative")
    rng = np.random.default_rng(seed)
    n = obj.dimension
    worst = -math.inf
    witness = None
    passed = True
    for _ in range(trials):
        x = rng.uniform(size=n)
        u = rng.uniform(size=n)
        moving = u > 1e-12
        if not moving.any():
            continue
        eps_max = float(np.min((1.0 - x[moving]) / u[moving]))
        eps_max = min(1.0, eps_max)
        if eps_max <= 0.0:
            continue
        eps = rng.uniform(0.0, eps_max)
        lhs = float(u @ obj.gradient(x + eps * u))
        rhs = (1.0 - eta * eps) * float(u @ obj.gradient(x))
        violation = rhs - lhs
        if violation > worst:
            worst = violation
            witness = (x.copy(), u.copy(), eps)
        if lhs < rhs - value_tol * (1.0 + abs(rhs)):
            passed = False
    return VerificationReport(passed, worst, witness, trials, checked=f"{eta:g}-local gradient")


@dataclass(frozen=True)
class SemiMetricReport:
    """Outcome of the exhaustive semi-metric triple check."""

    passed: bool
    worst_violation: float
    witness: Optional[Tuple[int, int, int]]

    def summary(self) -> str:
        status = "pass" if self.passed else "FAIL"
        where = f" at triple {self.witness}" if self.witness is not None and not self.passed else ""
        return f"semi-metric: {status} (worst violation {self.worst_violation:.3e}){where}"


def verify_semimetric(M, sigma: float, tol: float = 1e-9) -> SemiMetricReport:
    """Exhaustive check that ``M[i,j] <= sigma * (M[i,k] + M[k,j])``.

    Runs over all triples with ``k`` distinct from ``i`` and ``j`` (the
    degenerate ``k = i`` triple would force every positive entry to fail for
    ``sigma < 1``, which is not the intended reading of the bound).
    """
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError("M must be a square matrix")
    n = M.shape[0]
    if n < 3:
        return SemiMetricReport(True, -math.inf, None)
    # residual[i, j, k] = M[i, j] - sigma * (M[i, k] + M[k, j])
    residual = M[:, :, None] - sigma * (M[:, None, :] + M.T[None, :, :])
    idx = np.arange(n)
    residual[idx, :, idx] = -math.inf  # k == i
    residual[:, idx, idx] = -math.inf  # k == j
    flat = int(np.argmax(residual))
    i, j, k = np.unravel_index(flat, residual.shape)
    worst = float(residual[i, j, k])
    if worst > tol:
        return SemiMetricReport(False, worst, (int(i), int(j), int(k)))
    return SemiMetricReport(True, worst, None)

"""Feasible regions: box, cardinality, and ordered-coordinate polytopes.

Every polytope here is implicitly intersected with the unit box.  The basis
directions are the standard unit vectors of the coordinates that can increase
inside the region; feasibility of a tentative step is always re-checked with
the membership test, so the solvers never need a downward-closed region.
"""

from __future__ import annotations

from typing import Iterable, List, Tuple

import numpy as np

from .core import Vector

DEFAULT_MEMBERSHIP_TOL = 1e-9


class Polytope:
    """Base feasible region ``P ∩ [0,1]^n``.

    Subclasses override :meth:`_satisfies` / :meth:`_satisfies_many` with
    their defining inequalities and set ``max_l1_point`` (a feasible point of
    maximal l1 norm) plus ``bounding_point`` (a componentwise upper bound of
    the region, used for the optimal-value upper bound).
    """

    def __init__(self, dimension: int):
        if dimension < 1:
            raise ValueError(f"dimension must be at least 1, got {dimension}")
        self.dimension = int(dimension)
        self._basis = np.eye(self.dimension)
        self.max_l1_point: Vector = np.ones(self.dimension)
        self.bounding_point: Vector = np.ones(self.dimension)

    @property
    def basis(self) -> np.ndarray:
        """Basis directions, one unit vector per row; each row has l1 norm 1."""
        return self._basis

    @property
    def rank(self) -> int:
        return self._basis.shape[0]

    def contains(self, x, tol: float = DEFAULT_MEMBERSHIP_TOL) -> bool:
        x = np.asarray(x, dtype=float)
        if x.shape != (self.dimension,):
            raise ValueError(f"expected a vector of length {self.dimension}, got shape {x.shape}")
        if np.any(x < -tol) or np.any(x > 1.0 + tol):
            return False
        return self._satisfies(x, tol)

    def contains_many(self, X, tol: float = DEFAULT_MEMBERSHIP_TOL) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        if X.ndim != 2 or X.shape[1] != self.dimension:
            raise ValueError(f"expected an array of shape (*, {self.dimension})")
        ok = np.all((X >= -tol) & (X <= 1.0 + tol), axis=1)
        if ok.any():
            ok[ok] = self._satisfies_many(X[ok], tol)
        return ok

    def _satisfies(self, x: np.ndarray, tol: float) -> bool:
        return True

    def _satisfies_many(self, X: np.ndarray, tol: float) -> np.ndarray:
        return np.ones(len(X), dtype=bool)

    def describe(self) -> dict:
        raise NotImplementedError


class BoxPolytope(Polytope):
    """``{x : 0 <= x <= upper}`` with ``upper`` in (0, 1]^n."""

    def __init__(self, dimension: int, upper=1.0):
        super().__init__(dimension)
        upper = np.broadcast_to(np.asarray(upper, dtype=float), (dimension,)).copy()
        if np.any(upper <= 0.0) or np.any(upper > 1.0):
            raise ValueError("box upper bounds must lie in (0, 1]")
        self.upper = upper
        self.max_l1_point = upper.copy()
        self.bounding_point = upper.copy()

    def _satisfies(self, x, tol):
        return bool(np.all(x <= self.upper + tol))

    def _satisfies_many(self, X, tol):
        return np.all(X <= self.upper + tol, axis=1)

    def describe(self):
        return {"kind": "box", "upper": self.upper.tolist()}


class CardinalityPolytope(Polytope):
    """``{x in [0,1]^n : sum(x) <= budget}``."""

    def __init__(self, dimension: int, budget: float):
        super().__init__(dimension)
        if not 0 < budget <= dimension:
            raise ValueError(f"budget must lie in (0, {dimension}], got {budget}")
        self.budget = float(budget)
        point = np.zeros(dimension)
        whole = int(self.budget)
        point[:whole] = 1.0
        if whole < dimension:
            point[whole] = self.budget - whole
        self.max_l1_point = point
        self.bounding_point = np.ones(dimension)

    def _satisfies(self, x, tol):
        return bool(x.sum() <= self.budget + tol)

    def _satisfies_many(self, X, tol):
        return X.sum(axis=1) <= self.budget + tol

    def describe(self):
        return {"kind": "cardinality", "budget": self.budget}


class MonotoneLinearPolytope(Polytope):
    """``{x in [0,1]^n : x_i <= x_j for each ordered pair (i, j)}``.

    Not downward-closed: lowering a dominated coordinate below a dominating
    one leaves the region.  The all-ones point is always feasible, so it is
    both the max-l1 point and the bounding point.
    """

    def __init__(self, dimension: int, pairs: Iterable[Tuple[int, int]]):
        super().__init__(dimension)
        cleaned = []
        for i, j in pairs:
            i, j = int(i), int(j)
            if not (0 <= i < dimension and 0 <= j < dimension) or i == j:
                raise ValueError(f"invalid ordering pair ({i}, {j}) for dimension {dimension}")
            cleaned.append((i, j))
        if not cleaned:
            raise ValueError("at least one ordering pair is required")
        self.pairs = tuple(cleaned)
        self._lo = np.array([p[0] for p in self.pairs])
        self._hi = np.array([p[1] for p in self.pairs])

    def _satisfies(self, x, tol):
        return bool(np.all(x[self._lo] <= x[self._hi] + tol))

    def _satisfies_many(self, X, tol):
        return np.all(X[:, self._lo] <= X[:, self._hi] + tol, axis=1)

    def describe(self):
        return {"kind": "monotone-linear", "pairs": [list(p) for p in self.pairs]}


def basis_directions(polytope: Polytope) -> List[Vector]:
    """The stored basis directions in deterministic order."""
    return [row.copy() for row in polytope.basis]


def membership(polytope: Polytope, x, tol: float = DEFAULT_MEMBERSHIP_TOL) -> bool:
    """True iff ``x`` lies in the region within ``tol`` slack per inequality."""
    return polytope.contains(x, tol)


def opt_bounds(objective, polytope: Polytope, trace=None) -> Tuple[float, float]:
    """Bracket the optimum of a monotone normalized objective over the region.

    The lower bound evaluates the objective at the feasible max-l1 point.
    The upper bound evaluates it at the all-ones point and at the region's
    componentwise bounding point and takes the smaller; monotonicity makes
    both valid upper bounds.
    """
    points = [polytope.max_l1_point, np.ones(polytope.dimension), polytope.bounding_point]
    values = {}
    for p in points:
        key = p.tobytes()
        if key not in values:
            values[key] = objective.value(p)
            if trace is not None:
                trace.value_queries += 1
    lower = values[points[0].tobytes()]
    upper = min(values[points[1].tobytes()], values[points[2].tobytes()])
    return lower, upper

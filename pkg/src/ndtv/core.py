"""Point-set primitives: exact statistics and brute-force geometric oracles.

Everything downstream runs off three O(dn) quantities of a point set: the
centroid, the root-mean-square spread around it (``avg_price``, the square
root of the average 1-mean clustering cost), and a cheap diameter upper
bound (twice the farthest centroid distance, which overestimates the true
diameter by at most a factor of two).

The spread and the diameter are linked both ways:

    avg_price(P) <= diameter(P) / sqrt(2)        (tight for unit-basis sets)
    diameter(P)  <= diameter_upper(P) <= 2 * diameter(P)

The quadratic / iterative routines (``diameter_exact``, ``dist_to_hull``)
are oracles for verifiers and tests; no partitioning algorithm needs them
on its hot path.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

__all__ = [
    "DomainError",
    "PointSet",
    "PointSetStats",
    "Ball",
    "HullWitness",
    "HullDistance",
    "as_point_set",
    "centroid",
    "avg_price",
    "diameter_exact",
    "dist_to_hull",
]


class DomainError(ValueError):
    """An input violates a documented precondition."""


class PointSet:
    """Immutable set of ``n`` points in ``R^d`` with cached statistics.

    Parameters
    ----------
    points : array-like, shape (n, d)
        Coordinates, converted to a read-only float64 array.  Requires
        n >= 1, d >= 1 and finite entries; anything else raises
        :class:`DomainError`.
    """

    def __init__(self, points) -> None:
        pts = np.array(points, dtype=np.float64, copy=True)
        if pts.ndim != 2:
            raise DomainError(f"points must be a 2-d array, got shape {pts.shape}")
        n, d = pts.shape
        if n < 1:
            raise DomainError("point set must contain at least one point")
        if d < 1:
            raise DomainError("points must have dimension at least 1")
        if not np.all(np.isfinite(pts)):
            raise DomainError("coordinates must be finite (no NaN/inf)")
        pts.setflags(write=False)
        self._pts = pts

    @property
    def points(self) -> np.ndarray:
        """Read-only (n, d) coordinate array."""
        return self._pts

    @property
    def n(self) -> int:
        return self._pts.shape[0]

    @property
    def d(self) -> int:
        return self._pts.shape[1]

    @cached_property
    def centroid(self) -> np.ndarray:
        c = self._pts.mean(axis=0)
        c.setflags(write=False)
        return c

    @cached_property
    def avg_price(self) -> float:
        """sqrt(mean squared distance to the centroid).

        Computed by the two-pass formula (explicit centroid subtraction),
        which avoids the catastrophic cancellation the one-pass
        ``sum ||p||^2 - n ||c||^2`` form suffers for far-from-origin data.
        """
        diffs = self._pts - self.centroid
        return float(np.sqrt(np.einsum("ij,ij->i", diffs, diffs).mean()))

    @cached_property
    def diameter_upper(self) -> float:
        """2 * max_p ||p - centroid||: an O(dn) diameter overestimate.

        Always lies in [diameter, 2 * diameter]; it is the bound certificates
        quote when the exact diameter is too expensive to compute.
        """
        diffs = self._pts - self.centroid
        return 2.0 * float(np.sqrt(np.einsum("ij,ij->i", diffs, diffs).max()))

    def stats(self) -> "PointSetStats":
        return PointSetStats(
            centroid=self.centroid,
            avg_price=self.avg_price,
            diameter_upper=self.diameter_upper,
        )

    def __len__(self) -> int:
        return self.n

    def __repr__(self) -> str:
        return f"PointSet(n={self.n}, d={self.d})"


def as_point_set(obj) -> PointSet:
    """Coerce an array-like (or pass through a PointSet) with validation."""
    if isinstance(obj, PointSet):
        return obj
    return PointSet(obj)


@dataclass(frozen=True)
class PointSetStats:
    """Snapshot of the cached statistics of a :class:`PointSet`."""

    centroid: np.ndarray
    avg_price: float
    diameter_upper: float


@dataclass(frozen=True)
class Ball:
    """Closed ball: center vector plus a nonnegative radius."""

    center: np.ndarray
    radius: float

    def __post_init__(self):
        c = np.asarray(self.center, dtype=np.float64)
        if c.ndim != 1 or not np.all(np.isfinite(c)):
            raise DomainError("ball center must be a finite vector")
        if not (np.isfinite(self.radius) and self.radius >= 0.0):
            raise DomainError("ball radius must be finite and nonnegative")
        object.__setattr__(self, "center", c)
        object.__setattr__(self, "radius", float(self.radius))

    def contains(self, point, tol: float = 0.0) -> bool:
        return float(np.linalg.norm(np.asarray(point) - self.center)) <= self.radius + tol


@dataclass(frozen=True)
class HullWitness:
    """A convex combination certifying that a point lies in a group's hull.

    ``support`` holds global point indices, ``weights`` the matching convex
    coefficients (nonnegative, summing to 1), and ``point`` the induced
    combination when it has been materialised (certificates loaded from
    disk carry only support and weights; verifiers recompute the point).
    """

    support: np.ndarray
    weights: np.ndarray
    point: np.ndarray | None = None

    def combination(self, all_points: np.ndarray) -> np.ndarray:
        """Evaluate sum_i weights[i] * all_points[support[i]]."""
        return self.weights @ all_points[self.support]


def uniform_witness(indices: np.ndarray, all_points: np.ndarray) -> HullWitness:
    """Witness placing equal weight on every index (the subgroup centroid)."""
    idx = np.asarray(indices, dtype=np.int64)
    w = np.full(idx.size, 1.0 / idx.size)
    return HullWitness(support=idx, weights=w, point=w @ all_points[idx])


# ---------------------------------------------------------------------------
# module-level operations
# ---------------------------------------------------------------------------


def centroid(P) -> np.ndarray:
    """Mean of the points; rejects empty input."""
    return as_point_set(P).centroid


def avg_price(P) -> float:
    """Root-mean-square distance of the points to their centroid."""
    return as_point_set(P).avg_price


def diameter_exact(P, block_entries: int = 4_000_000) -> float:
    """Maximum pairwise distance, O(n^2 d) via blocked Gram products.

    Test/verifier oracle only.  ``block_entries`` caps the size of each
    intermediate distance block to bound memory.
    """
    ps = as_point_set(P)
    pts = ps.points
    n = ps.n
    if n == 1:
        return 0.0
    sq = np.einsum("ij,ij->i", pts, pts)
    rows = max(1, block_entries // n)
    best = 0.0
    for lo in range(0, n, rows):
        hi = min(n, lo + rows)
        d2 = sq[lo:hi, None] + sq[None, :] - 2.0 * (pts[lo:hi] @ pts.T)
        best = max(best, float(d2.max()))
    return math.sqrt(max(best, 0.0))


@dataclass(frozen=True)
class HullDistance:
    """Certified hull-distance answer.

    ``distance`` is an upper bound on dist(q, CH(group)) and
    ``lower_bound`` a matching lower bound; on convergence they differ by
    at most the requested tolerance.  ``witness`` realises ``distance``.
    """

    distance: float
    lower_bound: float
    witness: HullWitness
    converged: bool
    iterations: int


def dist_to_hull(q, group, tol: float | None = None, max_iter: int | None = None) -> HullDistance:
    """Distance from ``q`` to the convex hull of ``group``, with witness.

    Away-step-free Frank-Wolfe with exact line search.  The returned
    distance is within an additive ``tol`` of the true hull distance when
    ``converged`` is True; otherwise the best bounds found are reported.

    Parameters
    ----------
    q : array-like, shape (d,)
        Query point.
    group : PointSet or array-like, shape (m, d)
        Hull vertices (any spanning set works).
    tol : float, optional
        Additive distance tolerance.  Default ``1e-7 * scale`` where
        ``scale`` is the largest coordinate magnitude involved.
    max_iter : int, optional
        Iteration cap; default ``10 * m * ceil(1/tol)``.
    """
    gp = as_point_set(group)
    qv = np.asarray(q, dtype=np.float64)
    if qv.ndim != 1 or qv.shape[0] != gp.d:
        raise DomainError("query point dimension does not match the group")
    if not np.all(np.isfinite(qv)):
        raise DomainError("query point must be finite")
    lam, ub, lb, converged, iters = _fw_loop(qv, gp.points, tol, max_iter)
    support = np.flatnonzero(lam > 0.0)
    w = lam[support]
    w = w / w.sum()
    point = w @ gp.points[support]
    dist = float(np.linalg.norm(point - qv))
    witness = HullWitness(support=support.astype(np.int64), weights=w, point=point)
    return HullDistance(
        distance=dist,
        lower_bound=min(lb, dist),
        witness=witness,
        converged=converged,
        iterations=iters,
    )


def _default_fw_params(qv, pts, tol, max_iter):
    if tol is None:
        scale = max(float(np.abs(pts).max()), float(np.abs(qv).max()) if qv.size else 0.0)
        tol = 1e-7 * scale
    if max_iter is None:
        denom = max(tol, 1e-12)
        max_iter = 10 * pts.shape[0] * math.ceil(1.0 / denom)
    return tol, max_iter


def _fw_loop(qv, pts, tol=None, max_iter=None, stop_radius=None):
    """Shared Frank-Wolfe loop; see :func:`dist_to_hull` for the contract."""
    tol, max_iter = _default_fw_params(qv, pts, tol, max_iter)
    diffs = pts - qv
    m = diffs.shape[0]
    sq = np.einsum("ij,ij->i", diffs, diffs)
    j0 = int(np.argmin(sq))
    lam = np.zeros(m)
    lam[j0] = 1.0
    x = diffs[j0].copy()
    lb = 0.0
    ub = math.sqrt(max(float(sq[j0]), 0.0))
    it = 0
    while it < max_iter:
        it += 1
        fx = float(x @ x)
        scores = diffs @ x
        j = int(np.argmin(scores))
        smin = float(scores[j])
        lb = math.sqrt(max(2.0 * smin - fx, 0.0))
        ub = math.sqrt(max(fx, 0.0))
        if ub - lb <= tol:
            return lam, ub, lb, True, it
        if stop_radius is not None and (lb > stop_radius or ub <= stop_radius):
            return lam, ub, lb, True, it
        step = diffs[j] - x
        denom = float(step @ step)
        if denom <= 0.0:
            return lam, ub, lb, True, it
        gamma = min(1.0, max(0.0, -float(x @ step) / denom))
        if gamma <= 0.0:
            return lam, ub, lb, True, it
        x *= 1.0 - gamma
        x += gamma * diffs[j]
        lam *= 1.0 - gamma
        lam[j] += gamma
    return lam, ub, lb, False, it


def hull_collides(center, pts, radius: float, tol: float = 1e-7, max_iter: int | None = None) -> bool:
    """Does CH(pts) come within ``radius + tol`` of ``center``?

    Same Frank-Wolfe machinery as :func:`dist_to_hull` but exits as soon
    as the certified bounds decide the comparison.
    """
    qv = np.asarray(center, dtype=np.float64)
    arr = np.asarray(pts, dtype=np.float64)
    threshold = radius + tol
    _, ub, _, _, _ = _fw_loop(qv, arr, tol=tol, max_iter=max_iter, stop_radius=threshold)
    return ub <= threshold

"""Consumers of the partition machinery.

* ``centerball``: a ball that every containing halfspace must share with at
  least k input points, where k is the group count of a backing partition
  certificate -- a checkable depth lower bound.
* ``selection_ball``: the centroid ball that at least half of all
  r-sequences collide with, r = ceil(2/eps^2).
* ``weak_epsilon_net``: a desk-scale realisation of the no-dimensional
  weak epsilon-net: a small family of balls such that the hull of every
  subset holding an eps_frac fraction of the points meets one of them.
  The violating-subset search is exhaustive, hence the input-size cap.
* ``caratheodory_approx``: sparse convex approximation of a hull point by
  averaging ceil(1/(2 eps^2)) weighted draws.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .core import (
    Ball,
    DomainError,
    HullWitness,
    as_point_set,
    diameter_exact,
    hull_collides,
)
from .halving import halving_tree_partition
from .tverberg import TverbergCertificate, tverberg_partition

__all__ = [
    "CenterballResult",
    "WeakNet",
    "CaratheodoryResult",
    "centerball",
    "halfspace_depth_check_2d",
    "selection_ball",
    "weak_epsilon_net",
    "audit_weak_net",
    "caratheodory_approx",
]


@dataclass(frozen=True)
class CenterballResult:
    """Ball plus the certified Tukey-depth lower bound backing it."""

    ball: Ball
    depth_lower_bound: int
    certificate: TverbergCertificate


def centerball(
    P,
    eps: float,
    rng: np.random.Generator | None = None,
    deterministic: bool = False,
    delta_bound: float | None = None,
) -> CenterballResult:
    """Ball of radius eps * diameter-bound with depth at least k.

    Any halfspace containing the ball intersects every group hull of the
    backing certificate, hence contains at least one point per group:
    depth >= number of groups.  The randomized backend needs ``rng``; the
    deterministic one (``deterministic=True``) requires eps <= 1/4.
    """
    ps = as_point_set(P)
    if deterministic:
        cert, _ = halving_tree_partition(ps, eps, delta_bound)
    else:
        if rng is None:
            raise DomainError("the randomized centerball backend requires an rng")
        cert = tverberg_partition(ps, eps, rng, delta_bound)
    return CenterballResult(ball=cert.ball, depth_lower_bound=cert.num_groups, certificate=cert)


def halfspace_depth_check_2d(P, ball: Ball, angles: int = 3600) -> int:
    """Empirical 2-d probe of a centerball's depth guarantee.

    Sweeps ``angles`` unit directions u and counts the points in the
    tightest halfspace containing the ball with inner normal u, i.e.
    {p : <u, p> >= <u, center> - radius}; returns the minimum count.
    A sampled lower-bound probe, not an exact depth computation.
    """
    ps = as_point_set(P)
    if ps.d != 2:
        raise DomainError(f"the directional probe is 2-d only, got d={ps.d}")
    if angles < 8:
        raise DomainError(f"need at least 8 directions, got {angles}")
    thetas = 2.0 * math.pi * np.arange(angles) / angles
    best = ps.n
    chunk = max(1, 5_000_000 // max(ps.n, 1))
    for lo in range(0, angles, chunk):
        U = np.stack([np.cos(thetas[lo : lo + chunk]), np.sin(thetas[lo : lo + chunk])], axis=1)
        thr = U @ ball.center - ball.radius
        counts = (ps.points @ U.T >= thr[None, :]).sum(axis=0)
        best = min(best, int(counts.min()))
    return best


def selection_ball(P, eps: float, delta_bound: float | None = None):
    """Centroid ball colliding with at least half of all r-sequences.

    r = ceil(2 / eps^2).  A uniform sequence of r points has probability
    at least 1/2 that its hull meets the returned ball.

    Returns (ball, r).
    """
    ps = as_point_set(P)
    if not 0.0 < eps < 1.0:
        raise DomainError(f"eps must lie in (0, 1), got {eps}")
    r = math.ceil(2.0 / (eps * eps))
    delta_b = ps.diameter_upper if delta_bound is None else float(delta_bound)
    return Ball(center=ps.centroid, radius=eps * delta_b), r


@dataclass(frozen=True)
class WeakNet:
    """Family of equal-radius balls hitting every heavy subset's hull."""

    balls: list
    eps_frac: float  # subset mass fraction the net must serve
    eps_rad: float  # ball radius in units of the diameter
    r: int  # sequence length 2 / eps_rad^2
    diameter: float  # exact diameter the radii are based on

    @property
    def size(self) -> int:
        return len(self.balls)


def _heavy_subset_size(n: int, eps_frac: float) -> int:
    return max(1, math.ceil(eps_frac * n))


def weak_epsilon_net(P, eps_frac: float, eps_rad: float, n_max: int = 24, tol: float = 1e-7) -> WeakNet:
    """Greedy construction of a weak epsilon-net at desk scale.

    Repeatedly finds a subset of ceil(eps_frac * n) points whose hull no
    current ball touches (lexicographically first violator wins) and adds
    the ball centred at that subset's centroid with radius
    eps_rad * diameter.  Each new ball permanently serves at least half of
    the violator's r-sequences, so at most 2 * eps_frac^(-r) balls are
    ever added.  The violator search enumerates all subsets, hence the
    ``n_max`` cap.
    """
    ps = as_point_set(P)
    n = ps.n
    if not 0.0 < eps_frac < 1.0:
        raise DomainError(f"eps_frac must lie in (0, 1), got {eps_frac}")
    ratio = 2.0 / (eps_rad * eps_rad)
    r = round(ratio)
    if r < 1 or abs(ratio - r) > 1e-9:
        raise DomainError(f"2 / eps_rad^2 must be a positive integer, got {ratio}")
    if n > n_max:
        raise DomainError(f"exhaustive subset search is capped at n <= {n_max}, got {n}")
    m = _heavy_subset_size(n, eps_frac)
    delta = diameter_exact(ps)
    radius = eps_rad * delta
    cap = math.ceil(2.0 * eps_frac ** (-r))
    pts = ps.points
    balls: list[Ball] = []
    while True:
        violator = None
        for combo in combinations(range(n), m):
            sub = pts[list(combo)]
            if not any(hull_collides(b.center, sub, b.radius, tol) for b in balls):
                violator = sub
                break
        if violator is None:
            break
        if len(balls) >= cap:
            raise RuntimeError(
                "weak-net construction exceeded its termination bound; numerical inconsistency"
            )
        balls.append(Ball(center=violator.mean(axis=0), radius=radius))
    return WeakNet(balls=balls, eps_frac=eps_frac, eps_rad=eps_rad, r=r, diameter=delta)


def audit_weak_net(P, net: WeakNet, tol: float = 1e-7) -> bool:
    """Exhaustively re-check that every heavy subset's hull meets a ball."""
    ps = as_point_set(P)
    m = _heavy_subset_size(ps.n, net.eps_frac)
    pts = ps.points
    for combo in combinations(range(ps.n), m):
        sub = pts[list(combo)]
        if not any(hull_collides(b.center, sub, b.radius, tol) for b in net.balls):
            return False
    return True


@dataclass(frozen=True)
class CaratheodoryResult:
    """Sparse convex approximation of a hull point.

    ``error <= eps * diameter-bound`` and ``len(witness.support) <=
    support_cap`` whenever ``converged`` is True (the retry loop failing
    64 times has probability ~2^-64; the best attempt is then returned
    flagged).
    """

    point: np.ndarray
    witness: HullWitness
    error: float
    converged: bool
    rounds: int
    support_cap: int


def caratheodory_approx(
    p,
    P,
    weights,
    eps: float,
    rng: np.random.Generator,
    max_rounds: int = 64,
) -> CaratheodoryResult:
    """Re-express a hull point over at most ceil(1/(2 eps^2)) support points.

    Draws r = ceil(1/(2 eps^2)) points i.i.d. proportionally to
    ``weights`` and averages them; the expected distance to ``p`` is at
    most eps * diameter, so few retries are needed to land within
    eps * diameter-bound.  Repeated draws merge into weights k/r.
    """
    ps = as_point_set(P)
    if eps <= 0.0:
        raise DomainError(f"eps must be positive, got {eps}")
    pv = np.asarray(p, dtype=np.float64)
    if pv.ndim != 1 or pv.shape[0] != ps.d or not np.all(np.isfinite(pv)):
        raise DomainError("p must be a finite d-vector matching the point set")
    w = np.asarray(weights, dtype=np.float64)
    if w.shape != (ps.n,):
        raise DomainError(f"weights must have shape ({ps.n},), got {w.shape}")
    if w.min() < -1e-12:
        raise DomainError(f"weights must be nonnegative, smallest is {w.min():.3g}")
    if abs(w.sum() - 1.0) > 1e-9:
        raise DomainError(f"weights must sum to 1, got {w.sum():.17g}")
    if float(np.abs(w @ ps.points - pv).max()) > 1e-9:
        raise DomainError("p is not the stated convex combination of the points")

    r = math.ceil(1.0 / (2.0 * eps * eps))
    threshold = eps * ps.diameter_upper
    probs = np.clip(w, 0.0, None)
    probs = probs / probs.sum()
    best = None
    for rounds in range(1, max_rounds + 1):
        idx = rng.choice(ps.n, size=r, replace=True, p=probs)
        support, counts = np.unique(idx, return_counts=True)
        wt = counts / float(r)
        q = wt @ ps.points[support]
        err = float(np.linalg.norm(pv - q))
        if best is None or err < best[0]:
            best = (err, support.astype(np.int64), wt, q)
        if err <= threshold:
            return CaratheodoryResult(
                point=q,
                witness=HullWitness(support=support.astype(np.int64), weights=wt, point=q),
                error=err,
                converged=True,
                rounds=rounds,
                support_cap=r,
            )
    err, support, wt, q = best
    return CaratheodoryResult(
        point=q,
        witness=HullWitness(support=support, weights=wt, point=q),
        error=err,
        converged=False,
        rounds=max_rounds,
        support_cap=r,
    )

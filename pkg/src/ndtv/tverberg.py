"""Randomized Tverberg-style partitions with alteration, plus a verifier.

One sampling round shuffles the points and cuts the permutation into
t = floor(n / M) contiguous groups of size M or M+1, where
M = ceil(zeta / eps^2) and zeta = 2 (1 + eps^2 / 8).  A group is *good*
when its centroid lies within eps * avg_price of the global centroid;
a round is accepted when fewer than an accept_frac fraction of the groups
are bad.  With accept_frac = 1/2 a round is accepted with probability at
least eps^2 / 16; with accept_frac = 2/3 (the fast variant, which then has
to merge up to two bad groups into a good one) the probability is at
least 1/4.

After an accepted round every bad group is folded into a distinct good
group.  The good part's centroid remains inside the merged group's hull,
so it certifies that the hull meets the ball B(c(P), eps * avg_price).
Group sizes stay below 4/eps^2 + 9/2 (pair merges) or 6/eps^2 + 7
(triple merges).

The structural requirement for the round arithmetic is
n >= (2M + 3) * M; all entry points enforce it.

Certificates carry disjoint covering groups, the ball, one convex-weight
witness per group, and the claimed size/count bounds, so an independent
party can verify everything in O(dn).
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .core import Ball, DomainError, HullWitness, as_point_set, uniform_witness

__all__ = [
    "TverbergCertificate",
    "RandomPartitionTrace",
    "PartitionRound",
    "CheckResult",
    "VerificationReport",
    "partition_round",
    "random_tverberg_core",
    "tverberg_partition",
    "tverberg_fast",
    "verify_certificate",
]

logger = logging.getLogger(__name__)

INV_SQRT2 = 1.0 / math.sqrt(2.0)


@dataclass
class TverbergCertificate:
    """Partition certificate: groups, ball, witnesses, and claimed bounds.

    ``radius_basis`` records what quantity the ball radius is measured
    against: ``avg_price`` (eps * avg_price), ``diameter`` (eps * a
    caller-supplied diameter value) or ``diameter_bound`` (eps * the O(dn)
    two-approximation of the diameter).
    """

    groups: list
    ball: Ball
    witnesses: list
    radius_basis: str
    eps: float
    algo: str
    claimed_max_group_size: int
    claimed_min_groups: int
    n: int
    d: int
    rounds: int = 1
    bad_count: int = 0
    seed: int | None = None

    @property
    def num_groups(self) -> int:
        return len(self.groups)

    @property
    def max_group_size(self) -> int:
        return max(len(g) for g in self.groups)

    def witness_distances(self, all_points: np.ndarray | None = None) -> np.ndarray:
        """Distance of every witness point from the ball center."""
        out = np.empty(len(self.witnesses))
        for i, w in enumerate(self.witnesses):
            p = w.point if w.point is not None else w.combination(all_points)
            out[i] = np.linalg.norm(p - self.ball.center)
        return out


@dataclass(frozen=True)
class RandomPartitionTrace:
    """Parameters and outcome of the accepted sampling round."""

    zeta: float
    group_size: int  # M
    num_groups: int  # t
    bad_count: int
    threshold: float  # accepted because bad_count < threshold
    rounds_used: int


@dataclass(frozen=True)
class PartitionRound:
    """Raw outcome of a single sampling round."""

    accepted: bool
    bad_count: int
    num_groups: int
    group_size: int
    zeta: float
    threshold: float
    good: np.ndarray
    perm: np.ndarray
    offsets: np.ndarray


def _round_params(n: int, eps: float):
    zeta = 2.0 * (1.0 + eps * eps / 8.0)
    M = math.ceil(zeta / (eps * eps))
    gate = (2 * M + 3) * M
    if n < gate:
        raise DomainError(
            f"need n >= {gate} (= (2M+3)M at group size M={M}) for eps={eps}, got n={n}"
        )
    t = n // M
    rho = n - M * t  # this many groups take one extra point
    return zeta, M, t, rho


def partition_round(P, eps: float, rng: np.random.Generator, accept_frac: float = 0.5) -> PartitionRound:
    """Run one sampling round: shuffle, cut, grade groups, accept or not."""
    ps = as_point_set(P)
    if not 0.0 < eps < 1.0:
        raise DomainError(f"eps must lie in (0, 1), got {eps}")
    n, d = ps.n, ps.d
    zeta, M, t, rho = _round_params(n, eps)
    perm = rng.permutation(n)
    pp = ps.points[perm]
    head = rho * (M + 1)
    cents = np.empty((t, d))
    if rho:
        cents[:rho] = pp[:head].reshape(rho, M + 1, d).mean(axis=1)
    cents[rho:] = pp[head:].reshape(t - rho, M, d).mean(axis=1)
    dists = np.linalg.norm(cents - ps.centroid, axis=1)
    good = dists <= eps * ps.avg_price
    bad = int(t - good.sum())
    threshold = accept_frac * t
    sizes = np.full(t, M, dtype=np.int64)
    sizes[:rho] += 1
    offsets = np.concatenate([[0], np.cumsum(sizes)])
    return PartitionRound(
        accepted=bad < threshold,
        bad_count=bad,
        num_groups=t,
        group_size=M,
        zeta=zeta,
        threshold=threshold,
        good=good,
        perm=perm,
        offsets=offsets,
    )


def _accepted_round(P, eps, rng, accept_frac):
    rounds = 0
    while True:
        rounds += 1
        rr = partition_round(P, eps, rng, accept_frac)
        if rr.accepted:
            return rr, rounds
        if rounds % 64 == 0:
            logger.info(
                "partition still rejecting after %d rounds (last bad=%d of %d)",
                rounds,
                rr.bad_count,
                rr.num_groups,
            )


def _merge_and_witness(rr: PartitionRound, pts: np.ndarray, per_good: int):
    groups = [
        rr.perm[rr.offsets[i] : rr.offsets[i + 1]].astype(np.int64)
        for i in range(rr.num_groups)
    ]
    good_ids = np.flatnonzero(rr.good)
    bad_ids = np.flatnonzero(~rr.good)
    assert bad_ids.size <= per_good * good_ids.size
    final, wits = [], []
    for j, gi in enumerate(good_ids):
        absorbed = bad_ids[j * per_good : (j + 1) * per_good]
        if absorbed.size:
            merged = np.concatenate([groups[gi]] + [groups[b] for b in absorbed])
        else:
            merged = groups[gi]
        final.append(merged)
        wits.append(uniform_witness(groups[gi], pts))
    return final, wits


def random_tverberg_core(P, eps: float, rng: np.random.Generator):
    """Randomized partition with pair-merge alteration; avg-price radius.

    Returns (certificate, trace).  Hard post-conditions of the
    certificate: group sizes at most floor(4/eps^2 + 9/2), at least
    ceil(n / (4/eps^2 + 9/2)) groups, and every witness within
    eps * avg_price of the global centroid.  Expected rounds O(1/eps^2).
    """
    ps = as_point_set(P)
    if not 0.0 < eps < 1.0:
        raise DomainError(f"eps must lie in (0, 1), got {eps}")
    rr, rounds = _accepted_round(ps, eps, rng, 0.5)
    final, wits = _merge_and_witness(rr, ps.points, per_good=1)
    cap = 4.0 / (eps * eps) + 4.5
    cert = TverbergCertificate(
        groups=final,
        ball=Ball(center=ps.centroid, radius=eps * ps.avg_price),
        witnesses=wits,
        radius_basis="avg_price",
        eps=eps,
        algo="random",
        claimed_max_group_size=math.floor(cap),
        claimed_min_groups=math.ceil(ps.n / cap),
        n=ps.n,
        d=ps.d,
        rounds=rounds,
        bad_count=rr.bad_count,
    )
    trace = RandomPartitionTrace(
        zeta=rr.zeta,
        group_size=rr.group_size,
        num_groups=rr.num_groups,
        bad_count=rr.bad_count,
        threshold=rr.threshold,
        rounds_used=rounds,
    )
    return cert, trace


def tverberg_partition(P, eps: float, rng: np.random.Generator, delta_bound: float | None = None) -> TverbergCertificate:
    """Partition whose ball radius is stated against the diameter.

    Runs the core algorithm at sqrt(2) * eps; since avg_price is at most
    diameter / sqrt(2), the witnesses land within eps * diameter of the
    centroid.  Group sizes at most floor(2/eps^2 + 9/2), at least
    ceil(n / (2/eps^2 + 9/2)) groups.  Never needs the diameter itself;
    the reported radius uses the O(dn) bound unless ``delta_bound`` is
    supplied.
    """
    ps = as_point_set(P)
    if not 0.0 < eps < INV_SQRT2:
        raise DomainError(f"eps must lie in (0, 1/sqrt(2)), got {eps}")
    core_cert, trace = random_tverberg_core(ps, math.sqrt(2.0) * eps, rng)
    if delta_bound is None:
        delta_b = ps.diameter_upper
        basis = "diameter_bound"
    else:
        delta_b = float(delta_bound)
        basis = "diameter"
    cap = 2.0 / (eps * eps) + 4.5
    return TverbergCertificate(
        groups=core_cert.groups,
        ball=Ball(center=ps.centroid, radius=eps * delta_b),
        witnesses=core_cert.witnesses,
        radius_basis=basis,
        eps=eps,
        algo="random",
        claimed_max_group_size=math.floor(cap),
        claimed_min_groups=math.ceil(ps.n / cap),
        n=ps.n,
        d=ps.d,
        rounds=trace.rounds_used,
        bad_count=trace.bad_count,
    )


def tverberg_fast(P, eps: float, rng: np.random.Generator) -> TverbergCertificate:
    """Triple-merge variant: O(1) expected rounds, slightly larger groups.

    Accepts a round when fewer than two thirds of the groups are bad
    (probability at least 1/4 per round) and folds up to two bad groups
    into each good one.  Group sizes at most floor(6/eps^2 + 7), at least
    ceil(n / (6/eps^2 + 7)) groups; ball radius eps * avg_price.
    """
    ps = as_point_set(P)
    if not 0.0 < eps < 1.0:
        raise DomainError(f"eps must lie in (0, 1), got {eps}")
    rr, rounds = _accepted_round(ps, eps, rng, 2.0 / 3.0)
    final, wits = _merge_and_witness(rr, ps.points, per_good=2)
    cap = 6.0 / (eps * eps) + 7.0
    return TverbergCertificate(
        groups=final,
        ball=Ball(center=ps.centroid, radius=eps * ps.avg_price),
        witnesses=wits,
        radius_basis="avg_price",
        eps=eps,
        algo="fast",
        claimed_max_group_size=math.floor(cap),
        claimed_min_groups=math.ceil(ps.n / cap),
        n=ps.n,
        d=ps.d,
        rounds=rounds,
        bad_count=rr.bad_count,
    )


# ---------------------------------------------------------------------------
# certificate verification
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CheckResult:
    name: str
    ok: bool
    detail: str


@dataclass(frozen=True)
class VerificationReport:
    ok: bool
    checks: list

    @property
    def first_failure(self) -> str | None:
        for c in self.checks:
            if not c.ok:
                return c.name
        return None


def verify_certificate(P, cert: TverbergCertificate, tol: float = 1e-7) -> VerificationReport:
    """Independently re-check a certificate against the point set.

    Four checks, O(dn) total: (a) the groups are a partition of the index
    range, (b) every witness is a valid convex combination supported
    inside its group, (c) every witness point lies within radius + tol of
    the ball center, (d) the claimed size cap and group-count bound hold.
    Malformed certificates produce failed checks, not exceptions.
    """
    ps = as_point_set(P)
    pts = ps.points
    checks: list[CheckResult] = []

    def run(name, fn):
        try:
            ok, detail = fn()
        except Exception as exc:  # malformed input: report, don't raise
            ok, detail = False, f"malformed: {exc}"
        checks.append(CheckResult(name, ok, detail))
        return ok

    def partition_cover():
        if cert.n != ps.n or cert.d != ps.d:
            return False, f"certificate is for n={cert.n}, d={cert.d}; points are n={ps.n}, d={ps.d}"
        counts = np.zeros(ps.n, dtype=np.int64)
        for g in cert.groups:
            arr = np.asarray(g)
            if arr.size == 0:
                return False, "empty group"
            if arr.min() < 0 or arr.max() >= ps.n:
                return False, "group index out of range"
            counts[arr] += 1
        if not np.all(counts == 1):
            missing = int((counts == 0).sum())
            dup = int((counts > 1).sum())
            return False, f"not a partition: {missing} missing, {dup} duplicated indices"
        return True, f"{len(cert.groups)} disjoint groups cover all {ps.n} indices"

    def witness_convexity():
        if len(cert.witnesses) != len(cert.groups):
            return False, "witness count does not match group count"
        worst = 0.0
        for g, w in zip(cert.groups, cert.witnesses):
            sup = np.asarray(w.support)
            wt = np.asarray(w.weights, dtype=np.float64)
            if sup.size == 0 or sup.size != wt.size:
                return False, "empty or mismatched witness support/weights"
            if not np.isin(sup, np.asarray(g)).all():
                return False, "witness support not contained in its group"
            if wt.min() < -tol:
                return False, f"negative witness weight {wt.min():.3g}"
            if abs(wt.sum() - 1.0) > tol:
                return False, f"witness weights sum to {wt.sum():.17g}"
            if w.point is not None:
                dev = float(np.abs(wt @ pts[sup] - w.point).max())
                worst = max(worst, dev)
                if dev > tol:
                    return False, f"stored witness point off by {dev:.3g}"
        return True, f"all witnesses convex (worst stored-point deviation {worst:.3g})"

    def witness_in_ball():
        worst = 0.0
        for w in cert.witnesses:
            point = np.asarray(w.weights, dtype=np.float64) @ pts[np.asarray(w.support)]
            dist = float(np.linalg.norm(point - cert.ball.center))
            worst = max(worst, dist)
            if dist > cert.ball.radius + tol:
                return False, f"witness at distance {dist:.17g} > radius {cert.ball.radius:.17g} + tol"
        return True, f"max witness distance {worst:.6g} <= radius {cert.ball.radius:.6g} + tol"

    def size_and_count():
        biggest = max(len(g) for g in cert.groups)
        if biggest > cert.claimed_max_group_size:
            return False, f"group of size {biggest} exceeds claimed cap {cert.claimed_max_group_size}"
        if len(cert.groups) < cert.claimed_min_groups:
            return False, f"only {len(cert.groups)} groups, claimed at least {cert.claimed_min_groups}"
        return True, (
            f"max group size {biggest} <= {cert.claimed_max_group_size}, "
            f"k = {len(cert.groups)} >= {cert.claimed_min_groups}"
        )

    ok_a = run("partition_cover", partition_cover)
    ok_b = run("witness_convexity", witness_convexity) if ok_a else run(
        "witness_convexity", lambda: (False, "skipped: partition check failed")
    )
    run("witness_in_ball", witness_in_ball) if ok_b else run(
        "witness_in_ball", lambda: (False, "skipped: convexity check failed")
    )
    run("size_and_count", size_and_count)

    return VerificationReport(ok=all(c.ok for c in checks), checks=checks)

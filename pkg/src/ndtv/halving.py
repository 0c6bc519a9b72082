"""Halving: split 2m points into two equal halves with provably close centroids.

Points are paired in input order, (u_1, u_2), (u_3, u_4), ...; a sign
x_i in {-1, +1} decides which element of pair i goes to which half.  With
v_i = u_{2i-1} - u_{2i} the centroid gap is

    c(P) - c(Q) = (1/m) * sum_i x_i v_i,

whose second moment under fair random signs is at most diameter^2 / m.
The derandomized variant picks each sign greedily against the running sum
V_t = sum_{i<=t} x_i v_i: choosing the sign that keeps <V_t, v_{t+1}>
nonpositive never increases the conditional second moment, which pins the
realised gap under diameter / sqrt(m) -- a hard, per-run bound.

Applying the derandomized halving recursively for t levels splits the set
into 2^t groups whose centroids stay within a geometric error series of
the global centroid; stopping while groups still hold at least
3.2 / eps^2 points keeps every leaf centroid within eps * diameter,
yielding a deterministic Tverberg-style partition with witnesses.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .core import Ball, DomainError, as_point_set, diameter_exact, uniform_witness
from .tverberg import TverbergCertificate

__all__ = [
    "CHAIN_CONSTANT",
    "MIN_LEAF_FACTOR",
    "HalvingState",
    "HalvingTreeTrace",
    "random_halving",
    "random_halving_retry",
    "derand_halving",
    "derand_halving_signs",
    "halving_tree_partition",
]

# Closed form of the level-error series sum_{i>=0} 2^{-i/2} / sqrt(2),
# rounded up: the distance from any leaf centroid to the root centroid is
# at most CHAIN_CONSTANT * diameter / sqrt(leaf size).
CHAIN_CONSTANT = 5.0 / (2.0 * math.sqrt(2.0))

# Halving stops while leaves still hold >= MIN_LEAF_FACTOR / eps^2 points;
# then CHAIN_CONSTANT / sqrt(MIN_LEAF_FACTOR) * eps ~= 0.988 * eps <= eps.
MIN_LEAF_FACTOR = 3.2


@dataclass(frozen=True)
class HalvingState:
    """Trace of one derandomized halving run."""

    pair_diffs: np.ndarray  # v_i = u_{2i-1} - u_{2i}
    signs: np.ndarray  # x_i in {-1, +1}
    running_sum: np.ndarray  # V_m = sum_i x_i v_i
    decision_values: np.ndarray  # D_t = (2/m^2) <V_t, v_{t+1}> before each choice


@dataclass(frozen=True)
class HalvingTreeTrace:
    """Per-level accounting of the recursive halving partition."""

    levels: int
    per_level_bound: np.ndarray  # allowed child-to-parent centroid distance
    per_level_realized: np.ndarray  # worst realised child-to-parent distance
    cumulative_bound: float  # leaf-to-root bound from the geometric series
    leaf_groups: list  # index arrays before round-robin additions
    trimmed_size: int  # power-of-two prefix actually halved
    prefix_centroid_dist: float  # || c(prefix) - c(P) ||


def _split_indices(signs: np.ndarray):
    """Local pair positions selected for each half given the signs."""
    base = 2 * np.arange(signs.shape[0], dtype=np.int64)
    return base + (signs < 0), base + (signs > 0)


def random_halving(U, rng: np.random.Generator):
    """Split an even-sized set by independent fair coin flips per pair.

    Returns (p_indices, q_indices).  For any t >= 1 the centroid gap
    exceeds t * diameter / sqrt(m) with probability at most 1/t^2.
    """
    ps = as_point_set(U)
    if ps.n % 2 != 0:
        raise DomainError(f"halving needs an even number of points, got {ps.n}")
    m = ps.n // 2
    signs = np.where(rng.integers(0, 2, size=m) == 1, 1, -1).astype(np.int8)
    p_sel, q_sel = _split_indices(signs)
    return p_sel, q_sel


def random_halving_retry(U, xi: float, rng: np.random.Generator, delta_bound: float | None = None):
    """Rejection-sample random halvings until the gap is (1+xi)-good.

    Retries until dist(c(P), c(Q)) <= (1 + xi) * delta_bound / sqrt(m);
    each round succeeds with probability at least xi/2, so the expected
    number of rounds is at most 2/xi.  ``delta_bound`` must upper-bound
    the diameter; by default the exact diameter is used for n <= 4096 and
    the O(dn) two-approximation beyond that.

    Returns (p_indices, q_indices, rounds_used).
    """
    ps = as_point_set(U)
    if ps.n % 2 != 0:
        raise DomainError(f"halving needs an even number of points, got {ps.n}")
    if not 0.0 < xi < 1.0:
        raise DomainError(f"xi must lie in (0, 1), got {xi}")
    if delta_bound is None:
        delta_bound = diameter_exact(ps) if ps.n <= 4096 else ps.diameter_upper
    m = ps.n // 2
    threshold = (1.0 + xi) * delta_bound / math.sqrt(m)
    pts = ps.points
    rounds = 0
    while True:
        rounds += 1
        p_sel, q_sel = random_halving(ps, rng)
        gap = float(np.linalg.norm(pts[p_sel].mean(axis=0) - pts[q_sel].mean(axis=0)))
        if gap <= threshold:
            return p_sel, q_sel, rounds


def derand_halving_signs(pts: np.ndarray, with_state: bool = False):
    """Greedy signs for consecutive pairs of an even-length point array.

    Chooses x_{t+1} = +1 when <V_t, v_{t+1}> <= 0 and -1 otherwise, which
    never increases the conditional expectation of the squared centroid
    gap.  O(dm) for m pairs.
    """
    v = pts[0::2] - pts[1::2]
    m = v.shape[0]
    signs = np.empty(m, dtype=np.int8)
    V = np.zeros(pts.shape[1])
    dvals = np.empty(m) if with_state else None
    scale = 2.0 / float(m * m)
    dot = np.dot
    for i in range(m):
        D = float(dot(V, v[i]))
        if with_state:
            dvals[i] = scale * D
        if D <= 0.0:
            signs[i] = 1
            V += v[i]
        else:
            signs[i] = -1
            V -= v[i]
    if with_state:
        return signs, HalvingState(pair_diffs=v, signs=signs, running_sum=V, decision_values=dvals)
    return signs


def derand_halving(U, return_state: bool = False):
    """Deterministic halving with gap at most diameter / sqrt(m), hard.

    Returns (p_indices, q_indices) and, when requested, the
    :class:`HalvingState` trace.
    """
    ps = as_point_set(U)
    if ps.n % 2 != 0:
        raise DomainError(f"halving needs an even number of points, got {ps.n}")
    if return_state:
        signs, state = derand_halving_signs(ps.points, with_state=True)
        p_sel, q_sel = _split_indices(signs)
        return p_sel, q_sel, state
    signs = derand_halving_signs(ps.points)
    p_sel, q_sel = _split_indices(signs)
    return p_sel, q_sel


def halving_tree_partition(P, eps: float, delta_bound: float | None = None):
    """Deterministic Tverberg-style partition by recursive halving.

    Trims the input to its largest power-of-two prefix (input order),
    derandomized-halves it for as many levels as the leaf-size rule
    ``leaf >= MIN_LEAF_FACTOR / eps^2`` allows, and distributes the
    trimmed-off points round-robin over the leaf groups.  Every leaf
    centroid (the group witness) lies within ``eps * diameter`` of the
    prefix centroid, which is the returned ball's center.

    Fully deterministic: identical input order gives an identical
    certificate.  O(dn log n) total.

    Returns (certificate, trace).
    """
    ps = as_point_set(P)
    n = ps.n
    if not 0.0 < eps <= 0.25:
        raise DomainError(f"eps must lie in (0, 1/4], got {eps}")
    m_min = MIN_LEAF_FACTOR / (eps * eps)
    if n < 2 * math.ceil(m_min):
        raise DomainError(
            f"need n >= {2 * math.ceil(m_min)} points for one halving level at eps={eps}, got {n}"
        )
    trim = 1 << (n.bit_length() - 1)
    levels = 0
    while (trim >> (levels + 1)) >= m_min:
        levels += 1
    if levels < 1:
        raise DomainError(
            f"power-of-two prefix {trim} is too small for one halving level at eps={eps}"
        )

    pts = ps.points
    if delta_bound is None:
        delta_b = ps.diameter_upper
        basis = "diameter_bound"
    else:
        delta_b = float(delta_bound)
        basis = "diameter"

    # All groups of a level are independent, so the greedy sign choices run
    # in lockstep across groups: one vectorised dot per pair position.
    # Groups stay contiguous slices of a working copy, reordered (plus half
    # first, minus half second) once per level.
    d = ps.d
    work = pts[:trim].copy()
    scratch = np.empty_like(work)  # double buffer: reordering in place-ish
    order = np.arange(trim, dtype=np.int64)
    order_scratch = np.empty_like(order)
    realized = np.zeros(levels)
    G, g = 1, trim
    for level in range(levels):
        m = g // 2
        blocks = work.reshape(G, g, d)
        signs = np.empty((G, m), dtype=np.int8)
        if G == 1:
            vflat = blocks[0, 0::2, :] - blocks[0, 1::2, :]
            V1 = np.zeros(d)
            dot = np.dot
            srow = signs[0]
            for j in range(m):
                vj = vflat[j]
                if float(dot(V1, vj)) <= 0.0:
                    srow[j] = 1
                    V1 += vj
                else:
                    srow[j] = -1
                    V1 -= vj
            V = V1[None, :]
        else:
            V = np.zeros((G, d))
            srow = signs.T
            for j in range(m):
                vj = blocks[:, 2 * j, :] - blocks[:, 2 * j + 1, :]
                D = (V * vj).sum(axis=1)
                neg = D > 0.0
                srow[j] = np.where(neg, -1, 1)
                np.negative(vj, where=neg[:, None], out=vj)
                V += vj
        # centroid gap of a split is ||V|| / m; child-to-parent is half that
        realized[level] = float(np.sqrt((V * V).sum(axis=1)).max()) / g
        base = 2 * np.arange(m, dtype=np.int64)
        plus_local = base[None, :] + (signs < 0)
        minus_local = base[None, :] + (signs > 0)
        local = np.concatenate([plus_local, minus_local], axis=1)
        perm = (local + (np.arange(G, dtype=np.int64) * g)[:, None]).reshape(-1)
        np.take(work, perm, axis=0, out=scratch)
        work, scratch = scratch, work
        np.take(order, perm, out=order_scratch)
        order, order_scratch = order_scratch, order
        G *= 2
        g = m

    groups = [order[i * g : (i + 1) * g].copy() for i in range(G)]
    k = len(groups)
    prefix_centroid = pts[:trim].mean(axis=0)
    prefix_dist = float(np.linalg.norm(prefix_centroid - ps.centroid))
    witnesses = [uniform_witness(idx, pts) for idx in groups]

    final_groups = groups
    if trim < n:
        extra = np.arange(trim, n, dtype=np.int64)
        bucket = (extra - trim) % k
        order = np.argsort(bucket, kind="stable")
        counts = np.bincount(bucket, minlength=k)
        offsets = np.concatenate([[0], np.cumsum(counts)])
        extra_sorted = extra[order]
        final_groups = [
            np.concatenate([groups[i], extra_sorted[offsets[i] : offsets[i + 1]]])
            if counts[i]
            else groups[i]
            for i in range(k)
        ]

    pow2 = trim == n
    if pow2:
        cap = math.floor(8.0 / (eps * eps))
        kmin = math.ceil(n * eps * eps / 8.0)
    else:
        cap = math.floor(16.0 / (eps * eps))
        kmin = math.ceil(trim * eps * eps / (2.0 * MIN_LEAF_FACTOR))

    cert = TverbergCertificate(
        groups=final_groups,
        ball=Ball(center=prefix_centroid, radius=eps * delta_b),
        witnesses=witnesses,
        radius_basis=basis,
        eps=eps,
        algo="det",
        claimed_max_group_size=cap,
        claimed_min_groups=kmin,
        n=n,
        d=ps.d,
        rounds=levels,
        bad_count=0,
    )
    trace = HalvingTreeTrace(
        levels=levels,
        per_level_bound=np.array(
            [delta_b / (2.0 * math.sqrt(trim / (1 << i))) for i in range(1, levels + 1)]
        ),
        per_level_realized=realized,
        cumulative_bound=CHAIN_CONSTANT * delta_b * math.sqrt((1 << levels) / trim),
        leaf_groups=groups,
        trimmed_size=trim,
        prefix_centroid_dist=prefix_dist,
    )
    return cert, trace

"""Mean sampling: pick r points whose centroid provably tracks the global one.

Randomized modes give distributional guarantees (Markov on the second
moment of the sample sum); the derandomized modes turn the same
second-moment computation into a hard per-run guarantee via conditional
expectations: the 0/1 membership indicators are fixed one at a time, never
letting the conditional expectation of ``||sum of chosen points||^2``
increase (points centred so the global centroid is the origin).

Notation used below:

    Y            sum of the r chosen (centred) points; dist(c(R), c(P)) = ||Y||/r
    Z(x_1..x_t)  E[||Y||^2 | I_1 = x_1, ..., I_t = x_t]
    beta0/beta1  Z after speculatively fixing the next indicator to 0 / 1

Z is a convex combination of beta0 and beta1, so committing to the smaller
branch never increases it, and the final Z equals the realised ||Y||^2.
That gives dist(c(R), c(P)) <= avg_price / sqrt(r), with no probability
attached.

The greedy is implemented twice: a from-scratch O(d n^3) evaluator
(``derand_sample_slow``, the oracle) and an O(dn) incremental prefix-sum
scheme (``derand_sample_fast``).  Both apply the same tie rule -- prefer 0
when beta0 <= beta1 -- and must produce identical index sets.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import halving as _halving
from .core import DomainError, as_point_set
from .halving import CHAIN_CONSTANT

__all__ = [
    "SampleResult",
    "ConditionalState",
    "CHAIN_CONSTANT",
    "sample_mean_without_replacement",
    "sample_mean_with_replacement",
    "derand_sample_slow",
    "derand_sample_fast",
    "derand_sample_by_halving",
]


@dataclass(frozen=True)
class SampleResult:
    """Outcome of one mean-sampling call.

    ``bound`` is a hard guarantee on ``centroid_dist`` when ``hard_bound``
    is True (derandomized modes).  For the randomized modes it is the
    natural scale of the tail bound: Prob[centroid_dist > t * bound] < 1/t^2.
    """

    indices: np.ndarray
    centroid_dist: float
    bound: float
    mode: str
    hard_bound: bool


@dataclass(frozen=True)
class ConditionalState:
    """Bookkeeping of a conditional-expectation run.

    ``beta_trajectory[k]`` is the committed Z after k fixed indicators
    (entry 0 is the unconditional expectation); it never increases, and
    the last entry equals the realised ``||Y||^2``.
    """

    t: int
    x: np.ndarray
    alpha: int
    beta: float
    beta_trajectory: np.ndarray


def sample_mean_without_replacement(P, r: int, rng: np.random.Generator) -> SampleResult:
    """Uniform r-subset via an unbiased shuffle of the index range.

    Distributional guarantee: for r >= zeta/eps^2 the sample centroid is
    within eps * avg_price of the global centroid except with probability
    < 1/zeta.
    """
    ps = as_point_set(P)
    n = ps.n
    if not 1 <= r <= n:
        raise DomainError(f"sample size must satisfy 1 <= r <= n, got r={r}, n={n}")
    indices = rng.permutation(n)[:r].astype(np.int64)
    dist = float(np.linalg.norm(ps.points[indices].mean(axis=0) - ps.centroid))
    return SampleResult(
        indices=indices,
        centroid_dist=dist,
        bound=ps.avg_price / math.sqrt(r),
        mode="without_replacement",
        hard_bound=False,
    )


def sample_mean_with_replacement(P, r: int, rng: np.random.Generator) -> SampleResult:
    """r i.i.d. uniform draws (repeats allowed).

    Distributional guarantee: for r >= zeta/eps^2 the sequence centroid is
    within eps * diameter of the global centroid except with probability
    <= 1/zeta.
    """
    ps = as_point_set(P)
    if r < 1:
        raise DomainError(f"sample size must be at least 1, got r={r}")
    indices = rng.integers(0, ps.n, size=r).astype(np.int64)
    dist = float(np.linalg.norm(ps.points[indices].mean(axis=0) - ps.centroid))
    return SampleResult(
        indices=indices,
        centroid_dist=dist,
        bound=ps.diameter_upper / math.sqrt(r),
        mode="with_replacement",
        hard_bound=False,
    )


# ---------------------------------------------------------------------------
# derandomized samplers
# ---------------------------------------------------------------------------


def _z_reference(gram, qn, x, T: int, r: int) -> float:
    """Z(x_1..x_T) evaluated from scratch off the conditional formulas.

    With alpha = sum of the fixed indicators and m = n - T undecided
    points, the conditional expectation splits into a singles term and
    three pair blocks (fixed/fixed, fixed/undecided, undecided/undecided)
    with coefficients 1, (r-alpha)/m and (r-alpha)(r-alpha-1)/(m(m-1)).
    """
    n = qn.shape[0]
    m = n - T
    head = x[:T].astype(np.float64)
    alpha = float(head.sum())
    need = r - alpha
    B = float(head @ qn[:T])
    if m > 0:
        B += (need / m) * float(qn[T:].sum())
    Ghh = gram[:T, :T]
    C = 0.5 * (float(head @ (Ghh @ head)) - float(head @ qn[:T]))
    if m > 0:
        C += (need / m) * float(head @ gram[:T, T:].sum(axis=1))
        if m > 1:
            Gtt = gram[T:, T:]
            tail_pairs = 0.5 * (float(Gtt.sum()) - float(qn[T:].sum()))
            C += (need * (need - 1.0) / (m * (m - 1.0))) * tail_pairs
    return B + 2.0 * C


def derand_sample_slow(P, r: int, return_state: bool = False):
    """Deterministic r-subset with dist(c(R), c(P)) <= avg_price/sqrt(r).

    Reference implementation: every step re-evaluates both speculative
    conditional expectations from scratch (O(n^2) pair terms each), for an
    O(d n^2 + n^3) total.  Intended as the oracle that
    :func:`derand_sample_fast` must reproduce index for index.
    """
    ps = as_point_set(P)
    n = ps.n
    if not 1 <= r <= n:
        raise DomainError(f"sample size must satisfy 1 <= r <= n, got r={r}, n={n}")
    tp = ps.points - ps.centroid
    gram = tp @ tp.T
    qn = np.diag(gram).copy()

    x = np.zeros(n, dtype=np.int8)
    alpha = 0
    traj = [_z_reference(gram, qn, x, 0, r)]
    for i in range(n):
        remaining = n - i
        need = r - alpha
        # forced tail: the conditional law is degenerate, Z stays put
        if need == 0:
            traj.extend([traj[-1]] * remaining)
            break
        if need == remaining:
            x[i:] = 1
            alpha += remaining
            traj.extend([traj[-1]] * remaining)
            break
        x[i] = 0
        beta0 = _z_reference(gram, qn, x, i + 1, r)
        x[i] = 1
        beta1 = _z_reference(gram, qn, x, i + 1, r)
        if beta0 <= beta1:
            x[i] = 0
            traj.append(beta0)
        else:
            alpha += 1
            traj.append(beta1)

    return _finish_derand(ps, tp, x, alpha, traj, r, "derand_slow", return_state)


def derand_sample_fast(P, r: int, return_state: bool = False):
    """Same greedy as :func:`derand_sample_slow`, in O(dn) total.

    Precomputes coordinate prefix sums and the suffix sums of the
    undecided/undecided pair block; each step then needs one O(d) dot
    product against the running sum of chosen points plus O(1) scalar
    updates.  Must match the slow implementation index for index.
    """
    ps = as_point_set(P)
    n, d = ps.n, ps.d
    if not 1 <= r <= n:
        raise DomainError(f"sample size must satisfy 1 <= r <= n, got r={r}, n={n}")
    tp = ps.points - ps.centroid
    q = np.einsum("ij,ij->i", tp, tp)
    Qn = float(q.sum())
    qcum = np.cumsum(q)

    pn = tp.sum(axis=0)
    dpn = tp @ pn  # <p_i, P_n>
    e = np.empty(n)  # <p_i, P_i> with P_i the inclusive coordinate prefix
    base = np.zeros(d)
    chunk = 65536
    for lo in range(0, n, chunk):
        hi = min(n, lo + chunk)
        pref = np.cumsum(tp[lo:hi], axis=0)
        pref += base
        e[lo:hi] = np.einsum("ij,ij->i", tp[lo:hi], pref)
        base = pref[-1].copy()
    w = dpn - e  # <p_i, P_n - P_i>
    dpr = e - q  # <p_i, P_{i-1}>

    # R[t] = sum over undecided/undecided pairs past prefix length t
    R = np.zeros(n + 1)
    if n >= 2:
        R[: n - 1] = w[: n - 1][::-1].cumsum()[::-1]

    # python lists: the loop below reads each entry once and list indexing
    # beats ndarray scalar indexing at this call volume
    q_l = q.tolist()
    qcum_l = qcum.tolist()
    w_l = w.tolist()
    dpn_l = dpn.tolist()
    dpr_l = dpr.tolist()
    R_l = R.tolist()

    x = np.zeros(n, dtype=np.int8)
    alpha = 0
    L = 0.0  # fixed/fixed pair sum
    a = 0.0  # <running chosen sum, P_n>
    g = 0.0  # <running chosen sum, coordinate prefix>
    Qx = 0.0  # chosen squared-norm sum
    Px = np.zeros(d)  # running sum of chosen points
    if n > 1:
        cnr = (r * (r - 1.0)) / (n * (n - 1.0))
    else:
        cnr = 0.0
    # unconditional expectation; pair sum collapses to -Qn/2 at the centre
    traj = [(r / n) * Qn - cnr * Qn]
    dot = np.dot
    for i in range(n):
        remaining = n - i
        need = r - alpha
        if need == 0:
            traj.extend([traj[-1]] * remaining)
            break
        if need == remaining:
            x[i:] = 1
            alpha += remaining
            traj.extend([traj[-1]] * remaining)
            break
        mrem = remaining - 1  # undecided count after fixing x_i
        s = float(dot(Px, tp[i]))
        tailQ = Qn - qcum_l[i]
        baseM = a - g - s
        if mrem > 1:
            pair_den = mrem * (mrem - 1.0)
            c20 = (need * (need - 1.0)) / pair_den
            c21 = ((need - 1.0) * (need - 2.0)) / pair_den
        else:
            c20 = 0.0
            c21 = 0.0
        Rt = R_l[i + 1]
        rho0 = need / mrem
        beta0 = (Qx + rho0 * tailQ) + 2.0 * (L + rho0 * baseM + c20 * Rt)
        rho1 = (need - 1.0) / mrem
        beta1 = (Qx + q_l[i] + rho1 * tailQ) + 2.0 * (
            (L + s) + rho1 * (baseM + w_l[i]) + c21 * Rt
        )
        if beta0 <= beta1:
            g += s
            traj.append(beta0)
        else:
            x[i] = 1
            alpha += 1
            Qx += q_l[i]
            L += s
            a += dpn_l[i]
            g += s + dpr_l[i] + q_l[i]
            Px += tp[i]
            traj.append(beta1)

    return _finish_derand(ps, tp, x, alpha, traj, r, "derand_fast", return_state)


def _finish_derand(ps, tp, x, alpha, traj, r, mode, return_state):
    indices = np.flatnonzero(x).astype(np.int64)
    dist = float(np.linalg.norm(tp[indices].mean(axis=0)))
    res = SampleResult(
        indices=indices,
        centroid_dist=dist,
        bound=ps.avg_price / math.sqrt(r),
        mode=mode,
        hard_bound=True,
    )
    if return_state:
        state = ConditionalState(
            t=ps.n,
            x=x.copy(),
            alpha=int(alpha),
            beta=float(traj[-1]),
            beta_trajectory=np.asarray(traj, dtype=np.float64),
        )
        return res, state
    return res


def derand_sample_by_halving(P, target: int) -> SampleResult:
    """Deterministic sample by repeated halving, keeping one half.

    Works on the largest power-of-two prefix of the input order and halves
    (keeping the plus side) while the current size exceeds ``target``.
    O(dn) total since the work per level shrinks geometrically.

    Hard guarantee: the sample centroid is within
    ``CHAIN_CONSTANT * diameter_upper / sqrt(|R|)`` of the prefix centroid;
    ``bound`` additionally folds in the (exactly known) prefix-to-global
    centroid offset so that ``centroid_dist <= bound`` always holds.
    ``target == n`` returns the whole set.
    """
    ps = as_point_set(P)
    n = ps.n
    if not 1 <= target <= n:
        raise DomainError(f"target size must satisfy 1 <= target <= n, got {target}, n={n}")
    delta_b = ps.diameter_upper
    if target == n:
        return SampleResult(
            indices=np.arange(n, dtype=np.int64),
            centroid_dist=0.0,
            bound=CHAIN_CONSTANT * delta_b / math.sqrt(n),
            mode="derand_halving",
            hard_bound=True,
        )
    pts = ps.points
    size = 1 << (n.bit_length() - 1)  # largest power of two <= n
    idx = np.arange(size, dtype=np.int64)
    offset = float(np.linalg.norm(pts[:size].mean(axis=0) - ps.centroid))
    while size > target:
        signs = _halving.derand_halving_signs(pts[idx])
        keep = 2 * np.arange(size // 2) + (signs < 0)  # plus side of each pair
        idx = idx[keep]
        size //= 2
    dist = float(np.linalg.norm(pts[idx].mean(axis=0) - ps.centroid))
    return SampleResult(
        indices=idx,
        centroid_dist=dist,
        bound=CHAIN_CONSTANT * delta_b / math.sqrt(size) + offset,
        mode="derand_halving",
        hard_bound=True,
    )

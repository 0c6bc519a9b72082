"""Hot sequential kernels, JIT-compiled when numba is available.

The greedy inner loops here are decision chains: every step reads the
outcome of the previous one, so they cannot be expressed as array
primitives without per-step interpreter overhead dominating the true O(d)
work.  numba compiles them to machine code (no fastmath: the IEEE
evaluation order is part of the deterministic contract).  When numba is
missing the callers fall back to equivalent numpy loops.
"""

from __future__ import annotations

import math

import numpy as np

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        def wrap(fn):
            return fn

        return wrap


@njit(cache=True)
def halving_signs(v):
    """Greedy signs for pair differences v: keep <V_t, v_{t+1}> nonpositive."""
    m, d = v.shape
    signs = np.empty(m, dtype=np.int8)
    V = np.zeros(d)
    for j in range(m):
        D = 0.0
        for c in range(d):
            D += V[c] * (v[j, c])
        if D <= 0.0:
            signs[j] = 1
            for c in range(d):
                V[c] += v[j, c]
        else:
            signs[j] = -1
            for c in range(d):
                V[c] -= v[j, c]
    return signs


@njit(cache=True)
def tree_levels(work, scratch, order, order_scratch, levels):
    """Run `levels` halving levels over contiguous power-of-two groups.

    Reorders rows level by level (plus half first, minus half second) via
    the double buffers; returns the per-level worst child-to-parent
    centroid distance and the final row order.
    """
    N, d = work.shape
    realized = np.zeros(levels)
    G = 1
    g = N
    for level in range(levels):
        m = g // 2
        worst = 0.0
        for b in range(G):
            lo = b * g
            V = np.zeros(d)
            for j in range(m):
                i0 = lo + 2 * j
                i1 = i0 + 1
                D = 0.0
                for c in range(d):
                    D += V[c] * (work[i0, c] - work[i1, c])
                if D <= 0.0:
                    pp, pm = i0, i1
                else:
                    pp, pm = i1, i0
                for c in range(d):
                    V[c] += work[pp, c] - work[pm, c]
                    scratch[lo + j, c] = work[pp, c]
                    scratch[lo + m + j, c] = work[pm, c]
                order_scratch[lo + j] = order[pp]
                order_scratch[lo + m + j] = order[pm]
            nv = 0.0
            for c in range(d):
                nv += V[c] * V[c]
            dist = math.sqrt(nv) / g
            if dist > worst:
                worst = dist
        realized[level] = worst
        tmp = work
        work = scratch
        scratch = tmp
        tmpi = order
        order = order_scratch
        order_scratch = tmpi
        G *= 2
        g = m
    return realized, order


@njit(cache=True)
def select_subset(tp, q, qcum, w, dpn, dpr, R, Qn, r, z0):
    """Conditional-expectation subset selection over centred points tp.

    Mirrors the prefix-sum recurrences of the O(dn) derandomized mean
    sampler; see sampling.derand_sample_fast for the quantity definitions.
    Returns the 0/1 assignment and the committed-expectation trajectory.
    """
    n, d = tp.shape
    x = np.zeros(n, dtype=np.int8)
    traj = np.empty(n + 1)
    traj[0] = z0
    Px = np.zeros(d)
    alpha = 0
    L = 0.0
    a = 0.0
    g = 0.0
    Qx = 0.0
    for i in range(n):
        remaining = n - i
        need = r - alpha
        if need == 0:
            for k in range(i, n):
                traj[k + 1] = traj[i]
            break
        if need == remaining:
            for k in range(i, n):
                x[k] = 1
                traj[k + 1] = traj[i]
            break
        mrem = remaining - 1
        s = 0.0
        for c in range(d):
            s += Px[c] * tp[i, c]
        tailQ = Qn - qcum[i]
        baseM = a - g - s
        if mrem > 1:
            pair_den = mrem * (mrem - 1.0)
            c20 = (need * (need - 1.0)) / pair_den
            c21 = ((need - 1.0) * (need - 2.0)) / pair_den
        else:
            c20 = 0.0
            c21 = 0.0
        Rt = R[i + 1]
        rho0 = need / mrem
        beta0 = (Qx + rho0 * tailQ) + 2.0 * (L + rho0 * baseM + c20 * Rt)
        rho1 = (need - 1.0) / mrem
        beta1 = (Qx + q[i] + rho1 * tailQ) + 2.0 * (
            (L + s) + rho1 * (baseM + w[i]) + c21 * Rt
        )
        if beta0 <= beta1:
            g += s
            traj[i + 1] = beta0
        else:
            x[i] = 1
            alpha += 1
            Qx += q[i]
            L += s
            a += dpn[i]
            g += s + dpr[i] + q[i]
            for c in range(d):
                Px[c] += tp[i, c]
            traj[i + 1] = beta1
    return x, traj

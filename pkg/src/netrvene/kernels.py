"""Hot numeric kernels.

Every kernel exists twice: an explicit loop compiled with numba
(``*_loop``) and a vectorised numpy twin (``*_np``).  The public names at the
bottom of the module point at one or the other depending on
:data:`netrvene._jit.JIT_ENABLED`.  Both twins must agree to round-off; the
test suite checks that on random inputs.

Graphs are stored sink-major (CSR over in-edges): the in-edges of node ``v``
occupy ``indptr[v]:indptr[v + 1]`` in ``src`` and ``w``.
"""

import numpy as np

from ._jit import JIT_ENABLED, njit

# --------------------------------------------------------------------------
# weights and propagation


@njit(cache=True)
def drift_weights_loop(indptr, w, mu):
    out = np.empty_like(w)
    n = indptr.shape[0] - 1
    for v in range(n):
        lo = indptr[v]
        hi = indptr[v + 1]
        k = hi - lo
        if k == 0:
            continue
        inc = mu / k
        for j in range(lo, hi):
            out[j] = (1.0 - mu) * w[j] + inc
    return out


def drift_weights_np(indptr, w, mu):
    deg = np.diff(indptr)
    return (1.0 - mu) * w + mu / np.repeat(deg, deg)


@njit(cache=True)
def uniform_weights_loop(indptr):
    n = indptr.shape[0] - 1
    out = np.empty(indptr[n], dtype=np.float64)
    for v in range(n):
        lo = indptr[v]
        hi = indptr[v + 1]
        for j in range(lo, hi):
            out[j] = 1.0 / (hi - lo)
    return out


def uniform_weights_np(indptr):
    deg = np.diff(indptr)
    return 1.0 / np.repeat(deg, deg).astype(np.float64)


@njit(cache=True)
def propagate_loop(indptr, src, w, x, lam):
    n = x.shape[0]
    out = np.empty(n, dtype=np.float64)
    for v in range(n):
        lo = indptr[v]
        hi = indptr[v + 1]
        if hi == lo:
            out[v] = x[v]
            continue
        acc = 0.0
        for j in range(lo, hi):
            acc += w[j] * x[src[j]]
        out[v] = (1.0 - lam[v]) * x[v] + lam[v] * acc
    return out


def propagate_np(indptr, src, w, x, lam):
    n = x.shape[0]
    deg = np.diff(indptr)
    sink = np.repeat(np.arange(n), deg)
    acc = np.bincount(sink, weights=w * x[src], minlength=n)
    out = (1.0 - lam) * x + lam * acc
    return np.where(deg == 0, x, out)


# --------------------------------------------------------------------------
# candidate enumeration


@njit(cache=True)
def candidates_loop(indptr, src, targets, healthy, n):
    # healthy must be sorted ascending; output is grouped by target, sources ascending
    mark = np.zeros(n, dtype=np.bool_)
    cptr = np.zeros(targets.shape[0] + 1, dtype=np.int64)
    total = 0
    for i in range(targets.shape[0]):
        v = targets[i]
        for j in range(indptr[v], indptr[v + 1]):
            mark[src[j]] = True
        for u in healthy:
            if not mark[u] and u != v:
                total += 1
        for j in range(indptr[v], indptr[v + 1]):
            mark[src[j]] = False
        cptr[i + 1] = total
    csrc = np.empty(total, dtype=np.int64)
    pos = 0
    for i in range(targets.shape[0]):
        v = targets[i]
        for j in range(indptr[v], indptr[v + 1]):
            mark[src[j]] = True
        for u in healthy:
            if not mark[u] and u != v:
                csrc[pos] = u
                pos += 1
        for j in range(indptr[v], indptr[v + 1]):
            mark[src[j]] = False
    return cptr, csrc


def candidates_np(indptr, src, targets, healthy, n):
    nt, nh = targets.shape[0], healthy.shape[0]
    if nt == 0 or nh == 0:
        return np.zeros(nt + 1, dtype=np.int64), np.zeros(0, dtype=np.int64)
    deg = np.diff(indptr)
    existing = np.repeat(np.arange(n, dtype=np.int64), deg) * n + src
    grid_v = np.repeat(targets, nh)
    grid_u = np.tile(healthy, nt)
    keep = ~np.isin(grid_v * n + grid_u, existing) & (grid_u != grid_v)
    counts = keep.reshape(nt, nh).sum(axis=1)
    cptr = np.zeros(nt + 1, dtype=np.int64)
    np.cumsum(counts, out=cptr[1:])
    return cptr, grid_u[keep].astype(np.int64)


# --------------------------------------------------------------------------
# per-target score coefficients
#
# For target v and candidate source u the single-addition scores are affine:
#   myopic     lam_v * (a1 * x_u + c1) - pen
#   lookahead  (2 - lam_v) * lam_v * (a1 * x_u + c1)
#              + lam_v * (a2 * x1_u + c2) - pen
# where x1 is the no-action health one step ahead.


@njit(cache=True)
def coefficients_loop(indptr, src, w, x, x1, mu, targets, simplified, lookahead):
    nt = targets.shape[0]
    a1 = np.zeros(nt)
    c1 = np.zeros(nt)
    a2 = np.zeros(nt)
    c2 = np.zeros(nt)
    for i in range(nt):
        v = targets[i]
        lo = indptr[v]
        hi = indptr[v + 1]
        k = hi - lo
        if k == 0:
            continue
        if simplified:
            sx = 0.0
            sx1 = 0.0
            for j in range(lo, hi):
                sx += x[src[j]]
                sx1 += x1[src[j]]
            a1[i] = 1.0 / k
            c1[i] = -sx / (k * k)
            if lookahead:
                a2[i] = 1.0 / k
                c2[i] = -sx1 / (k * k)
            continue
        kk = float(k * k)
        delta = 0.0
        psi = 0.0
        for j in range(lo, hi):
            xr = x[src[j]]
            delta += w[j] * xr
            psi += ((1.0 - mu) * w[j] + mu / k) * xr
        theta = 0.0
        pi = 0.0
        zeta = 0.0
        if lookahead:
            for j in range(lo, hi):
                xr1 = x1[src[j]]
                theta += w[j] * xr1
                pi += xr1
                zeta += ((1.0 - mu) * ((1.0 - mu) * w[j] + mu / k) + mu / k) * xr1
            theta *= (1.0 - mu) * kk
            pi *= mu / k
        sa1 = 0.0
        sb1 = 0.0
        sa2 = 0.0
        sb2 = 0.0
        for j in range(lo, hi):
            if k == 1:
                p = 1.0
            else:
                p = (1.0 - w[j]) / (k - 1)
            gam = kk * (1.0 - w[j]) + 1.0
            q = p / gam
            sa1 += q
            sb1 += q * kk * (delta - w[j] * x[src[j]])
            if lookahead:
                sa2 += p * ((1.0 - mu) / gam + mu / k)
                sb2 += q * (
                    theta + gam * pi
                    - ((1.0 - mu) * kk * w[j] + mu * gam / k) * x1[src[j]]
                )
        a1[i] = sa1
        c1[i] = sb1 - psi
        if lookahead:
            a2[i] = sa2
            c2[i] = sb2 - zeta
    return a1, c1, a2, c2


def coefficients_np(indptr, src, w, x, x1, mu, targets, simplified, lookahead):
    nt = targets.shape[0]
    lo = indptr[targets]
    deg = indptr[targets + 1] - lo
    idx = np.repeat(lo - (np.cumsum(deg) - deg), deg) + np.arange(deg.sum())
    owner = np.repeat(np.arange(nt), deg)
    k = np.repeat(deg, deg).astype(np.float64)
    we = w[idx]
    xr = x[src[idx]]
    xr1 = x1[src[idx]]
    kf = deg.astype(np.float64)
    safe = np.where(kf > 0, kf, 1.0)

    def seg(vals):
        return np.bincount(owner, weights=vals, minlength=nt)

    a1 = np.zeros(nt)
    c1 = np.zeros(nt)
    a2 = np.zeros(nt)
    c2 = np.zeros(nt)
    has = deg > 0
    if simplified:
        a1[has] = 1.0 / safe[has]
        c1 = -seg(xr) / safe**2
        if lookahead:
            a2[has] = 1.0 / safe[has]
            c2 = -seg(xr1) / safe**2
        c1[~has] = 0.0
        c2[~has] = 0.0
        return a1, c1, a2, c2
    kk = k * k
    delta = seg(we * xr)
    psi = seg(((1.0 - mu) * we + mu / k) * xr)
    p = np.where(k == 1, 1.0, (1.0 - we) / np.maximum(k - 1, 1.0))
    gam = kk * (1.0 - we) + 1.0
    q = p / gam
    a1 = seg(q)
    c1 = seg(q * kk * (np.repeat(delta, deg) - we * xr)) - psi
    if lookahead:
        theta = (1.0 - mu) * kf**2 * seg(we * xr1)
        pi = mu / safe * seg(xr1)
        zeta = seg(((1.0 - mu) * ((1.0 - mu) * we + mu / k) + mu / k) * xr1)
        a2 = seg(p * ((1.0 - mu) / gam + mu / k))
        b2 = seg(q * (np.repeat(theta, deg) + gam * np.repeat(pi, deg)
                      - ((1.0 - mu) * kk * we + mu * gam / k) * xr1))
        c2 = b2 - zeta
        c2[~has] = 0.0
    return a1, c1, a2, c2


@njit(cache=True)
def score_loop(targets, cptr, csrc, x, x1, lam, a1, c1, a2, c2, lookahead, pen):
    out = np.empty(csrc.shape[0])
    for i in range(targets.shape[0]):
        lv = lam[targets[i]]
        f1 = (2.0 - lv) * lv if lookahead else lv
        for j in range(cptr[i], cptr[i + 1]):
            u = csrc[j]
            s = f1 * (a1[i] * x[u] + c1[i]) - pen
            if lookahead:
                s += lv * (a2[i] * x1[u] + c2[i])
            out[j] = s
    return out


def score_np(targets, cptr, csrc, x, x1, lam, a1, c1, a2, c2, lookahead, pen):
    cnt = np.diff(cptr)
    lv = np.repeat(lam[targets], cnt)
    f1 = (2.0 - lv) * lv if lookahead else lv
    s = f1 * (np.repeat(a1, cnt) * x[csrc] + np.repeat(c1, cnt)) - pen
    if lookahead:
        s = s + lv * (np.repeat(a2, cnt) * x1[csrc] + np.repeat(c2, cnt))
    return s


@njit(cache=True)
def linearized_loop(indptr, src, w, grad, targets, cptr, csrc):
    out = np.empty(csrc.shape[0])
    for i in range(targets.shape[0]):
        v = targets[i]
        lo = indptr[v]
        hi = indptr[v + 1]
        k = hi - lo
        base = 0.0
        for j in range(lo, hi):
            p = 1.0 if k == 1 else (1.0 - w[j]) / (k - 1)
            base += p * grad[v, src[j]]
        for j in range(cptr[i], cptr[i + 1]):
            out[j] = grad[v, csrc[j]] - base
    return out


def linearized_np(indptr, src, w, grad, targets, cptr, csrc):
    n = indptr.shape[0] - 1
    deg = np.diff(indptr)
    sink = np.repeat(np.arange(n), deg)
    k = np.repeat(deg, deg).astype(np.float64)
    p = np.where(k == 1, 1.0, (1.0 - w) / np.maximum(k - 1, 1.0))
    base = np.bincount(sink, weights=p * grad[sink, src], minlength=n)
    cnt = np.diff(cptr)
    v = np.repeat(targets, cnt)
    return grad[v, csrc] - base[v]


# --------------------------------------------------------------------------
# top-k with strict positivity


@njit(cache=True)
def select_loop(cptr, csrc, scores, caps):
    chosen = np.zeros(csrc.shape[0], dtype=np.bool_)
    for i in range(cptr.shape[0] - 1):
        lo = cptr[i]
        hi = cptr[i + 1]
        cap = caps[i]
        if cap <= 0 or hi == lo:
            continue
        npos = 0
        for j in range(lo, hi):
            if scores[j] > 0.0:
                npos += 1
        if npos == 0:
            continue
        pos = np.empty(npos, dtype=np.int64)
        neg = np.empty(npos)
        c = 0
        for j in range(lo, hi):
            if scores[j] > 0.0:
                pos[c] = j
                neg[c] = -scores[j]
                c += 1
        # stable sort keeps ascending source among equal scores
        order = np.argsort(neg, kind="mergesort")
        take = min(cap, npos)
        for r in range(take):
            chosen[pos[order[r]]] = True
    return chosen


def select_np(cptr, csrc, scores, caps):
    cnt = np.diff(cptr)
    group = np.repeat(np.arange(cnt.shape[0]), cnt)
    chosen = np.zeros(csrc.shape[0], dtype=bool)
    pos = np.flatnonzero(scores > 0.0)
    if pos.size == 0:
        return chosen
    g = group[pos]
    order = np.lexsort((csrc[pos], -scores[pos], g))
    pos, g = pos[order], g[order]
    starts = np.flatnonzero(np.r_[True, g[1:] != g[:-1]])
    first = np.repeat(starts, np.diff(np.r_[starts, g.size]))
    rank = np.arange(g.size) - first
    chosen[pos[rank < caps[g]]] = True
    return chosen


# --------------------------------------------------------------------------
# dispatch

if JIT_ENABLED:
    drift_weights = drift_weights_loop
    uniform_weights = uniform_weights_loop
    propagate = propagate_loop
    candidates = candidates_loop
    coefficients = coefficients_loop
    score_candidates = score_loop
    linearized_scores = linearized_loop
    select_topk = select_loop
else:
    drift_weights = drift_weights_np
    uniform_weights = uniform_weights_np
    propagate = propagate_np
    candidates = candidates_np
    coefficients = coefficients_np
    score_candidates = score_np
    linearized_scores = linearized_np
    select_topk = select_np

KERNELS = {
    "drift_weights": (drift_weights_loop, drift_weights_np),
    "uniform_weights": (uniform_weights_loop, uniform_weights_np),
    "propagate": (propagate_loop, propagate_np),
    "candidates": (candidates_loop, candidates_np),
    "coefficients": (coefficients_loop, coefficients_np),
    "score_candidates": (score_loop, score_np),
    "linearized_scores": (linearized_loop, linearized_np),
    "select_topk": (select_loop, select_np),
}

"""Numba kernels for the lasso coordinate-descent solver and CART forests.

Everything here is a pure function of its array arguments; all randomness is
pre-drawn by the callers and passed in (bootstrap index matrices and "tapes"
of uniforms consumed by the per-node feature subsampling).  Kernels are
cached to disk so repeat runs skip compilation.
"""

from __future__ import annotations

import numpy as np
from numba import njit

LEAF = np.int16(-1)


# ---------------------------------------------------------------------------
# Lasso / coordinate descent
# ---------------------------------------------------------------------------

@njit(cache=True)
def soft_threshold(z, lam):
    if z > lam:
        return z - lam
    if z < -lam:
        return z + lam
    return 0.0


@njit(cache=True)
def cd_solve(xt, y, lam, beta, active, tol, max_iter):
    """Cyclic coordinate descent on standardized data.

    xt is (p, n) with each active row zero-mean and unit mean-square; y is
    centred.  beta is updated in place.  Returns (cycles_used, converged).
    """
    p, n = xt.shape
    r = y.copy()
    for j in range(p):
        if beta[j] != 0.0:
            for i in range(n):
                r[i] -= xt[j, i] * beta[j]
    for it in range(max_iter):
        max_delta = 0.0
        for j in range(p):
            if not active[j]:
                continue
            s = 0.0
            for i in range(n):
                s += xt[j, i] * r[i]
            z = s / n + beta[j]
            nb = soft_threshold(z, lam)
            d = nb - beta[j]
            if d != 0.0:
                for i in range(n):
                    r[i] -= d * xt[j, i]
                beta[j] = nb
            ad = abs(d)
            if ad > max_delta:
                max_delta = ad
        if max_delta < tol:
            return it + 1, True
    return max_iter, False


@njit(cache=True)
def standardize_columns(xt, means, sds, active):
    """Fill means/sds (population sd) per row of the (p, n) matrix xt and
    scale it in place; rows with zero spread are deactivated and zeroed."""
    p, n = xt.shape
    for j in range(p):
        m = 0.0
        for i in range(n):
            m += xt[j, i]
        m /= n
        v = 0.0
        for i in range(n):
            d = xt[j, i] - m
            v += d * d
        v /= n
        means[j] = m
        if v > 0.0:
            sd = np.sqrt(v)
            sds[j] = sd
            active[j] = True
            for i in range(n):
                xt[j, i] = (xt[j, i] - m) / sd
        else:
            sds[j] = 0.0
            active[j] = False
            for i in range(n):
                xt[j, i] = 0.0


@njit(cache=True)
def lasso_path_std(xt_std, y_c, lambdas, active, tol, max_iter):
    """Warm-started solutions along a descending lambda grid.

    Returns (betas (L, p) on the standardized scale, converged flags).
    """
    L = lambdas.shape[0]
    p = xt_std.shape[0]
    betas = np.zeros((L, p))
    converged = np.ones(L, dtype=np.bool_)
    beta = np.zeros(p)
    for k in range(L):
        _, ok = cd_solve(xt_std, y_c, lambdas[k], beta, active, tol, max_iter)
        converged[k] = ok
        for j in range(p):
            betas[k, j] = beta[j]
    return betas, converged


@njit(cache=True)
def cv_lasso_sse(xt, y, fold_ids, n_folds, lambdas, tol, max_iter):
    """Held-out squared error per lambda, summed over all validation rows.

    xt is the raw (p, n) feature matrix.  For each fold the training part is
    standardized from scratch, the path is solved warm-started from large to
    small lambda, and predictions are made on the held-out rows with the
    coefficients mapped back to the original scale.
    """
    p, n = xt.shape
    L = lambdas.shape[0]
    sse = np.zeros(L)
    for f in range(n_folds):
        m = 0
        for i in range(n):
            if fold_ids[i] != f:
                m += 1
        xtr = np.empty((p, m))
        ytr = np.empty(m)
        k = 0
        for i in range(n):
            if fold_ids[i] != f:
                for j in range(p):
                    xtr[j, k] = xt[j, i]
                ytr[k] = y[i]
                k += 1
        means = np.empty(p)
        sds = np.empty(p)
        active = np.empty(p, dtype=np.bool_)
        standardize_columns(xtr, means, sds, active)
        ymean = 0.0
        for i in range(m):
            ymean += ytr[i]
        ymean /= m
        for i in range(m):
            ytr[i] -= ymean
        beta = np.zeros(p)
        for kk in range(L):
            cd_solve(xtr, ytr, lambdas[kk], beta, active, tol, max_iter)
            # validation error with original-scale coefficients
            for i in range(n):
                if fold_ids[i] == f:
                    pred = ymean
                    for j in range(p):
                        if active[j] and beta[j] != 0.0:
                            pred += beta[j] / sds[j] * (xt[j, i] - means[j])
                    d = pred - y[i]
                    sse[kk] += d * d
    return sse


# ---------------------------------------------------------------------------
# CART regression trees
# ---------------------------------------------------------------------------

@njit(cache=True)
def _cosort(v, w, lo, hi):
    """Sort v[lo:hi] ascending in place, applying the same permutation to w.

    Iterative quicksort with median-of-three pivot values, three-way
    partitioning (duplicate-heavy columns such as a binary flag collapse in
    one pass), and insertion sort for short runs.  Deterministic, not
    stable; callers must not depend on the order within ties.
    """
    stack_lo = np.empty(64, dtype=np.int64)
    stack_hi = np.empty(64, dtype=np.int64)
    top = 0
    stack_lo[0] = lo
    stack_hi[0] = hi
    while top >= 0:
        a = stack_lo[top]
        b = stack_hi[top]
        top -= 1
        while b - a > 16:
            mid = (a + b - 1) >> 1
            x0 = v[a]
            x1 = v[mid]
            x2 = v[b - 1]
            if x0 > x1:
                x0, x1 = x1, x0
            if x1 > x2:
                x1, x2 = x2, x1
            if x0 > x1:
                x0, x1 = x1, x0
            pv = x1
            lt = a
            i = a
            gt = b - 1
            while i <= gt:
                if v[i] < pv:
                    v[i], v[lt] = v[lt], v[i]
                    w[i], w[lt] = w[lt], w[i]
                    lt += 1
                    i += 1
                elif v[i] > pv:
                    v[i], v[gt] = v[gt], v[i]
                    w[i], w[gt] = w[gt], w[i]
                    gt -= 1
                else:
                    i += 1
            # segments with values below and above the pivot band
            if lt - a < b - gt - 1:
                top += 1
                stack_lo[top] = gt + 1
                stack_hi[top] = b
                b = lt
            else:
                top += 1
                stack_lo[top] = a
                stack_hi[top] = lt
                a = gt + 1
        for k in range(a + 1, b):
            vv = v[k]
            ww = w[k]
            j = k - 1
            while j >= a and v[j] > vv:
                v[j + 1] = v[j]
                w[j + 1] = w[j]
                j -= 1
            v[j + 1] = vv
            w[j + 1] = ww


@njit(cache=True)
def build_forest(x, y, rows, tapes, min_leaf, mtry,
                 feat, thresh, left, right, value, counts):
    """Grow one regression tree per row of ``rows``.

    x is (n, p); rows (T, m) holds each tree's training row indices
    (bootstrap resample or 0..n-1); tapes (T, cap*mtry) supplies the
    uniforms consumed by per-node feature draws.  Tree t's nodes are written
    into feat/thresh/left/right/value[t] with local ids; counts[t] receives
    its node count.  A node with feature < 0 is a leaf.

    Splits minimize the children's summed squared deviation.  A node becomes
    a leaf when it is too small to split, its targets are constant, or no
    sampled feature offers a split that strictly reduces the parent's
    squared deviation with both children holding at least min_leaf rows.
    Split candidates are midpoints between consecutive distinct sorted
    values.  Targets are centred per tree before the variance arithmetic and
    leaf means are taken over the raw targets.
    """
    n_trees, m = rows.shape
    p = x.shape[1]
    cap = feat.shape[1]

    xbt = np.empty((p, m))
    yb = np.empty(m)
    yc = np.empty(m)
    pos = np.empty(m, dtype=np.int64)
    buf = np.empty(m, dtype=np.int64)
    vals = np.empty(m)
    yv = np.empty(m)
    pool = np.empty(p, dtype=np.int64)
    stack_lo = np.empty(cap, dtype=np.int64)
    stack_hi = np.empty(cap, dtype=np.int64)
    stack_id = np.empty(cap, dtype=np.int64)

    for t in range(n_trees):
        ymean = 0.0
        for k in range(m):
            r = rows[t, k]
            yb[k] = y[r]
            ymean += y[r]
            for j in range(p):
                xbt[j, k] = x[r, j]
        ymean /= m
        for k in range(m):
            yc[k] = yb[k] - ymean
            pos[k] = k

        tape = tapes[t]
        tp = 0
        n_nodes = 1
        top = 0
        stack_lo[0] = 0
        stack_hi[0] = m
        stack_id[0] = 0

        while top >= 0:
            lo = stack_lo[top]
            hi = stack_hi[top]
            node = stack_id[top]
            top -= 1
            cnt = hi - lo

            s = 0.0
            q = 0.0
            raw = 0.0
            for k in range(lo, hi):
                v = yc[pos[k]]
                s += v
                q += v * v
                raw += yb[pos[k]]
            leaf_value = raw / cnt
            sse_parent = q - s * s / cnt
            value[t, node] = leaf_value

            if cnt < 2 * min_leaf or sse_parent <= 0.0:
                feat[t, node] = LEAF
                continue

            for j in range(p):
                pool[j] = j
            best_red = 0.0
            best_f = -1
            best_t = 0.0
            for d in range(mtry):
                u = tape[tp]
                tp += 1
                pick = d + int(u * (p - d))
                if pick >= p:
                    pick = p - 1
                pool[d], pool[pick] = pool[pick], pool[d]
                f = pool[d]

                for k in range(cnt):
                    vals[k] = xbt[f, pos[lo + k]]
                    yv[k] = yc[pos[lo + k]]
                _cosort(vals, yv, 0, cnt)

                ls = 0.0
                qs = 0.0
                for i in range(1, cnt):
                    w = yv[i - 1]
                    ls += w
                    qs += w * w
                    v_prev = vals[i - 1]
                    v_here = vals[i]
                    if v_here <= v_prev:
                        continue
                    if i < min_leaf or cnt - i < min_leaf:
                        continue
                    sse_l = qs - ls * ls / i
                    rs = s - ls
                    rq = q - qs
                    sse_r = rq - rs * rs / (cnt - i)
                    red = sse_parent - sse_l - sse_r
                    if red > best_red:
                        tt = 0.5 * (v_prev + v_here)
                        if tt >= v_here:
                            tt = v_prev
                        best_red = red
                        best_f = f
                        best_t = tt

            if best_f < 0:
                feat[t, node] = LEAF
                continue

            nl = 0
            for k in range(lo, hi):
                if xbt[best_f, pos[k]] <= best_t:
                    buf[nl] = pos[k]
                    nl += 1
            nr = nl
            for k in range(lo, hi):
                if xbt[best_f, pos[k]] > best_t:
                    buf[nr] = pos[k]
                    nr += 1
            for k in range(cnt):
                pos[lo + k] = buf[k]

            left_id = n_nodes
            right_id = n_nodes + 1
            n_nodes += 2
            feat[t, node] = np.int16(best_f)
            thresh[t, node] = best_t
            left[t, node] = left_id
            right[t, node] = right_id

            top += 1
            stack_lo[top] = lo
            stack_hi[top] = lo + nl
            stack_id[top] = left_id
            top += 1
            stack_lo[top] = lo + nl
            stack_hi[top] = hi
            stack_id[top] = right_id

        counts[t] = n_nodes


@njit(cache=True)
def forest_predict(feat, thresh, left, right, value, offsets, x, out):
    """Mean over trees of the leaf value reached by each row of x.

    Iterates tree-major so each tree's nodes stay cache-resident.
    """
    q = x.shape[0]
    n_trees = offsets.shape[0] - 1
    for i in range(q):
        out[i] = 0.0
    for t in range(n_trees):
        base = offsets[t]
        for i in range(q):
            node = base
            while feat[node] >= 0:
                if x[i, feat[node]] <= thresh[node]:
                    node = left[node]
                else:
                    node = right[node]
            out[i] += value[node]
    inv = 1.0 / n_trees
    for i in range(q):
        out[i] *= inv

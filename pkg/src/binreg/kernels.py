"""Hot numeric kernels with a numba path and a pure-numpy path.

Both paths perform the same floating-point operations in the same order
(sequential accumulation, stable sorts), so tree structures agree exactly
between them. ``grow_tree``, ``predict_tree`` and ``lasso_cd`` dispatch on
:func:`binreg._jit.numba_enabled` at call time.
"""
import numpy as np

from ._jit import njit, numba_enabled

# Relative round-off floor below which a split gain is treated as zero.
GAIN_RTOL = 1e-12


# ---------------------------------------------------------------------------
# tree growing
# ---------------------------------------------------------------------------

@njit
def _grow_tree_nb(X, g, h, rows, feat_keys, max_features, max_depth,
                  min_samples_leaf, min_child_weight, reg_lambda, gamma):
    n = rows.shape[0]
    p = X.shape[1]
    cap = 2 * n + 1
    feature = np.full(cap, -1, np.int64)
    threshold = np.zeros(cap)
    left = np.full(cap, -1, np.int64)
    right = np.full(cap, -1, np.int64)
    value = np.zeros(cap)
    count = np.zeros(cap, np.int64)
    gain = np.zeros(cap)
    sum_g = np.zeros(cap)
    sum_h = np.zeros(cap)

    buf = rows.copy()
    tmp = np.empty(n, np.int64)
    xs = np.empty(n)
    st_node = np.empty(cap, np.int64)
    st_start = np.empty(cap, np.int64)
    st_end = np.empty(cap, np.int64)
    st_depth = np.empty(cap, np.int64)
    top = 1
    st_node[0] = 0
    st_start[0] = 0
    st_end[0] = n
    st_depth[0] = 0
    n_nodes = 1
    use_subset = max_features < p
    all_feats = np.arange(p)

    while top > 0:
        top -= 1
        node = st_node[top]
        s = st_start[top]
        e = st_end[top]
        d = st_depth[top]
        m = e - s

        G = 0.0
        H = 0.0
        for i in range(s, e):
            r = buf[i]
            G += g[r]
            H += h[r]
        sum_g[node] = G
        sum_h[node] = H
        count[node] = m
        if H + reg_lambda > 0.0:
            value[node] = -G / (H + reg_lambda)

        if max_depth >= 0 and d >= max_depth:
            continue
        if m < 2 * min_samples_leaf or m < 2 or H < 2.0 * min_child_weight:
            continue

        parent = G * G / (H + reg_lambda)
        if use_subset:
            cands = np.sort(np.argsort(feat_keys[node], kind="mergesort")[:max_features])
        else:
            cands = all_feats

        best_gain = -np.inf
        best_scale = 0.0
        best_f = -1
        best_thr = 0.0
        for ci in range(cands.shape[0]):
            f = cands[ci]
            for i in range(m):
                xs[i] = X[buf[s + i], f]
            order = np.argsort(xs[:m], kind="mergesort")
            GL = 0.0
            HL = 0.0
            for k in range(m - 1):
                r = buf[s + order[k]]
                GL += g[r]
                HL += h[r]
                nl = k + 1
                if nl < min_samples_leaf:
                    continue
                if m - nl < min_samples_leaf:
                    break
                x0 = xs[order[k]]
                x1 = xs[order[k + 1]]
                if not (x1 > x0):
                    continue
                HR = H - HL
                if HL < min_child_weight or HR < min_child_weight:
                    continue
                GR = G - GL
                sl = GL * GL / (HL + reg_lambda)
                sr = GR * GR / (HR + reg_lambda)
                gn = 0.5 * (sl + sr - parent) - gamma
                if gn > best_gain:
                    best_gain = gn
                    best_scale = sl + sr + parent
                    best_f = f
                    thr = 0.5 * (x0 + x1)
                    if thr >= x1:
                        thr = x0
                    best_thr = thr

        if best_f < 0 or not (best_gain > GAIN_RTOL * best_scale):
            continue

        nl = 0
        for i in range(s, e):
            r = buf[i]
            if X[r, best_f] <= best_thr:
                tmp[nl] = r
                nl += 1
        j = nl
        for i in range(s, e):
            r = buf[i]
            if not (X[r, best_f] <= best_thr):
                tmp[j] = r
                j += 1
        for i in range(m):
            buf[s + i] = tmp[i]

        lc = n_nodes
        rc = n_nodes + 1
        n_nodes += 2
        feature[node] = best_f
        threshold[node] = best_thr
        left[node] = lc
        right[node] = rc
        gain[node] = best_gain

        st_node[top] = rc
        st_start[top] = s + nl
        st_end[top] = e
        st_depth[top] = d + 1
        top += 1
        st_node[top] = lc
        st_start[top] = s
        st_end[top] = s + nl
        st_depth[top] = d + 1
        top += 1

    return (feature[:n_nodes].copy(), threshold[:n_nodes].copy(),
            left[:n_nodes].copy(), right[:n_nodes].copy(),
            value[:n_nodes].copy(), count[:n_nodes].copy(),
            gain[:n_nodes].copy(), sum_g[:n_nodes].copy(), sum_h[:n_nodes].copy())


def _grow_tree_np(X, g, h, rows, feat_keys, max_features, max_depth,
                  min_samples_leaf, min_child_weight, reg_lambda, gamma):
    p = X.shape[1]
    feature, threshold, left, right = [], [], [], []
    value, count, gain, sum_g, sum_h = [], [], [], [], []

    def new_node():
        for lst, v in ((feature, -1), (threshold, 0.0), (left, -1), (right, -1),
                       (value, 0.0), (count, 0), (gain, 0.0), (sum_g, 0.0), (sum_h, 0.0)):
            lst.append(v)
        return len(feature) - 1

    new_node()
    stack = [(0, rows, 0)]
    use_subset = max_features < p
    while stack:
        node, idx, d = stack.pop()
        m = idx.shape[0]
        gi = g[idx]
        hi = h[idx]
        G = float(np.cumsum(gi)[-1]) if m else 0.0
        H = float(np.cumsum(hi)[-1]) if m else 0.0
        sum_g[node] = G
        sum_h[node] = H
        count[node] = m
        if H + reg_lambda > 0.0:
            value[node] = -G / (H + reg_lambda)

        if max_depth >= 0 and d >= max_depth:
            continue
        if m < 2 * min_samples_leaf or m < 2 or H < 2.0 * min_child_weight:
            continue

        parent = G * G / (H + reg_lambda)
        if use_subset:
            cands = np.sort(np.argsort(feat_keys[node], kind="stable")[:max_features])
        else:
            cands = range(p)

        nl_all = np.arange(1, m)
        size_ok = (nl_all >= min_samples_leaf) & (m - nl_all >= min_samples_leaf)
        best_gain = -np.inf
        best_scale = 0.0
        best_f = -1
        best_thr = 0.0
        for f in cands:
            xs = X[idx, f]
            order = np.argsort(xs, kind="stable")
            xsort = xs[order]
            GL = np.cumsum(gi[order])[:-1]
            HL = np.cumsum(hi[order])[:-1]
            HR = H - HL
            ok = size_ok & (xsort[1:] > xsort[:-1]) & (HL >= min_child_weight) & (HR >= min_child_weight)
            if not ok.any():
                continue
            GR = G - GL
            sl = GL * GL / (HL + reg_lambda)
            sr = GR * GR / (HR + reg_lambda)
            gn = np.where(ok, 0.5 * (sl + sr - parent) - gamma, -np.inf)
            k = int(np.argmax(gn))
            if gn[k] > best_gain:
                best_gain = float(gn[k])
                best_scale = float(sl[k] + sr[k] + parent)
                best_f = int(f)
                x0, x1 = float(xsort[k]), float(xsort[k + 1])
                thr = 0.5 * (x0 + x1)
                best_thr = x0 if thr >= x1 else thr

        if best_f < 0 or not (best_gain > GAIN_RTOL * best_scale):
            continue

        go_left = X[idx, best_f] <= best_thr
        lc = new_node()
        rc = new_node()
        feature[node] = best_f
        threshold[node] = best_thr
        left[node] = lc
        right[node] = rc
        gain[node] = best_gain
        stack.append((rc, idx[~go_left], d + 1))
        stack.append((lc, idx[go_left], d + 1))

    return (np.array(feature, np.int64), np.array(threshold, float),
            np.array(left, np.int64), np.array(right, np.int64),
            np.array(value, float), np.array(count, np.int64),
            np.array(gain, float), np.array(sum_g, float), np.array(sum_h, float))


def grow_tree(X, g, h, rows=None, feat_keys=None, max_features=None, max_depth=-1,
              min_samples_leaf=1, min_child_weight=0.0, reg_lambda=0.0, gamma=0.0,
              use_numba=None):
    """Grow one second-order regression tree.

    Each node stores ``-G / (H + reg_lambda)`` as its value, where G and H
    are the node's gradient and hessian sums. A split is kept only when

        0.5 * [G_L^2/(H_L+lam) + G_R^2/(H_R+lam) - G^2/(H+lam)] - gamma > 0

    (up to a relative round-off floor). With ``g = -y``, ``h = 1`` and
    ``reg_lambda = gamma = 0`` this is a CART tree whose gain is half the
    SSE reduction and whose leaves predict the mean.

    ``feat_keys`` holds one row of random keys per potential node; node k
    considers the ``max_features`` features with the smallest keys.

    Returns a tuple of node arrays ``(feature, threshold, left, right,
    value, n_samples, gain, sum_g, sum_h)``; leaves have ``left == -1``.
    """
    X = np.ascontiguousarray(X, dtype=np.float64)
    g = np.ascontiguousarray(g, dtype=np.float64)
    h = np.ascontiguousarray(h, dtype=np.float64)
    n, p = X.shape
    rows = np.arange(n, dtype=np.int64) if rows is None else np.ascontiguousarray(rows, dtype=np.int64)
    if max_features is None or max_features >= p:
        max_features = p
        feat_keys = np.zeros((1, p))
    elif feat_keys is None or feat_keys.shape[0] < 2 * rows.shape[0] + 1:
        raise ValueError("feat_keys must have a row for every potential node")
    feat_keys = np.ascontiguousarray(feat_keys, dtype=np.float64)
    max_depth = -1 if max_depth is None else int(max_depth)
    args = (X, g, h, rows, feat_keys, int(max_features), max_depth,
            int(min_samples_leaf), float(min_child_weight), float(reg_lambda), float(gamma))
    if rows.shape[0] == 0:
        raise ValueError("cannot grow a tree on zero rows")
    if use_numba is None:
        use_numba = numba_enabled()
    return _grow_tree_nb(*args) if use_numba else _grow_tree_np(*args)


# ---------------------------------------------------------------------------
# tree traversal
# ---------------------------------------------------------------------------

@njit
def _apply_tree_nb(feature, threshold, left, right, X):
    n = X.shape[0]
    out = np.empty(n, np.int64)
    for i in range(n):
        node = 0
        while left[node] != -1:
            if X[i, feature[node]] <= threshold[node]:
                node = left[node]
            else:
                node = right[node]
        out[i] = node
    return out


def _apply_tree_np(feature, threshold, left, right, X):
    n = X.shape[0]
    node = np.zeros(n, np.int64)
    active = np.nonzero(left[node] != -1)[0]
    while active.size:
        cur = node[active]
        go_left = X[active, feature[cur]] <= threshold[cur]
        node[active] = np.where(go_left, left[cur], right[cur])
        active = active[left[node[active]] != -1]
    return node


def apply_tree(feature, threshold, left, right, X, use_numba=None):
    """Leaf index reached by every row of ``X``."""
    X = np.ascontiguousarray(X, dtype=np.float64)
    if use_numba is None:
        use_numba = numba_enabled()
    fn = _apply_tree_nb if use_numba else _apply_tree_np
    return fn(np.asarray(feature, np.int64), np.asarray(threshold, float),
              np.asarray(left, np.int64), np.asarray(right, np.int64), X)


def predict_tree(feature, threshold, left, right, value, X, use_numba=None):
    leaves = apply_tree(feature, threshold, left, right, X, use_numba=use_numba)
    return np.asarray(value, float)[leaves]


# ---------------------------------------------------------------------------
# lasso coordinate descent
# ---------------------------------------------------------------------------

@njit
def _lasso_cd_nb(Z, y, alpha, tol, max_iter, w):
    n, p = Z.shape
    col_sq = np.zeros(p)
    for j in range(p):
        acc = 0.0
        for i in range(n):
            acc += Z[i, j] * Z[i, j]
        col_sq[j] = acc / n
    r = y.copy()
    for j in range(p):
        if w[j] != 0.0:
            for i in range(n):
                r[i] -= Z[i, j] * w[j]
    n_iter = 0
    converged = False
    while n_iter < max_iter:
        n_iter += 1
        max_change = 0.0
        for j in range(p):
            if col_sq[j] == 0.0:
                continue
            old = w[j]
            acc = 0.0
            for i in range(n):
                acc += Z[i, j] * r[i]
            rho = acc / n + col_sq[j] * old
            if rho > alpha:
                new = (rho - alpha) / col_sq[j]
            elif rho < -alpha:
                new = (rho + alpha) / col_sq[j]
            else:
                new = 0.0
            delta = new - old
            if delta != 0.0:
                for i in range(n):
                    r[i] -= Z[i, j] * delta
                w[j] = new
                if abs(delta) > max_change:
                    max_change = abs(delta)
        if max_change < tol:
            converged = True
            break
    return w, n_iter, converged


def _seqdot(a, b):
    # sequential left-to-right sum, matching the compiled loop bit for bit
    return np.cumsum(a * b)[-1] if a.size else 0.0


def _lasso_cd_np(Z, y, alpha, tol, max_iter, w):
    n, p = Z.shape
    Zf = np.asfortranarray(Z)
    col_sq = np.array([_seqdot(Zf[:, j], Zf[:, j]) / n for j in range(p)])
    r = y.copy()
    for j in range(p):
        if w[j] != 0.0:
            r -= Zf[:, j] * w[j]
    n_iter = 0
    converged = False
    while n_iter < max_iter:
        n_iter += 1
        max_change = 0.0
        for j in range(p):
            if col_sq[j] == 0.0:
                continue
            old = w[j]
            zj = Zf[:, j]
            rho = _seqdot(zj, r) / n + col_sq[j] * old
            if rho > alpha:
                new = (rho - alpha) / col_sq[j]
            elif rho < -alpha:
                new = (rho + alpha) / col_sq[j]
            else:
                new = 0.0
            delta = new - old
            if delta != 0.0:
                r -= zj * delta
                w[j] = new
                max_change = max(max_change, abs(delta))
        if max_change < tol:
            converged = True
            break
    return w, n_iter, converged


def lasso_cd(Z, y, alpha, tol=1e-10, max_iter=10000, w0=None, use_numba=None):
    """Cyclic coordinate descent for ``(1/2n)||Zw - y||^2 + alpha*||w||_1``.

    ``Z`` and ``y`` are expected centred (no intercept is fitted here).
    Stops when the largest coefficient change in a full sweep is below
    ``tol``. Returns ``(w, n_iter, converged)``.
    """
    Z = np.ascontiguousarray(Z, dtype=np.float64)
    y = np.ascontiguousarray(y, dtype=np.float64)
    w = np.zeros(Z.shape[1]) if w0 is None else np.array(w0, dtype=np.float64)
    if use_numba is None:
        use_numba = numba_enabled()
    fn = _lasso_cd_nb if use_numba else _lasso_cd_np
    w, n_iter, converged = fn(Z, y, float(alpha), float(tol), int(max_iter), w)
    return w, int(n_iter), bool(converged)

"""Linear models: OLS, lasso (coordinate descent) and linear epsilon-SVR."""
import warnings

import numpy as np

from .. import kernels
from .base import ModelError, RegressorSpec, TrainedModel, make_meta

RIDGE_JITTER = 1e-10


class ConvergenceWarning(UserWarning):
    pass


def _check(X, y):
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    if X.shape[0] != y.shape[0]:
        raise ModelError("X and y have different row counts")
    if X.shape[0] < 1:
        raise ModelError("cannot fit on zero rows")
    return X, y


def _names(feature_names, p):
    return list(feature_names) if feature_names is not None else [f"x{i}" for i in range(p)]


def _standardize(X):
    mu = X.mean(axis=0)
    sd = X.std(axis=0)
    safe = np.where(sd > 0, sd, 1.0)
    return (X - mu) / safe, mu, sd, safe


def _linear_model(alg, hp, coef, intercept, names, X, seed=0, **meta):
    params = {"coef": np.asarray(coef, float), "intercept": float(intercept),
              "feature_std": X.std(axis=0)}
    params.update({k: v for k, v in meta.items() if k in ("alpha", "converged", "n_iter", "jitter_columns")})
    extra = {k: v for k, v in meta.items() if k not in params}
    return TrainedModel(RegressorSpec(alg, hp, seed), params, _names(names, X.shape[1]),
                        make_meta(seed, X.shape[0], **extra))


def fit_ols(X, y, feature_names=None):
    """Least squares with intercept, solved from the centred normal equations.

    A ridge jitter of ``1e-10 * trace/p`` is added when the Gram matrix is
    rank deficient; the offending columns are reported in a warning and
    in ``parameters["jitter_columns"]``.
    """
    X, y = _check(X, y)
    n, p = X.shape
    if n <= p:
        raise ModelError(f"OLS needs more rows ({n}) than features ({p})")
    mu = X.mean(axis=0)
    ybar = float(y.mean())
    Xc = X - mu
    yc = y - ybar
    A = Xc.T @ Xc
    b = Xc.T @ yc
    jitter_cols = []
    rank = np.linalg.matrix_rank(A) if p else 0
    if rank < p:
        jitter_cols = _degenerate_columns(Xc, names=_names(feature_names, p))
        warnings.warn(f"rank-deficient design (rank {rank} < {p}); degenerate columns: {jitter_cols}; "
                      f"adding ridge jitter {RIDGE_JITTER}", RuntimeWarning, stacklevel=2)
        scale = np.trace(A) / p if p and np.trace(A) > 0 else 1.0
        A = A + RIDGE_JITTER * scale * np.eye(p)
    w = np.linalg.solve(A, b) if p else np.zeros(0)
    return _linear_model("ols", {}, w, ybar - mu @ w, feature_names, X, jitter_columns=jitter_cols)


def _degenerate_columns(Xc, names):
    out = []
    for j in range(Xc.shape[1]):
        if not np.any(Xc[:, j]):
            out.append(names[j])
            continue
        others = np.delete(Xc, j, axis=1)
        if others.shape[1] and np.linalg.matrix_rank(Xc) == np.linalg.matrix_rank(others):
            out.append(names[j])
    return out


def fit_lasso(X, y, feature_names=None, alpha=1.0, tol=1e-9, max_iter=10000):
    """Lasso by cyclic coordinate descent with soft-thresholding.

    Minimizes ``(1/2n)||Zw - y_c||^2 + alpha*||w||_1`` where ``Z`` is
    ``X`` standardized to zero mean and unit (population) variance and
    ``y_c`` is the centred target; coefficients are mapped back to the
    original feature scale and the intercept is never penalized. All
    zero coefficients are returned when ``alpha >= max_j |z_j^T y_c|/n``.
    """
    X, y = _check(X, y)
    if alpha < 0:
        raise ModelError("alpha must be >= 0")
    Z, mu, sd, safe = _standardize(X)
    ybar = float(y.mean())
    w, n_iter, converged = kernels.lasso_cd(Z, y - ybar, alpha, tol=tol, max_iter=max_iter)
    if not converged:
        warnings.warn(f"lasso did not converge in {max_iter} sweeps", ConvergenceWarning,
                      stacklevel=2)
    coef = np.where(sd > 0, w / safe, 0.0)
    return _linear_model("lasso", {"alpha": alpha, "tol": tol, "max_iter": max_iter}, coef,
                         ybar - mu @ coef, feature_names, X, alpha=float(alpha),
                         converged=converged, n_iter=n_iter)


def lasso_kkt_residual(model, X, y):
    """Per-coordinate KKT check on the standardized problem.

    Returns ``(corr, w_std)`` with ``corr_j = z_j^T r / n``. At a solution
    ``|corr_j| <= alpha`` where ``w_j = 0`` and ``corr_j = alpha*sign(w_j)``
    otherwise.
    """
    X, y = _check(X, y)
    Z, mu, sd, safe = _standardize(X)
    w_std = model.parameters["coef"] * safe
    r = (y - y.mean()) - Z @ w_std
    return Z.T @ r / X.shape[0], w_std


def _best_intercept(u, eps):
    """argmin_b sum_i max(0, |b - u_i| - eps); midpoint of the minimizing interval."""
    lo = np.sort(u - eps)
    hi = np.sort(u + eps)
    cand = np.unique(np.concatenate([lo, hi]))
    # right-derivative at each candidate: #(hi <= c) - #(lo > c)
    d_right = np.searchsorted(hi, cand, side="right") - (lo.size - np.searchsorted(lo, cand, side="right"))
    k = int(np.argmax(d_right >= 0))
    if d_right[k] == 0 and k + 1 < cand.size:
        return 0.5 * (cand[k] + cand[k + 1])
    return float(cand[k])


def _svr_objective(Z, y, w, b, C, eps):
    r = Z @ w + b - y
    return 0.5 * float(w @ w) + C * float(np.maximum(np.abs(r) - eps, 0.0).sum())


def fit_linear_svr(X, y, feature_names=None, C=1.0, epsilon=0.0, max_iter=5000, tol=1e-6):
    """Linear epsilon-insensitive SVR by deterministic subgradient descent.

    Minimizes ``0.5||w||^2 + C * sum_i max(0, |x_i^T w + b - y_i| - eps)``
    over standardized features with the intercept unregularized. The
    problem is rescaled by ``s = std(y)`` (equivalent with ``C/s``).

    Each iteration sets ``b`` to its exact minimizer for the current ``w``
    and takes a normalized subgradient step in ``w``. Step schedule: start
    at 1 (in units of ``s``), halve after 25 iterations without a new best
    objective and restart from the best iterate; stop when the step falls
    below ``tol`` or after ``max_iter`` iterations.
    """
    X, y = _check(X, y)
    if C <= 0:
        raise ModelError("C must be > 0")
    if epsilon < 0:
        raise ModelError("epsilon must be >= 0")
    Z, mu, sd, safe = _standardize(X)
    Z = np.where(sd > 0, Z, 0.0)
    s = float(y.std())
    s = s if s > 0 else 1.0
    ys = y / s
    eps = epsilon / s
    Cs = C / s
    p = Z.shape[1]

    w = np.zeros(p)
    b = _best_intercept(ys, eps)
    best_f = _svr_objective(Z, ys, w, b, Cs, eps)
    best_w, best_b = w.copy(), b
    step = 1.0
    stale = 0
    converged = False
    it = 0
    for it in range(1, int(max_iter) + 1):
        r = Z @ w + b - ys
        act = np.sign(r) * (np.abs(r) > eps)
        gw = w + Cs * (Z.T @ act)
        norm = float(np.sqrt(gw @ gw))
        if norm == 0.0:
            converged = True
            break
        w = w - step * gw / norm
        b = _best_intercept(ys - Z @ w, eps)
        f = _svr_objective(Z, ys, w, b, Cs, eps)
        if f < best_f:
            best_f, best_w, best_b, stale = f, w.copy(), b, 0
        else:
            stale += 1
            if stale >= 25:
                step *= 0.5
                stale = 0
                w, b = best_w.copy(), best_b
                if step < tol:
                    converged = True
                    break
    if not converged:
        warnings.warn(f"linear SVR subgradient did not converge in {max_iter} iterations",
                      ConvergenceWarning, stacklevel=2)
    coef = np.where(sd > 0, best_w * s / safe, 0.0)
    intercept = best_b * s - mu @ coef
    return _linear_model("linear_svr", {"C": C, "epsilon": epsilon, "max_iter": max_iter, "tol": tol},
                         coef, intercept, feature_names, X, converged=converged, n_iter=it)


def svr_objective(model, X, y):
    """Primal SVR objective of a fitted model on the standardized scale."""
    X, y = _check(X, y)
    Z, mu, sd, safe = _standardize(X)
    w_std = model.parameters["coef"] * safe
    b = float(model.parameters["intercept"] + mu @ model.parameters["coef"])
    hp = model.spec.params()
    return _svr_objective(np.where(sd > 0, Z, 0.0), y, w_std, b, hp["C"], hp["epsilon"])

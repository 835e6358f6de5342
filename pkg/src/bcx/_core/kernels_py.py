"""Pure-numpy kernels: reference implementation of the hot numeric loops.

The compiled extension in ``_kernels.pyx`` mirrors these functions exactly
(same normal-equation + Cholesky formulation, same pivot tolerance, same
IRLS update with step halving), so either backend may serve any call.
All fits here are *weighted* and *without intercept*: centering is handled
upstream by the surrogate module, which passes pre-centered columns.
"""
from __future__ import annotations

import numpy as np

# Relative pivot tolerance below which a normal matrix is treated as singular.
PIVOT_TOL = 1e-10


def sq_distances(X, x):
    """Squared Euclidean distance from each row of X to the vector x."""
    X = np.ascontiguousarray(X, dtype=np.float64)
    x = np.asarray(x, dtype=np.float64)
    if X.shape[1] == 0:
        return np.zeros(X.shape[0])
    diff = X - x
    return np.einsum("ij,ij->i", diff, diff)


def _cholesky(G):
    """Lower Cholesky factor of G, or None when G is singular at PIVOT_TOL.

    Hand-rolled (column loop) so the pivot test matches the compiled kernel.
    """
    k = G.shape[0]
    if k == 0:
        return np.zeros((0, 0))
    scale = np.max(np.diag(G))
    if scale <= 0.0:
        return None
    L = np.zeros((k, k))
    for j in range(k):
        d = G[j, j] - np.dot(L[j, :j], L[j, :j])
        if d <= PIVOT_TOL * scale:
            return None
        L[j, j] = np.sqrt(d)
        if j + 1 < k:
            L[j + 1 :, j] = (G[j + 1 :, j] - L[j + 1 :, :j] @ L[j, :j]) / L[j, j]
    return L


def _chol_solve(L, b):
    k = L.shape[0]
    z = np.zeros(k)
    for i in range(k):
        z[i] = (b[i] - np.dot(L[i, :i], z[:i])) / L[i, i]
    out = np.zeros(k)
    for i in range(k - 1, -1, -1):
        out[i] = (z[i] - np.dot(L[i + 1 :, i], out[i + 1 :])) / L[i, i]
    return out


def ols_fit(X, y, w):
    """Weighted least squares without intercept.

    Returns (coef, rss); coef is all-zero and rss is +inf when the normal
    matrix is singular.
    """
    X = np.ascontiguousarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    w = np.asarray(w, dtype=np.float64)
    k = X.shape[1]
    yWy = float(np.dot(y * w, y))
    if k == 0:
        return np.zeros(0), yWy
    Xw = X * w[:, None]
    G = X.T @ Xw
    b = Xw.T @ y
    L = _cholesky(G)
    if L is None:
        return np.zeros(k), np.inf
    coef = _chol_solve(L, b)
    rss = yWy - float(np.dot(coef, b))
    return coef, max(rss, 0.0)


def ols_scan(D, C, y, w):
    """RSS of the weighted fit on [D | C[:, j]] for every candidate column j.

    Singular augmented designs yield +inf so the caller skips them.
    """
    D = np.ascontiguousarray(D, dtype=np.float64)
    C = np.ascontiguousarray(C, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    w = np.asarray(w, dtype=np.float64)
    n, k = D.shape
    m = C.shape[1]
    wy = w * y
    yWy = float(np.dot(wy, y))
    Dw = D * w[:, None]
    Gd = D.T @ Dw  # (k, k)
    bd = Dw.T @ y  # (k,)
    cross = Dw.T @ C  # (k, m)
    cgram = np.einsum("ij,ij->j", C * w[:, None], C)  # (m,)
    cy = C.T @ wy  # (m,)
    out = np.empty(m)
    G = np.empty((k + 1, k + 1))
    b = np.empty(k + 1)
    G[:k, :k] = Gd
    b[:k] = bd
    for j in range(m):
        G[:k, k] = cross[:, j]
        G[k, :k] = cross[:, j]
        G[k, k] = cgram[j]
        b[k] = cy[j]
        L = _cholesky(G)
        if L is None:
            out[j] = np.inf
            continue
        coef = _chol_solve(L, b)
        out[j] = max(yWy - float(np.dot(coef, b)), 0.0)
    return out


def _sigmoid(z):
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def _deviance(y, p, w):
    p = np.clip(p, 1e-12, 1.0 - 1e-12)
    yc = np.clip(y, 1e-12, 1.0 - 1e-12)
    ll = yc * np.log(yc / p) + (1.0 - yc) * np.log((1.0 - yc) / (1.0 - p))
    return 2.0 * float(np.dot(w, ll))


def irls_fit(X, y, w, offset, beta0=None, max_iter=100, tol=1e-8):
    """Weighted logistic fit of soft targets y via IRLS, linear part offset + X @ beta.

    Newton steps on the weighted deviance with step halving when a step
    would increase it. Returns (coef, deviance, converged).
    """
    X = np.ascontiguousarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    w = np.asarray(w, dtype=np.float64)
    offset = np.asarray(offset, dtype=np.float64)
    n, k = X.shape
    beta = np.zeros(k) if beta0 is None else np.array(beta0, dtype=np.float64)
    if k == 0:
        return beta, _deviance(y, _sigmoid(offset), w), True
    p = _sigmoid(offset + X @ beta)
    dev = _deviance(y, p, w)
    converged = False
    for _ in range(max_iter):
        wk = w * np.clip(p * (1.0 - p), 1e-10, None)
        Xw = X * wk[:, None]
        G = X.T @ Xw
        g = X.T @ (w * (y - p))
        L = _cholesky(G)
        if L is None:
            return beta, np.inf, False
        step = _chol_solve(L, g)
        # step halving keeps the deviance non-increasing
        t = 1.0
        for _ in range(16):
            beta_new = beta + t * step
            p_new = _sigmoid(offset + X @ beta_new)
            dev_new = _deviance(y, p_new, w)
            if dev_new <= dev + 1e-12:
                break
            t *= 0.5
        if np.max(np.abs(t * step)) < tol:
            beta, p, dev = beta_new, p_new, dev_new
            converged = True
            break
        beta, p, dev = beta_new, p_new, dev_new
    return beta, dev, converged


def logistic_scan(D, C, y, w, offset, beta0, max_iter=25, tol=1e-8):
    """Deviance of the IRLS fit on [D | C[:, j]] for every candidate column j.

    Warm-started from the current coefficients (beta0, 0). Singular designs
    yield +inf.
    """
    D = np.ascontiguousarray(D, dtype=np.float64)
    C = np.ascontiguousarray(C, dtype=np.float64)
    n, k = D.shape
    m = C.shape[1]
    out = np.empty(m)
    X = np.empty((n, k + 1))
    X[:, :k] = D
    start = np.zeros(k + 1)
    start[:k] = beta0
    for j in range(m):
        X[:, k] = C[:, j]
        _, dev, _ = irls_fit(X, y, w, offset, beta0=start, max_iter=max_iter, tol=tol)
        out[j] = dev
    return out

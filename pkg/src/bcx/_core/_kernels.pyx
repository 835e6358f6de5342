# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels for the hot numeric loops.

Mirrors bcx._core.kernels_py: same normal-equation/Cholesky formulation,
same PIVOT_TOL, same IRLS update with step halving. Keep the two in sync.
"""
import numpy as np

cimport numpy as cnp
from libc.math cimport exp, fabs, log, sqrt

cnp.import_array()

cdef double PIVOT_TOL = 1e-10


def sq_distances(double[:, ::1] X, double[::1] x):
    cdef Py_ssize_t n = X.shape[0], p = X.shape[1], i, j
    cdef double acc, d
    out_arr = np.zeros(n, dtype=np.float64)
    cdef double[::1] out = out_arr
    for i in range(n):
        acc = 0.0
        for j in range(p):
            d = X[i, j] - x[j]
            acc += d * d
        out[i] = acc
    return out_arr


cdef int _cholesky(double[:, ::1] G, double[:, ::1] L, Py_ssize_t k) noexcept nogil:
    """Lower Cholesky factor of G into L; returns -1 when singular at PIVOT_TOL."""
    cdef Py_ssize_t i, j, t
    cdef double scale = 0.0, d, acc
    if k == 0:
        return 0
    for j in range(k):
        if G[j, j] > scale:
            scale = G[j, j]
    if scale <= 0.0:
        return -1
    for j in range(k):
        acc = 0.0
        for t in range(j):
            acc += L[j, t] * L[j, t]
        d = G[j, j] - acc
        if d <= PIVOT_TOL * scale:
            return -1
        L[j, j] = sqrt(d)
        for i in range(j + 1, k):
            acc = 0.0
            for t in range(j):
                acc += L[i, t] * L[j, t]
            L[i, j] = (G[i, j] - acc) / L[j, j]
    return 0


cdef void _chol_solve(double[:, ::1] L, double[::1] b, double[::1] z,
                      double[::1] out, Py_ssize_t k) noexcept nogil:
    cdef Py_ssize_t i, t
    cdef double acc
    for i in range(k):
        acc = b[i]
        for t in range(i):
            acc -= L[i, t] * z[t]
        z[i] = acc / L[i, i]
    for i in range(k - 1, -1, -1):
        acc = z[i]
        for t in range(i + 1, k):
            acc -= L[t, i] * out[t]
        out[i] = acc / L[i, i]


def ols_fit(double[:, ::1] X, double[::1] y, double[::1] w):
    cdef Py_ssize_t n = X.shape[0], k = X.shape[1], i, j, t
    cdef double yWy = 0.0, acc, rss
    for i in range(n):
        yWy += w[i] * y[i] * y[i]
    coef_arr = np.zeros(k, dtype=np.float64)
    if k == 0:
        return coef_arr, yWy
    G_arr = np.zeros((k, k), dtype=np.float64)
    L_arr = np.zeros((k, k), dtype=np.float64)
    b_arr = np.zeros(k, dtype=np.float64)
    z_arr = np.zeros(k, dtype=np.float64)
    cdef double[:, ::1] G = G_arr, L = L_arr
    cdef double[::1] b = b_arr, z = z_arr, coef = coef_arr
    with nogil:
        for j in range(k):
            for t in range(j, k):
                acc = 0.0
                for i in range(n):
                    acc += w[i] * X[i, j] * X[i, t]
                G[j, t] = acc
                G[t, j] = acc
            acc = 0.0
            for i in range(n):
                acc += w[i] * X[i, j] * y[i]
            b[j] = acc
    if _cholesky(G, L, k) != 0:
        return np.zeros(k, dtype=np.float64), float("inf")
    _chol_solve(L, b, z, coef, k)
    acc = 0.0
    for j in range(k):
        acc += coef[j] * b[j]
    rss = yWy - acc
    if rss < 0.0:
        rss = 0.0
    return coef_arr, rss


def ols_scan(double[:, ::1] D, double[:, ::1] C, double[::1] y, double[::1] w):
    cdef Py_ssize_t n = D.shape[0], k = D.shape[1], m = C.shape[1]
    cdef Py_ssize_t i, j, t, u
    cdef double yWy = 0.0, acc
    for i in range(n):
        yWy += w[i] * y[i] * y[i]
    Gd_arr = np.zeros((k, k), dtype=np.float64)
    bd_arr = np.zeros(k, dtype=np.float64)
    G_arr = np.zeros((k + 1, k + 1), dtype=np.float64)
    L_arr = np.zeros((k + 1, k + 1), dtype=np.float64)
    b_arr = np.zeros(k + 1, dtype=np.float64)
    z_arr = np.zeros(k + 1, dtype=np.float64)
    coef_arr = np.zeros(k + 1, dtype=np.float64)
    out_arr = np.empty(m, dtype=np.float64)
    cdef double[:, ::1] Gd = Gd_arr, G = G_arr, L = L_arr
    cdef double[::1] bd = bd_arr, b = b_arr, z = z_arr, coef = coef_arr, out = out_arr
    cdef double inf = float("inf")
    cdef int sing
    with nogil:
        for j in range(k):
            for t in range(j, k):
                acc = 0.0
                for i in range(n):
                    acc += w[i] * D[i, j] * D[i, t]
                Gd[j, t] = acc
                Gd[t, j] = acc
            acc = 0.0
            for i in range(n):
                acc += w[i] * D[i, j] * y[i]
            bd[j] = acc
        for u in range(m):
            for j in range(k):
                for t in range(k):
                    G[j, t] = Gd[j, t]
                b[j] = bd[j]
            for j in range(k):
                acc = 0.0
                for i in range(n):
                    acc += w[i] * D[i, j] * C[i, u]
                G[j, k] = acc
                G[k, j] = acc
            acc = 0.0
            for i in range(n):
                acc += w[i] * C[i, u] * C[i, u]
            G[k, k] = acc
            acc = 0.0
            for i in range(n):
                acc += w[i] * C[i, u] * y[i]
            b[k] = acc
            sing = _cholesky(G, L, k + 1)
            if sing != 0:
                out[u] = inf
                continue
            _chol_solve(L, b, z, coef, k + 1)
            acc = 0.0
            for j in range(k + 1):
                acc += coef[j] * b[j]
            acc = yWy - acc
            out[u] = acc if acc > 0.0 else 0.0
    return out_arr


cdef inline double _sig(double v) noexcept nogil:
    cdef double e
    if v >= 0.0:
        return 1.0 / (1.0 + exp(-v))
    e = exp(v)
    return e / (1.0 + e)


cdef double _dev(double[::1] y, double[::1] p, double[::1] w, Py_ssize_t n) noexcept nogil:
    cdef Py_ssize_t i
    cdef double acc = 0.0, pi, yi
    for i in range(n):
        pi = p[i]
        if pi < 1e-12:
            pi = 1e-12
        elif pi > 1.0 - 1e-12:
            pi = 1.0 - 1e-12
        yi = y[i]
        if yi < 1e-12:
            yi = 1e-12
        elif yi > 1.0 - 1e-12:
            yi = 1.0 - 1e-12
        acc += w[i] * (yi * log(yi / pi) + (1.0 - yi) * log((1.0 - yi) / (1.0 - pi)))
    return 2.0 * acc


cdef int _irls(double[:, ::1] X, double[::1] y, double[::1] w, double[::1] offset,
               double[::1] beta, Py_ssize_t n, Py_ssize_t k, int max_iter, double tol,
               double[:, ::1] G, double[:, ::1] L, double[::1] g, double[::1] z,
               double[::1] step, double[::1] p, double[::1] pn, double[::1] bn,
               double* dev_out) noexcept nogil:
    """IRLS core. Returns 1 converged, 0 cap reached, -1 singular."""
    cdef Py_ssize_t i, j, t, it, h
    cdef double acc, wk, dev, dev_new, tstep, mx
    for i in range(n):
        acc = offset[i]
        for j in range(k):
            acc += X[i, j] * beta[j]
        p[i] = _sig(acc)
    dev = _dev(y, p, w, n)
    if k == 0:
        dev_out[0] = dev
        return 1
    for it in range(max_iter):
        for j in range(k):
            for t in range(j, k):
                acc = 0.0
                for i in range(n):
                    wk = p[i] * (1.0 - p[i])
                    if wk < 1e-10:
                        wk = 1e-10
                    acc += w[i] * wk * X[i, j] * X[i, t]
                G[j, t] = acc
                G[t, j] = acc
            acc = 0.0
            for i in range(n):
                acc += w[i] * (y[i] - p[i]) * X[i, j]
            g[j] = acc
        if _cholesky(G, L, k) != 0:
            dev_out[0] = dev
            return -1
        _chol_solve(L, g, z, step, k)
        tstep = 1.0
        for h in range(16):
            for j in range(k):
                bn[j] = beta[j] + tstep * step[j]
            for i in range(n):
                acc = offset[i]
                for j in range(k):
                    acc += X[i, j] * bn[j]
                pn[i] = _sig(acc)
            dev_new = _dev(y, pn, w, n)
            if dev_new <= dev + 1e-12:
                break
            tstep *= 0.5
        mx = 0.0
        for j in range(k):
            acc = fabs(tstep * step[j])
            if acc > mx:
                mx = acc
            beta[j] = bn[j]
        for i in range(n):
            p[i] = pn[i]
        dev = dev_new
        if mx < tol:
            dev_out[0] = dev
            return 1
    dev_out[0] = dev
    return 0


def irls_fit(double[:, ::1] X, double[::1] y, double[::1] w, double[::1] offset,
             beta0=None, int max_iter=100, double tol=1e-8):
    cdef Py_ssize_t n = X.shape[0], k = X.shape[1]
    beta_arr = np.zeros(k, dtype=np.float64) if beta0 is None \
        else np.array(beta0, dtype=np.float64)
    G_arr = np.zeros((k, k), dtype=np.float64)
    L_arr = np.zeros((k, k), dtype=np.float64)
    scratch = np.zeros((4, k), dtype=np.float64)
    pwork = np.zeros((2, n), dtype=np.float64)
    cdef double[:, ::1] G = G_arr, L = L_arr
    cdef double[::1] beta = beta_arr
    cdef double[::1] g = scratch[0], z = scratch[1], step = scratch[2], bn = scratch[3]
    cdef double[::1] p = pwork[0], pn = pwork[1]
    cdef double dev = 0.0
    cdef int status
    with nogil:
        status = _irls(X, y, w, offset, beta, n, k, max_iter, tol,
                       G, L, g, z, step, p, pn, bn, &dev)
    if status < 0:
        return beta_arr, float("inf"), False
    return beta_arr, dev, status == 1


def logistic_scan(double[:, ::1] D, double[:, ::1] C, double[::1] y, double[::1] w,
                  double[::1] offset, double[::1] beta0, int max_iter=25,
                  double tol=1e-8):
    cdef Py_ssize_t n = D.shape[0], k = D.shape[1], m = C.shape[1]
    cdef Py_ssize_t i, j, u
    X_arr = np.zeros((n, k + 1), dtype=np.float64)
    out_arr = np.empty(m, dtype=np.float64)
    G_arr = np.zeros((k + 1, k + 1), dtype=np.float64)
    L_arr = np.zeros((k + 1, k + 1), dtype=np.float64)
    scratch = np.zeros((5, k + 1), dtype=np.float64)
    pwork = np.zeros((2, n), dtype=np.float64)
    cdef double[:, ::1] X = X_arr, G = G_arr, L = L_arr
    cdef double[::1] out = out_arr
    cdef double[::1] beta = scratch[0], g = scratch[1], z = scratch[2]
    cdef double[::1] step = scratch[3], bn = scratch[4]
    cdef double[::1] p = pwork[0], pn = pwork[1]
    cdef double dev = 0.0, inf = float("inf")
    cdef int status
    with nogil:
        for i in range(n):
            for j in range(k):
                X[i, j] = D[i, j]
        for u in range(m):
            for i in range(n):
                X[i, k] = C[i, u]
            for j in range(k):
                beta[j] = beta0[j]
            beta[k] = 0.0
            status = _irls(X, y, w, offset, beta, n, k + 1, max_iter, tol,
                           G, L, g, z, step, p, pn, bn, &dev)
            out[u] = inf if status < 0 else dev
    return out_arr

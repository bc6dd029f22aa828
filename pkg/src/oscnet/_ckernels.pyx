# cython: language_level=3
"""Compiled versions of the kernels in ``_pykernels``.

Same signatures, same arithmetic order. Import through ``oscnet._backend``.
"""

import numpy as np

from libc.math cimport exp, log, log1p, sqrt, fabs, INFINITY


cdef inline double _sigmoid(double x) nogil:
    cdef double e
    if x >= 0.0:
        return 1.0 / (1.0 + exp(-x))
    e = exp(x)
    return e / (1.0 + e)


def sweep_h(double[:, ::1] h, const double[:, ::1] coef, const double[:, ::1] tau2,
            const long[::1] order, const double[::1] uniforms, double[::1] probs,
            double w, double v0, double[::1] resid, const double[::1] beta,
            const long[:, ::1] pair_index, double inv_var_seq, bint use_sim):
    cdef Py_ssize_t n = h.shape[0]
    cdef Py_ssize_t t, i, j, k, flat
    cdef double log_prior_odds, half_log_v0, b, b2t, log_m1, log_m0, cur, bj
    cdef double d1, d0, g, r, e1, e0, p1, new, delta

    if w >= 1.0:
        log_prior_odds = INFINITY
    elif w <= 0.0:
        log_prior_odds = -INFINITY
    else:
        log_prior_odds = log(w) - log1p(-w)
    half_log_v0 = 0.5 * log(v0)

    with nogil:
        for t in range(order.shape[0]):
            flat = order[t]
            i = flat // n
            j = flat - i * n
            b = coef[i, j]
            b2t = b * b / tau2[i, j]
            log_m1 = -0.5 * b2t
            log_m0 = -half_log_v0 - 0.5 * b2t / v0
            cur = h[i, j]

            bj = beta[j] if use_sim else 0.0
            if bj != 0.0:
                d1 = 0.0
                d0 = 0.0
                for k in range(n):
                    if k == i or k == j:
                        continue
                    g = h[k, j] * bj
                    if g == 0.0:
                        continue
                    r = resid[pair_index[i, k]]
                    e1 = (1.0 - cur) * g
                    e0 = (v0 - cur) * g
                    d1 += e1 * e1 - 2.0 * r * e1
                    d0 += e0 * e0 - 2.0 * r * e0
                log_m1 -= 0.5 * inv_var_seq * d1
                log_m0 -= 0.5 * inv_var_seq * d0

            if log_prior_odds == INFINITY:
                p1 = 1.0
            elif log_prior_odds == -INFINITY:
                p1 = 0.0
            else:
                p1 = _sigmoid(log_prior_odds + log_m1 - log_m0)
            probs[t] = p1
            new = 1.0 if uniforms[t] < p1 else v0

            if new != cur:
                if bj != 0.0:
                    delta = new - cur
                    for k in range(n):
                        if k == i or k == j:
                            continue
                        g = h[k, j] * bj
                        if g != 0.0:
                            resid[pair_index[i, k]] -= delta * g
                h[i, j] = new


cdef int _lstsq_subset(const double[:, ::1] a, const double[::1] b, int[::1] idx, int k,
                       double[:, ::1] work, double[::1] rhs, double[::1] out) nogil:
    """Householder QR least squares on the columns ``idx[:k]`` of ``a``.

    Writes the k coefficients to ``out``. Returns -1 if a pivot vanishes.
    """
    cdef Py_ssize_t m = a.shape[0]
    cdef Py_ssize_t r, c, col, p
    cdef double norm, alpha, vnorm2, s, tau
    for r in range(m):
        rhs[r] = b[r]
        for c in range(k):
            work[r, c] = a[r, idx[c]]

    for col in range(k):
        norm = 0.0
        for r in range(col, m):
            norm += work[r, col] * work[r, col]
        norm = sqrt(norm)
        if norm == 0.0:
            return -1
        alpha = -norm if work[col, col] >= 0.0 else norm
        # v = x - alpha e1 stored in place of the column
        work[col, col] -= alpha
        vnorm2 = 0.0
        for r in range(col, m):
            vnorm2 += work[r, col] * work[r, col]
        if vnorm2 > 0.0:
            tau = 2.0 / vnorm2
            for c in range(col + 1, k):
                s = 0.0
                for r in range(col, m):
                    s += work[r, col] * work[r, c]
                s *= tau
                for r in range(col, m):
                    work[r, c] -= s * work[r, col]
            s = 0.0
            for r in range(col, m):
                s += work[r, col] * rhs[r]
            s *= tau
            for r in range(col, m):
                rhs[r] -= s * work[r, col]
        # R diagonal lives in out for now; column below diagonal is scratch
        out[col] = alpha

    # back substitution: R[col, col] = out[col], R[col, c] = work[col, c] for c > col
    for p in range(k):
        col = k - 1 - p
        s = rhs[col]
        for c in range(col + 1, k):
            s -= work[col, c] * rhs[c]
        if fabs(out[col]) == 0.0:
            return -1
        rhs[col] = s / out[col]
    for c in range(k):
        out[c] = rhs[c]
    return 0


def nnls(const double[:, ::1] a, const double[::1] b, int max_iter):
    cdef Py_ssize_t m = a.shape[0]
    cdef Py_ssize_t n = a.shape[1]
    cdef Py_ssize_t r, c, j
    cdef int k, it = 0, best, status
    cdef double tol, colsum, maxcol = 1.0, gmax, alpha, ratio, s

    x_arr = np.zeros(n)
    cdef double[::1] x = x_arr
    cdef double[::1] z = np.zeros(n)
    cdef double[::1] grad = np.zeros(n)
    cdef double[::1] resid = np.zeros(m)
    cdef double[::1] coef = np.zeros(n)
    cdef int[::1] passive = np.zeros(n, dtype=np.intc)
    cdef int[::1] idx = np.zeros(n, dtype=np.intc)
    cdef double[:, ::1] work = np.zeros((m, n))
    cdef double[::1] rhs = np.zeros(m)

    for c in range(n):
        colsum = 0.0
        for r in range(m):
            colsum += fabs(a[r, c])
        if colsum > maxcol:
            maxcol = colsum
    tol = 10.0 * 2.220446049250313e-16 * (m if m > n else n) * maxcol

    with nogil:
        while True:
            # gradient of the residual at x
            for r in range(m):
                s = b[r]
                for c in range(n):
                    s -= a[r, c] * x[c]
                resid[r] = s
            for c in range(n):
                s = 0.0
                for r in range(m):
                    s += a[r, c] * resid[r]
                grad[c] = s

            # first maximiser, as numpy.argmax
            best = -1
            gmax = -INFINITY
            for c in range(n):
                if not passive[c] and grad[c] > gmax:
                    gmax = grad[c]
                    best = <int>c
            if best < 0 or gmax <= tol:
                break
            passive[best] = 1

            while True:
                it += 1
                if it > max_iter:
                    break
                k = 0
                for c in range(n):
                    if passive[c]:
                        idx[k] = <int>c
                        k += 1
                status = _lstsq_subset(a, b, idx, k, work, rhs, coef)
                for c in range(n):
                    z[c] = 0.0
                if status == 0:
                    for j in range(k):
                        z[idx[j]] = coef[j]
                status = 1
                for j in range(k):
                    if z[idx[j]] <= tol:
                        status = 0
                        break
                if status == 1:
                    for c in range(n):
                        x[c] = z[c]
                    break
                alpha = INFINITY
                for j in range(k):
                    c = idx[j]
                    if z[c] <= tol:
                        ratio = x[c] / (x[c] - z[c])
                        if ratio < alpha:
                            alpha = ratio
                for c in range(n):
                    x[c] = x[c] + alpha * (z[c] - x[c])
                for c in range(n):
                    if passive[c] and not (x[c] > tol):
                        passive[c] = 0
                    if not passive[c]:
                        x[c] = 0.0
            if it > max_iter:
                break

    if it > max_iter:
        return x_arr, -1
    return x_arr, it


def lasso_cd(const double[:, ::1] gram, const double[::1] corr, double[::1] beta,
             const unsigned char[::1] penalized, double lam, double tol, int max_iter):
    cdef Py_ssize_t p = gram.shape[0]
    cdef Py_ssize_t j, k
    cdef int sweep, done = -1
    cdef double gjj, old, z, new, delta, change, max_change, s
    cdef double[::1] grad = np.empty(p)
    for k in range(p):
        s = corr[k]
        for j in range(p):
            s -= gram[k, j] * beta[j]
        grad[k] = s
    with nogil:
        for sweep in range(1, max_iter + 1):
            max_change = 0.0
            for j in range(p):
                gjj = gram[j, j]
                if gjj == 0.0:
                    continue
                old = beta[j]
                z = grad[j] + gjj * old
                if penalized[j]:
                    if z > lam:
                        new = (z - lam) / gjj
                    elif z < -lam:
                        new = (z + lam) / gjj
                    else:
                        new = 0.0
                else:
                    new = z / gjj
                if new != old:
                    delta = new - old
                    for k in range(p):
                        grad[k] -= gram[k, j] * delta
                    beta[j] = new
                    change = fabs(delta) * sqrt(gjj)
                    if change > max_change:
                        max_change = change
            if max_change < tol:
                done = sweep
                break
    return done

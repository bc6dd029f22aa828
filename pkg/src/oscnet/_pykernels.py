"""Pure-Python reference implementations of the hot kernels.

These mirror ``_ckernels.pyx`` operation for operation so that both backends
consume the same random numbers and produce the same results.
"""

import math

import numpy as np


def _sigmoid(x):
    if x >= 0.0:
        return 1.0 / (1.0 + math.exp(-x))
    e = math.exp(x)
    return e / (1.0 + e)


def sweep_h(h, coef, tau2, order, uniforms, probs, w, v0,
            resid, beta, pair_index, inv_var_seq, use_sim):
    """One Gibbs scan over the gene-gene entries of H listed in ``order``.

    ``h`` (N x N) and ``resid`` (D,) are updated in place. ``order`` holds
    flat indices ``i * N + j``; diagonal entries must not appear. The
    inclusion probability of every visited entry is written to ``probs``.

    The similarity design uses ``h`` with its diagonal treated as zero, so
    the fitted similarity of pair (i, k) changes only through column j when
    h[i, j] flips.
    """
    n = h.shape[0]
    if w >= 1.0:
        log_prior_odds = math.inf
    elif w <= 0.0:
        log_prior_odds = -math.inf
    else:
        log_prior_odds = math.log(w) - math.log1p(-w)
    half_log_v0 = 0.5 * math.log(v0)

    for t in range(order.shape[0]):
        flat = int(order[t])
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

        if log_prior_odds == math.inf:
            p1 = 1.0
        elif log_prior_odds == -math.inf:
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


def nnls(a, b, max_iter):
    """Lawson-Hanson active-set NNLS. Returns ``(x, n_iter)``; ``n_iter`` is -1
    when the iteration budget ran out."""
    m, n = a.shape
    x = np.zeros(n)
    passive = np.zeros(n, dtype=bool)
    tol = 10.0 * np.finfo(float).eps * max(m, n) * max(1.0, np.abs(a).sum(axis=0).max())

    resid = b - a @ x
    grad = a.T @ resid
    it = 0
    while not passive.all():
        free = ~passive
        if grad[free].max() <= tol:
            break
        cand = np.where(free, grad, -np.inf)
        passive[int(np.argmax(cand))] = True

        while True:
            it += 1
            if it > max_iter:
                return x, -1
            idx = np.flatnonzero(passive)
            z = np.zeros(n)
            z[idx] = np.linalg.lstsq(a[:, idx], b, rcond=None)[0]
            if (z[idx] > tol).all():
                x = z
                break
            bad = idx[z[idx] <= tol]
            alpha = np.min(x[bad] / (x[bad] - z[bad]))
            x = x + alpha * (z - x)
            passive &= x > tol
            x[~passive] = 0.0

        resid = b - a @ x
        grad = a.T @ resid
    return x, it


def lasso_cd(gram, corr, beta, penalized, lam, tol, max_iter):
    """Covariance-form coordinate descent for
    ``0.5 b'Gb - c'b + lam * sum_{penalized} |b_j|``.

    ``beta`` is updated in place (warm start). Returns the number of sweeps,
    or -1 if ``max_iter`` was reached.
    """
    p = gram.shape[0]
    grad = corr - gram @ beta  # c - G b
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
                change = abs(delta) * math.sqrt(gjj)
                if change > max_change:
                    max_change = change
        if max_change < tol:
            return sweep
    return -1

"""Scoring of ranked edge lists and the L1-path baseline."""

from dataclasses import dataclass

import numpy as np

from ._backend import kernels
from .errors import DataError


def _offdiag(matrix):
    matrix = np.asarray(matrix)
    n = matrix.shape[0]
    return matrix[~np.eye(n, dtype=bool)]


def pr_curve(scores, truth):
    """Precision-recall points over every distinct score threshold.

    ``scores`` and ``truth`` are (N, N) with rows as targets and columns as
    regulators; the diagonal is ignored. Edges are predicted present when
    their score is at least the threshold, so tied scores enter together.
    Thresholds admitting no true edge are left out: precision is undefined
    at zero recall, and :func:`aupr` extends the first point to recall 0.

    Returns
    -------
    ndarray, shape (K, 2)
        Columns are (recall, precision), ordered by decreasing threshold.
    """
    scores = np.asarray(scores, dtype=float)
    truth = np.asarray(truth)
    if scores.shape != truth.shape or scores.ndim != 2 or scores.shape[0] != scores.shape[1]:
        raise DataError(f"score and truth shapes differ: {scores.shape} vs {truth.shape}")
    s = _offdiag(scores)
    y = _offdiag(truth) != 0
    n_pos = int(y.sum())
    if n_pos == 0:
        raise DataError("truth contains no edges")
    if not np.all(np.isfinite(s)):
        raise DataError("scores must be finite")

    order = np.argsort(-s, kind="stable")  # lexicographic (target, regulator) among ties
    s_sorted, y_sorted = s[order], y[order]
    tp = np.cumsum(y_sorted)
    fp = np.cumsum(~y_sorted)
    last_of_group = np.r_[s_sorted[1:] != s_sorted[:-1], True]
    tp, fp = tp[last_of_group], fp[last_of_group]
    hit = tp > 0
    tp, fp = tp[hit], fp[hit]
    return np.column_stack([tp / n_pos, tp / (tp + fp)])


def aupr(curve):
    """Trapezoidal area under a PR curve, starting from (0, first precision)."""
    curve = np.asarray(curve, dtype=float)
    if curve.ndim != 2 or curve.shape[0] == 0:
        raise DataError("empty PR curve")
    recall = np.r_[0.0, curve[:, 0]]
    precision = np.r_[curve[0, 1], curve[:, 1]]
    return float(np.sum(np.diff(recall) * (precision[1:] + precision[:-1]) / 2.0))


def aupr_score(scores, truth):
    return aupr(pr_curve(scores, truth))


def random_baseline(truth):
    """AUPR of an uninformative ranking: the share of true edges."""
    y = _offdiag(truth) != 0
    return float(y.mean())


@dataclass(frozen=True)
class Edge:
    source: int
    target: int
    probability: float
    bidirectional: bool = False
    reverse_probability: float = float("nan")


def threshold_network(prob, threshold):
    """Directed edges j -> i for every off-diagonal ``prob[i, j] >= threshold``.

    A pair passing in both directions is returned once, flagged
    ``bidirectional``, with ``source < target``.
    """
    prob = np.asarray(prob, dtype=float)
    if not 0.0 <= threshold <= 1.0:
        raise DataError(f"threshold must lie in [0, 1], got {threshold}")
    n = prob.shape[0]
    edges = []
    for j in range(n):
        for i in range(n):
            if i == j or prob[i, j] < threshold:
                continue
            both = prob[j, i] >= threshold
            if both and j > i:
                continue  # reported from the (i -> j) side
            edges.append(Edge(source=j, target=i, probability=float(prob[i, j]),
                              bidirectional=bool(both),
                              reverse_probability=float(prob[j, i]) if both else float("nan")))
    edges.sort(key=lambda e: (-e.probability, e.source, e.target))
    return edges


def _polish(gram, corr, beta, penalized, lam):
    """Exact solution on the active set and sign pattern found by descent.

    Returns the polished vector when it satisfies the optimality conditions,
    otherwise ``beta`` unchanged.
    """
    sign = np.where(penalized, np.sign(beta), 0.0)
    active = ~penalized | (beta != 0.0)
    idx = np.flatnonzero(active)
    if idx.size == 0:
        return beta
    rhs = corr[idx] - lam * sign[idx]
    sol, *_ = np.linalg.lstsq(gram[np.ix_(idx, idx)], rhs, rcond=None)
    cand = np.zeros_like(beta)
    cand[idx] = sol
    pen_act = penalized[idx]
    if np.any(np.sign(sol[pen_act]) != sign[idx][pen_act]):
        return beta
    grad = corr - gram @ cand
    slack = lam * (1.0 + 1e-9) + 1e-14
    if np.any(np.abs(grad[~active]) > slack):
        return beta
    return cand


def lasso_path(X, y, penalized, lambdas, tol=1e-10, max_iter=100000):
    """Coordinate-descent solutions of
    ``(1/2n) ||y - X b||^2 + lam * sum_{j penalized} |b_j|`` along ``lambdas``.

    Warm starts run from the largest lambda down. Each descent result is
    refined by an exact solve on its active set when that solve satisfies the
    optimality conditions. Returns (len(lambdas), p).
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    n, p = X.shape
    penalized = np.asarray(penalized, dtype=bool)
    gram = np.ascontiguousarray(X.T @ X / n)
    corr = np.ascontiguousarray(X.T @ y / n)
    pen_u8 = penalized.astype(np.uint8)
    beta = np.zeros(p)
    free = ~penalized
    if free.any():
        beta[free] = np.linalg.lstsq(X[:, free], y, rcond=None)[0]
    path = np.zeros((len(lambdas), p))
    for k, lam in enumerate(lambdas):
        kernels.lasso_cd(gram, corr, beta, pen_u8, float(lam), float(tol), int(max_iter))
        beta = np.ascontiguousarray(_polish(gram, corr, beta, penalized, lam))
        path[k] = beta
    return path


def lambda_max(X, y, penalized):
    """Smallest lambda at which every penalized coefficient is zero."""
    X = np.asarray(X, dtype=float)
    n = X.shape[0]
    free = ~np.asarray(penalized, dtype=bool)
    if free.any():
        coef = np.linalg.lstsq(X[:, free], y, rcond=None)[0]
        resid = y - X[:, free] @ coef
    else:
        resid = y
    return float(np.max(np.abs(X[:, penalized].T @ resid)) / n) if penalized.any() else 0.0


def lasso_baseline(spectral, n_lambdas=100, lambda_ratio=1e-4):
    """Edge scores from the L1 path of each target's frequency-domain regression.

    Each target's ``Xdot`` column is regressed on the stacked ``R``; only the
    gene-gene off-diagonal coefficients are penalised (after scaling those
    columns to unit norm). An edge scores ``lam / lam_max`` at the largest
    path value where its coefficient is nonzero, and 0 if it never enters.
    """
    R = np.vstack(spectral.R)
    Xdot = np.vstack(spectral.Xdot)
    n = spectral.n_genes
    if not np.any(R):
        raise DataError("all regressors are zero")
    norms = np.linalg.norm(R, axis=0)
    scores = np.zeros((n, n))
    for i in range(n):
        penalized = np.zeros(R.shape[1], dtype=bool)
        penalized[:n] = True
        penalized[i] = False
        penalized &= norms > 0
        scale = np.where(norms > 0, norms, 1.0) / np.sqrt(R.shape[0])
        X = R / scale
        y = Xdot[:, i]
        lam_max = lambda_max(X, y, penalized)
        if lam_max <= 0.0:
            continue
        lambdas = lam_max * np.geomspace(1.0, lambda_ratio, n_lambdas)
        path = lasso_path(X, y, penalized, lambdas)
        for j in np.flatnonzero(penalized):
            nz = np.flatnonzero(np.abs(path[:, j]) > 1e-12)
            if nz.size:
                scores[i, j] = lambdas[nz[0]] / lam_max
    return scores

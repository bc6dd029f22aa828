"""Low-level numerical kernels: Gaussian draws in precision form, NNLS, Gamma draws."""

import numpy as np

from ._backend import kernels
from .errors import DataError, NumericalError

_TINY = np.finfo(float).tiny


def _cholesky_with_jitter(precision):
    """Cholesky factor of a (stack of) SPD matrices.

    A matrix that fails gets ``1e-8 * trace / n`` added to its diagonal once
    before giving up.
    """
    try:
        return np.linalg.cholesky(precision), precision
    except np.linalg.LinAlgError:
        pass
    n = precision.shape[-1]
    trace = np.trace(precision, axis1=-2, axis2=-1)
    jitter = 1e-8 * np.abs(trace) / n
    jitter = np.where(jitter > 0, jitter, 1e-8)
    eye = np.eye(n)
    jittered = precision + jitter[..., None, None] * eye
    try:
        return np.linalg.cholesky(jittered), jittered
    except np.linalg.LinAlgError as exc:
        raise NumericalError("precision matrix is ill-conditioned "
                             "(Cholesky failed after jitter)") from exc


def gaussian_precision_moments(precision, linear_term):
    """Mean and covariance of the Gaussian with the given precision and
    linear term, i.e. ``N(Q^-1 l, Q^-1)``."""
    precision = np.asarray(precision, dtype=float)
    linear_term = np.asarray(linear_term, dtype=float)
    chol, precision = _cholesky_with_jitter(precision)
    mean = np.linalg.solve(precision, linear_term[..., None])[..., 0]
    eye = np.broadcast_to(np.eye(precision.shape[-1]), precision.shape)
    cov = np.linalg.solve(precision, eye)
    return mean, cov


def sample_gaussian_precision_batch(precision, linear_term, rng):
    """Draw from ``N(Q_k^-1 l_k, Q_k^-1)`` for every matrix in a stack.

    Parameters
    ----------
    precision : ndarray, shape (K, n, n)
        Symmetric positive-definite precision matrices.
    linear_term : ndarray, shape (K, n)
    rng : numpy.random.Generator

    Returns
    -------
    ndarray, shape (K, n)
    """
    precision = np.asarray(precision, dtype=float)
    linear_term = np.asarray(linear_term, dtype=float)
    if not (np.all(np.isfinite(precision)) and np.all(np.isfinite(linear_term))):
        raise NumericalError("non-finite precision or linear term")
    chol, precision = _cholesky_with_jitter(precision)
    z = rng.standard_normal(linear_term.shape)
    mean = np.linalg.solve(precision, linear_term[..., None])[..., 0]
    # L^T x = z  =>  x ~ N(0, (L L^T)^-1)
    noise = np.linalg.solve(np.swapaxes(chol, -1, -2), z[..., None])[..., 0]
    return mean + noise


def sample_gaussian_precision(precision, linear_term, rng):
    """Single draw from ``N(Q^-1 l, Q^-1)``; see :func:`sample_gaussian_precision_batch`."""
    precision = np.asarray(precision, dtype=float)
    linear_term = np.asarray(linear_term, dtype=float)
    if precision.ndim != 2 or precision.shape[0] != precision.shape[1]:
        raise DataError("precision must be a square matrix")
    if linear_term.shape != (precision.shape[0],):
        raise DataError("linear_term length does not match precision")
    return sample_gaussian_precision_batch(precision[None], linear_term[None], rng)[0]


def nnls(design, target, max_iter=None):
    """Solve ``min ||target - design @ x||_2`` subject to ``x >= 0``.

    Lawson-Hanson active-set method, run by the compiled kernel when
    available.

    Returns
    -------
    x : ndarray
    residual_norm : float
    """
    design = np.ascontiguousarray(design, dtype=float)
    target = np.ascontiguousarray(target, dtype=float)
    if design.ndim != 2 or target.ndim != 1:
        raise DataError("nnls expects a matrix and a vector")
    m, n = design.shape
    if m < 1 or n < 1 or target.shape[0] != m:
        raise DataError(f"incompatible nnls shapes {design.shape} and {target.shape}")
    if not (np.all(np.isfinite(design)) and np.all(np.isfinite(target))):
        raise DataError("nnls inputs must be finite")
    if max_iter is None:
        max_iter = 3 * n + 30
    x, n_iter = kernels.nnls(design, target, int(max_iter))
    if n_iter < 0:
        raise NumericalError("nnls did not converge within the iteration budget")
    x = np.asarray(x)
    return x, float(np.linalg.norm(target - design @ x))


def sample_gamma(shape, rate, rng, size=None):
    """Gamma draw(s) in the shape-rate parametrisation (mean ``shape / rate``).

    Draws that underflow to zero are floored at the smallest normal float so
    that inverse square roots stay finite.
    """
    shape = np.asarray(shape, dtype=float)
    rate = np.asarray(rate, dtype=float)
    if np.any(~(shape > 0)) or np.any(~(rate > 0)):
        raise ValueError("Gamma shape and rate must be positive")
    out = rng.gamma(shape, 1.0 / rate, size=size)
    return np.maximum(out, _TINY) if np.ndim(out) else max(float(out), _TINY)

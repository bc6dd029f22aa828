"""Real discrete Fourier representation of sampled series and its derivative.

Layout of a transformed length-M series: with ``F = (M - 1) // 2`` the first F
entries are the real parts and the next F the imaginary parts of DFT bins
1..F. The forward transform is scaled by ``1/M``, so the zero-frequency bin
equals the series mean. Frequencies are in cycles per time unit.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import DataError


@dataclass
class TimeSeriesSet:
    """Replicate trajectories on a shared uniform time grid.

    ``replicates[k]`` is an (M, N) array of expression levels and
    ``inputs[k]`` the matching (M, P) array of input signals.
    """

    replicates: list
    inputs: list
    dt: float
    gene_names: list = None
    input_names: list = None

    def __post_init__(self):
        if not self.replicates:
            raise DataError("at least one replicate is required")
        self.replicates = [np.asarray(x, dtype=float) for x in self.replicates]
        first = self.replicates[0]
        if first.ndim != 2:
            raise DataError("replicates must be 2-D (time x genes)")
        m, n = first.shape
        if not self.inputs:
            self.inputs = [np.zeros((m, 0)) for _ in self.replicates]
        self.inputs = [np.asarray(u, dtype=float).reshape(m, -1) if np.size(u) else np.zeros((m, 0))
                       for u in self.inputs]
        if len(self.inputs) != len(self.replicates):
            raise DataError("inputs and replicates differ in count")
        p = self.inputs[0].shape[1]
        for x, u in zip(self.replicates, self.inputs):
            if x.shape != (m, n) or u.shape != (m, p):
                raise DataError("all replicates must share M, N and P")
            if not (np.all(np.isfinite(x)) and np.all(np.isfinite(u))):
                raise DataError("time series contain non-finite values")
        if m < 3:
            raise DataError(f"need at least 3 time points, got {m}")
        if not (self.dt > 0 and np.isfinite(self.dt)):
            raise DataError(f"dt must be positive, got {self.dt}")
        if self.gene_names is None:
            self.gene_names = [f"G{i + 1}" for i in range(n)]
        if self.input_names is None:
            self.input_names = [f"U{i + 1}" for i in range(p)]
        if len(self.gene_names) != n or len(self.input_names) != p:
            raise DataError("name lists do not match data dimensions")
        self.gene_names = list(self.gene_names)
        self.input_names = list(self.input_names)

    @property
    def n_times(self):
        return self.replicates[0].shape[0]

    @property
    def n_genes(self):
        return self.replicates[0].shape[1]

    @property
    def n_inputs(self):
        return self.inputs[0].shape[1]

    @property
    def n_replicates(self):
        return len(self.replicates)


@dataclass
class SpectralSet:
    """Per-replicate frequency-domain regression data.

    Every matrix has ``n_freq + 1`` rows: the stacked real/imaginary bins
    followed by one zero-frequency row. In that last row ``X`` holds the gene
    means, ``Xdot`` is zero, and ``R`` holds the input means and a 1 in the
    constant column, so the basal rate is fitted from the zero-frequency
    balance. The constant column is zero on the stacked bins.
    """

    X: list
    Xdot: list
    R: list
    omega: np.ndarray
    n_freq: int
    gene_names: list = field(default_factory=list)
    input_names: list = field(default_factory=list)

    @property
    def n_rows(self):
        return self.n_freq + 1

    @property
    def n_genes(self):
        return self.X[0].shape[1]

    @property
    def n_inputs(self):
        return self.R[0].shape[1] - self.n_genes - 1

    @property
    def n_replicates(self):
        return len(self.X)


def n_bins(m):
    return (m - 1) // 2


def frequency_grid(m, dt):
    """Frequencies (cycles per time unit) of the retained bins 1..F."""
    return np.arange(1, n_bins(m) + 1) / (m * dt)


def rdft_matrix(series, dt=1.0):
    """Column-wise RDFT of an (M, ...) array.

    Returns ``(coeffs, omega, dc)`` with ``coeffs`` of shape (2F, ...) and
    ``dc`` the per-column mean.
    """
    x = np.asarray(series, dtype=float)
    m = x.shape[0]
    if m < 3:
        raise DataError(f"rdft needs at least 3 samples, got {m}")
    if not np.all(np.isfinite(x)):
        raise DataError("rdft input contains non-finite values")
    f = n_bins(m)
    spec = np.fft.rfft(x, axis=0) / m
    coeffs = np.concatenate([spec[1:f + 1].real, spec[1:f + 1].imag], axis=0)
    return coeffs, frequency_grid(m, dt), spec[0].real


def rdft(series, dt=1.0):
    """RDFT of a 1-D series: ``(coeffs, omega, dc)``; see :func:`rdft_matrix`."""
    x = np.asarray(series, dtype=float)
    if x.ndim != 1:
        raise DataError("rdft expects a 1-D series")
    coeffs, omega, dc = rdft_matrix(x, dt)
    return coeffs, omega, float(dc)


def irdft(coeffs, m, dc=0.0):
    """Inverse of :func:`rdft_matrix` on its retained bins, sampled at M points."""
    c = np.asarray(coeffs, dtype=float)
    f = n_bins(m)
    if c.shape[0] != 2 * f:
        raise DataError(f"expected {2 * f} coefficients for M={m}, got {c.shape[0]}")
    spec = np.zeros((m // 2 + 1,) + c.shape[1:], dtype=complex)
    spec[0] = dc
    spec[1:f + 1] = c[:f] + 1j * c[f:]
    return np.fft.irfft(spec * m, n=m, axis=0)


def rdft_derivative(coeffs, omega):
    """Analytic time derivative in the RDFT layout.

    Multiplication by ``2*pi*i*omega`` maps ``(Re, Im)`` to
    ``(-2*pi*omega*Im, 2*pi*omega*Re)``.
    """
    c = np.asarray(coeffs, dtype=float)
    omega = np.asarray(omega, dtype=float)
    f = omega.shape[0]
    if c.shape[0] != 2 * f:
        raise DataError(f"coefficient length {c.shape[0]} does not match "
                        f"frequency grid of length {f}")
    scale = (2.0 * np.pi * omega).reshape((f,) + (1,) * (c.ndim - 1))
    re, im = c[:f], c[f:]
    return np.concatenate([-scale * im, scale * re], axis=0)


def build_spectral_set(ts):
    """Transform every replicate of a :class:`TimeSeriesSet` into regression form."""
    xs, xdots, rs = [], [], []
    omega = None
    for x, u in zip(ts.replicates, ts.inputs):
        cx, omega, dcx = rdft_matrix(x, ts.dt)
        cu, _, dcu = rdft_matrix(u, ts.dt) if u.shape[1] else (np.zeros((cx.shape[0], 0)), None, np.zeros(0))
        cxdot = rdft_derivative(cx, omega)

        X = np.vstack([cx, dcx[None, :]])
        Xdot = np.vstack([cxdot, np.zeros((1, cx.shape[1]))])
        const = np.zeros((cx.shape[0] + 1, 1))
        const[-1, 0] = 1.0  # DFT of the all-ones signal under 1/M scaling
        R = np.hstack([X, np.vstack([cu, dcu[None, :]]), const])
        xs.append(X)
        xdots.append(Xdot)
        rs.append(R)
    return SpectralSet(X=xs, Xdot=xdots, R=rs, omega=omega, n_freq=2 * n_bins(ts.n_times),
                       gene_names=list(ts.gene_names), input_names=list(ts.input_names))

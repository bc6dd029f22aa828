"""Gibbs sampler for the frequency-domain spike-and-slab network model.

One sweep updates, in order: the coefficients B, the hypervariances tau2,
the structural matrix H, the sparsity w, the mismatch scale sigma_D and,
when a similarity matrix is supplied, sigma_seq followed by the NNLS
estimate of beta.
"""

from dataclasses import dataclass

import numpy as np
from scipy.stats import truncnorm

from . import similarity as simlib
from ._backend import kernels
from .errors import DataError
from .model import ChainConfig, Hyperparameters, init_state
from .numerics import (gaussian_precision_moments, sample_gamma,
                       sample_gaussian_precision_batch)


@dataclass
class CoefficientPosterior:
    """Sufficient statistics of the Gaussian likelihood, summed over replicates.

    ``eta = sum_k R_k^T Xdot_k`` (d x N) and ``psi = sum_k R_k^T R_k`` (d x d).
    The stacked design and targets are kept for residual computations.
    """

    eta: np.ndarray
    psi: np.ndarray
    R: np.ndarray
    Xdot: np.ndarray

    @property
    def n_obs(self):
        """Number of residual scalars (rows x genes over all replicates)."""
        return self.Xdot.size


@dataclass
class ChainTrace:
    w: np.ndarray
    sigma_D: np.ndarray
    sigma_seq: np.ndarray
    h_samples: np.ndarray  # (n_average, N, N) uint8, 1 where h_ij == 1
    n_iterations: int


@dataclass
class PosteriorSummary:
    edge_prob: np.ndarray       # (N, N), rows targets, columns regulators; diagonal 1
    mean_B: np.ndarray          # (d, N)
    geweke_edges: np.ndarray    # (N, N), NaN on the diagonal
    geweke_scalars: dict
    fraction_converged: float   # share of edge traces with |z| < 3
    n_averaged: int
    w_mean: float
    sigma_D_mean: float
    beta_mean: np.ndarray
    gene_names: list
    input_names: list

    @property
    def n_genes(self):
        return self.edge_prob.shape[0]

    @property
    def A(self):
        return self.mean_B[:self.n_genes].T

    @property
    def C(self):
        return self.mean_B[self.n_genes:-1].T

    @property
    def b(self):
        return self.mean_B[-1]


def accumulate_sufficient_stats(spectral):
    """Sum the per-replicate cross products of a :class:`SpectralSet`."""
    if not spectral.R:
        raise DataError("spectral set has no replicates")
    shape_r, shape_x = spectral.R[0].shape, spectral.Xdot[0].shape
    for R, Xdot in zip(spectral.R, spectral.Xdot):
        if R.shape != shape_r or Xdot.shape != shape_x or R.shape[0] != Xdot.shape[0]:
            raise DataError("replicates have inconsistent spectral shapes")
    eta = sum(R.T @ Xdot for R, Xdot in zip(spectral.R, spectral.Xdot))
    psi = sum(R.T @ R for R in spectral.R)
    return CoefficientPosterior(eta=eta, psi=psi, R=np.vstack(spectral.R),
                                Xdot=np.vstack(spectral.Xdot))


def prior_precisions(state):
    """Per-entry prior precisions ``1 / (h_ij tau_ij^2)``, shape (N, d)."""
    return 1.0 / (state.H * state.tau2)


def coefficient_conditional(stats, state):
    """Precision matrices (N, d, d) and linear terms (N, d) of each target's
    coefficient vector, i.e. ``(Psi + sigma^2 Gamma_i) / sigma^2`` and
    ``eta_i / sigma^2``."""
    s2 = state.sigma_D ** 2
    gamma = prior_precisions(state)
    n, d = gamma.shape
    prec = np.broadcast_to(stats.psi / s2, (n, d, d)).copy()
    prec[:, np.arange(d), np.arange(d)] += gamma
    return prec, stats.eta.T / s2


def coefficient_moments(stats, state):
    """Posterior means (d, N) and covariances (N, d, d) of the coefficients."""
    prec, lin = coefficient_conditional(stats, state)
    mean, cov = gaussian_precision_moments(prec, lin)
    return mean.T, cov


DECAY_MODES = ("reflect", "truncate", "free")


def sample_B(stats, state, rng, decay="reflect"):
    """Draw every target's coefficient vector from its Gaussian conditional.

    ``decay`` controls the sign constraint on the decay entries ``a_ii``:
    ``"reflect"`` draws unconstrained and sets ``a_ii <- -|a_ii|``;
    ``"truncate"`` draws exactly from the conditional restricted to
    ``a_ii <= 0`` (the decay from its truncated marginal, then the rest given
    it); ``"free"`` applies no constraint.
    """
    if decay not in DECAY_MODES:
        raise ValueError(f"decay must be one of {DECAY_MODES}, got {decay!r}")
    prec, lin = coefficient_conditional(stats, state)
    if decay == "truncate":
        return _sample_B_truncated(prec, lin, rng)
    B = sample_gaussian_precision_batch(prec, lin, rng).T.copy()
    if decay == "reflect":
        n = B.shape[1]
        diag = np.arange(n)
        B[diag, diag] = -np.abs(B[diag, diag])
    return B


def _sample_B_truncated(prec, lin, rng):
    n, d = lin.shape
    targets = np.arange(n)
    mean, cov = gaussian_precision_moments(prec, lin)
    mu = mean[targets, targets]
    sd = np.sqrt(cov[targets, targets, targets])
    decay = truncnorm.rvs(-np.inf, -mu / sd, loc=mu, scale=sd, size=n, random_state=rng)
    decay = np.minimum(decay, 0.0)
    # given a_ii the other coefficients are Gaussian with the precision
    # sub-block and linear term l_rest - Q[rest, i] * a_ii
    rest = np.array([np.delete(np.arange(d), i) for i in targets])
    sub = prec[targets[:, None, None], rest[:, :, None], rest[:, None, :]]
    cross = prec[targets[:, None], rest, targets[:, None]]
    others = sample_gaussian_precision_batch(
        sub, lin[targets[:, None], rest] - cross * decay[:, None], rng)
    B = np.empty((d, n))
    B[rest.T, targets] = others.T
    B[targets, targets] = decay
    return B


def tau2_conditional(state, hyper):
    """(shape, rate matrix) of the Gamma conditional of every ``tau_ij^-2``."""
    coef = state.B.T
    return hyper.b_tau[0] + 0.5, hyper.b_tau[1] + coef * coef / (2.0 * state.H)


def sample_tau2(state, hyper, rng):
    shape, rate = tau2_conditional(state, hyper)
    return 1.0 / sample_gamma(shape, rate, rng)


def _offdiag_order(n):
    flat = np.arange(n * n, dtype=np.int64)
    return flat[flat // n != flat % n]


def sample_H(state, hyper, rng, sim=None, random_scan=False, return_probs=False, sim_weight=1.0):
    """Scan the gene-gene off-diagonal entries of H and redraw each from its
    two-point conditional. Diagonal, input and constant columns are left at 1.

    ``sim_weight`` tempers the similarity likelihood (1 is the exact conditional).
    """
    n = state.n_genes
    H = state.H.copy()
    h = np.ascontiguousarray(H[:, :n])
    coef = np.ascontiguousarray(state.B[:n].T)
    tau = np.ascontiguousarray(state.tau2[:, :n])
    order = _offdiag_order(n)
    if random_scan:
        order = np.ascontiguousarray(rng.permutation(order))
    uniforms = rng.random(order.shape[0])
    probs = np.empty(order.shape[0])

    if sim is not None:
        beta = np.ascontiguousarray(state.beta, dtype=float)
        resid = np.ascontiguousarray(simlib.residual(sim, simlib.regulator_block(h), beta))
        pair_index = simlib.pair_index_matrix(n)
        inv_var = sim_weight / state.sigma_seq ** 2
    else:
        beta = np.zeros(n)
        resid = np.zeros(0)
        pair_index = np.zeros((n, n), dtype=np.int64)
        inv_var = 0.0

    kernels.sweep_h(h, coef, tau, order, uniforms, probs, float(state.w), float(hyper.v0),
                    resid, beta, pair_index, inv_var, sim is not None)
    H[:, :n] = h
    if return_probs:
        return H, order, probs
    return H


def w_conditional(state, hyper):
    """(a, b) of the Beta conditional of w, counting gene-gene off-diagonal entries."""
    n = state.n_genes
    off = ~np.eye(n, dtype=bool)
    block = state.H[:, :n][off]
    n_slab = int(np.count_nonzero(block == 1.0))
    n_spike = int(np.count_nonzero(block == hyper.v0))
    return hyper.a_w[0] + n_slab, hyper.a_w[1] + n_spike


def sample_w(state, hyper, rng):
    return float(rng.beta(*w_conditional(state, hyper)))


def sigma_D_conditional(state, stats, hyper):
    """(shape, rate) of the Gamma conditional of ``sigma_D^-2``."""
    Q = stats.Xdot - stats.R @ state.B
    return hyper.c_sigma[0] + 0.5 * Q.size, hyper.c_sigma[1] + 0.5 * float(np.sum(Q * Q))


def sample_sigma_D(state, stats, hyper, rng):
    shape, rate = sigma_D_conditional(state, stats, hyper)
    return float(1.0 / np.sqrt(sample_gamma(shape, rate, rng)))


def gibbs_sweep(state, stats, hyper, rng, sim=None, random_scan=False, decay="reflect",
                sim_weight=1.0):
    """Advance ``state`` by one full sweep, in place. Returns the state."""
    state.B = sample_B(stats, state, rng, decay=decay)
    state.tau2 = sample_tau2(state, hyper, rng)
    state.H = sample_H(state, hyper, rng, sim=sim, random_scan=random_scan, sim_weight=sim_weight)
    state.w = sample_w(state, hyper, rng)
    state.sigma_D = sample_sigma_D(state, stats, hyper, rng)
    if sim is not None:
        G = simlib.regulator_block(state.H, state.n_genes)
        state.sigma_seq = float(simlib.sample_sigma_seq(sim, G, state.beta, hyper, rng))
        state.beta = simlib.update_beta(sim, G)
    return state


def _spectral_density_at_zero(x):
    """Bartlett-window (Newey-West) estimate of the spectral density at zero."""
    n = x.shape[0]
    xc = x - x.mean()
    lag = int(np.floor(4.0 * (n / 100.0) ** (2.0 / 9.0)))
    lag = min(max(lag, 1), n - 1)
    s = float(xc @ xc) / n
    for k in range(1, lag + 1):
        s += 2.0 * (1.0 - k / (lag + 1.0)) * float(xc[k:] @ xc[:-k]) / n
    return max(s, 0.0)


def geweke_z(trace, first=0.1, last=0.5):
    """Geweke convergence z-score comparing the first 10% with the last 50%.

    A trace whose segments both have zero estimated variance returns 0.
    """
    x = np.asarray(trace, dtype=float).ravel()
    if x.shape[0] < 20:
        raise ValueError(f"geweke_z needs at least 20 samples, got {x.shape[0]}")
    n = x.shape[0]
    a = x[:int(np.floor(first * n))]
    b = x[n - int(np.floor(last * n)):]
    var = _spectral_density_at_zero(a) / a.shape[0] + _spectral_density_at_zero(b) / b.shape[0]
    if var <= 0.0:
        return 0.0
    return float((a.mean() - b.mean()) / np.sqrt(var))


def run_chain(spectral, hyper=None, config=None, sim=None, progress=None):
    """Run one Gibbs chain and summarise its trailing ``n_average`` states.

    Parameters
    ----------
    spectral : SpectralSet
    hyper : Hyperparameters, optional
    config : ChainConfig, optional
    sim : SimilarityData, optional
        Ignored when ``config.use_similarity`` is false.
    progress : callable, optional
        Called as ``progress(iteration, state)`` after every sweep.

    Returns
    -------
    (PosteriorSummary, ChainTrace)
    """
    hyper = hyper or Hyperparameters()
    config = config or ChainConfig()
    stats = accumulate_sufficient_stats(spectral)
    n, p = spectral.n_genes, spectral.n_inputs
    if sim is not None and sim.n_genes != n:
        raise DataError(f"similarity matrix is {sim.n_genes}x{sim.n_genes} but data has {n} genes")
    active_sim = sim if config.use_similarity else None

    rng = np.random.default_rng(config.seed)
    state = init_state(n, p, hyper, rng)

    w_tr = np.empty(config.n_samples)
    sd_tr = np.empty(config.n_samples)
    ss_tr = np.empty(config.n_samples)
    h_samples = np.zeros((config.n_average, n, n), dtype=np.uint8)
    B_sum = np.zeros_like(state.B)
    beta_sum = np.zeros(n)
    start = config.n_samples - config.n_average

    ramp = config.similarity_warmup * config.burn_in
    for it in range(config.n_samples):
        weight = 1.0 if it >= ramp else it / ramp
        gibbs_sweep(state, stats, hyper, rng, sim=active_sim, sim_weight=weight,
                    random_scan=config.random_scan, decay=config.decay)
        w_tr[it] = state.w
        sd_tr[it] = state.sigma_D
        ss_tr[it] = state.sigma_seq
        if it >= start:
            h_samples[it - start] = state.H[:, :n] == 1.0
            B_sum += state.B
            beta_sum += state.beta
        if progress is not None:
            progress(it, state)

    edge_prob = h_samples.mean(axis=0)
    np.fill_diagonal(edge_prob, 1.0)

    geweke_edges = np.full((n, n), np.nan)
    scalars = {}
    if config.n_average >= 20:
        for i in range(n):
            for j in range(n):
                if i != j:
                    geweke_edges[i, j] = geweke_z(h_samples[:, i, j])
        for name, tr in (("w", w_tr), ("sigma_D", sd_tr), ("sigma_seq", ss_tr)):
            scalars[name] = geweke_z(tr[start:])
        off = ~np.eye(n, dtype=bool)
        fraction = float(np.mean(np.abs(geweke_edges[off]) < 3.0))
    else:
        fraction = float("nan")

    summary = PosteriorSummary(
        edge_prob=edge_prob,
        mean_B=B_sum / config.n_average,
        geweke_edges=geweke_edges,
        geweke_scalars=scalars,
        fraction_converged=fraction,
        n_averaged=config.n_average,
        w_mean=float(w_tr[start:].mean()),
        sigma_D_mean=float(sd_tr[start:].mean()),
        beta_mean=beta_sum / config.n_average,
        gene_names=list(spectral.gene_names),
        input_names=list(spectral.input_names),
    )
    trace = ChainTrace(w=w_tr, sigma_D=sd_tr, sigma_seq=ss_tr, h_samples=h_samples,
                       n_iterations=config.n_samples)
    return summary, trace

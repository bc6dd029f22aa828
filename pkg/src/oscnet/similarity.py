"""Additive-clustering likelihood tying pairwise similarity scores to H.

The similarity of genes i < j is modelled as ``sum_l h_il h_jl beta_l`` plus
Gaussian noise with standard deviation ``sigma_seq``. Inside the sampler the
gene-gene block of H enters with its diagonal zeroed: the diagonal carries
decay, not regulation.
"""

from functools import lru_cache

import numpy as np

from .model import pair_indices
from .numerics import nnls, sample_gamma


def regulator_block(H, n_genes=None):
    """Gene-gene block of H with the diagonal set to zero."""
    n = H.shape[0] if n_genes is None else n_genes
    G = np.array(H[:, :n], dtype=float)
    np.fill_diagonal(G, 0.0)
    return G


def build_design(H):
    """Pairwise design matrix: row (i, j), i < j, is ``H[i] * H[j]``.

    ``H`` is used exactly as given (an N x N block).
    """
    H = np.asarray(H, dtype=float)
    iu, ju = pair_indices(H.shape[0])
    return H[iu] * H[ju]


@lru_cache(maxsize=32)
def pair_index_matrix(n):
    """(N, N) map from an unordered gene pair to its row in the design; -1 on the diagonal.

    The returned array is shared and read-only.
    """
    idx = -np.ones((n, n), dtype=np.int64)
    iu, ju = pair_indices(n)
    rows = np.arange(iu.shape[0])
    idx[iu, ju] = rows
    idx[ju, iu] = rows
    idx.flags.writeable = False
    return idx


def residual(sim, G, beta):
    return sim.pairs - build_design(G) @ beta


def update_beta(sim, G):
    """Non-negative least-squares weights for the design built from ``G``."""
    beta, _ = nnls(build_design(G), sim.pairs)
    return beta


def sigma_seq_conditional(sim, G, beta, hyper):
    """(shape, rate) of the Gamma conditional of ``sigma_seq^-2``."""
    r = residual(sim, G, beta)
    return hyper.d_seq[0] + 0.5 * sim.n_pairs, hyper.d_seq[1] + 0.5 * float(r @ r)


def sample_sigma_seq(sim, G, beta, hyper, rng):
    shape, rate = sigma_seq_conditional(sim, G, beta, hyper)
    return 1.0 / np.sqrt(sample_gamma(shape, rate, rng))


def seq_log_factor(sim, G, i, j, candidate, beta, sigma_seq, resid=None):
    """Similarity log-likelihood (up to a constant) with ``G[i, j]`` set to ``candidate``.

    ``resid`` is the residual vector for the current ``G``; when given, only
    the rows of pairs containing gene i are adjusted.
    """
    if resid is None:
        resid = residual(sim, G, beta)
    n = G.shape[0]
    idx = pair_index_matrix(n)
    r = np.array(resid, dtype=float)
    delta = candidate - G[i, j]
    if delta != 0.0 and i != j:
        for k in range(n):
            if k != i:
                r[idx[i, k]] -= delta * G[k, j] * beta[j]
    return -0.5 * float(r @ r) / sigma_seq ** 2

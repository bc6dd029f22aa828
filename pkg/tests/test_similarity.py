import numpy as np
import pytest
from scipy import stats

from oscnet.model import Hyperparameters, SimilarityData, pair_indices
from oscnet.similarity import (build_design, pair_index_matrix, regulator_block, residual,
                               sample_sigma_seq, seq_log_factor, sigma_seq_conditional,
                               update_beta)

from test_numerics import brute_force_nnls

V0 = 0.005


def random_block(rng, n, p=0.4):
    G = np.where(rng.random((n, n)) < p, 1.0, V0)
    np.fill_diagonal(G, 0.0)
    return G


def sim_from_pairs(pairs, n):
    S = np.zeros((n, n))
    iu, ju = pair_indices(n)
    S[iu, ju] = pairs
    S[ju, iu] = pairs
    return SimilarityData(S)


# --- design ---------------------------------------------------------------

def test_all_ones_design():
    assert np.array_equal(build_design(np.ones((3, 3))), np.ones((3, 3)))


def test_single_target_regulator_never_gives_one():
    G = np.full((4, 4), V0)
    G[1, 2] = 1.0   # gene 2 regulates only gene 1
    column = build_design(G)[:, 2]
    assert not np.any(column == 1.0)
    assert set(np.round(column / V0, 12)) <= {1.0, V0}


def test_design_matches_double_loop():
    rng = np.random.default_rng(0)
    for n in range(2, 9):
        G = random_block(rng, n)
        ref = []
        for i in range(n):
            for j in range(i + 1, n):
                ref.append([G[i, l] * G[j, l] for l in range(n)])
        np.testing.assert_array_equal(build_design(G), np.array(ref))


def test_pair_index_matrix():
    idx = pair_index_matrix(4)
    assert np.all(np.diag(idx) == -1)
    assert np.array_equal(idx, idx.T)
    iu, ju = pair_indices(4)
    assert list(idx[iu, ju]) == list(range(6))


def test_regulator_block_zeroes_diagonal():
    H = np.ones((3, 5))
    G = regulator_block(H)
    assert G.shape == (3, 3) and np.all(np.diag(G) == 0) and G.sum() == 6


# --- beta -----------------------------------------------------------------

def test_beta_recovered_from_consistent_scores():
    rng = np.random.default_rng(1)
    for _ in range(20):
        G = random_block(rng, 6, 0.6)
        X = build_design(G)
        if np.linalg.matrix_rank(X) < 6:
            continue
        beta = rng.uniform(0.1, 0.6, 6)
        np.testing.assert_allclose(update_beta(sim_from_pairs(X @ beta, 6), G), beta, atol=1e-6)


def test_zero_scores_give_zero_beta():
    G = random_block(np.random.default_rng(2), 5)
    assert np.all(update_beta(sim_from_pairs(np.zeros(10), 5), G) == 0.0)


def test_noisy_beta_matches_enumeration():
    rng = np.random.default_rng(3)
    for _ in range(50):
        G = random_block(rng, 4, 0.7)
        pairs = rng.normal(size=6)
        np.testing.assert_allclose(update_beta(sim_from_pairs(pairs, 4), G),
                                   brute_force_nnls(build_design(G), pairs), atol=1e-8)


# --- sigma_seq ------------------------------------------------------------

def test_sigma_seq_conditional_examples():
    rng = np.random.default_rng(4)
    G = random_block(rng, 7)
    beta = rng.random(7)
    sim = sim_from_pairs(build_design(G) @ beta, 7)
    shape, rate = sigma_seq_conditional(sim, G, beta, Hyperparameters())
    assert shape == 10.0 + 10.5
    assert rate == pytest.approx(0.001, abs=1e-15)
    shape, _ = sigma_seq_conditional(sim_from_pairs(np.zeros(3), 3), random_block(rng, 3),
                                     np.zeros(3), Hyperparameters())
    assert shape == 11.5


def _mh_beta(sim, X, beta, inv_var, rng, steps=5, scale=0.5):
    """Metropolis updates of beta under an Exp(1) prior, reflecting proposals at 0."""
    def logp(b):
        r = sim.pairs - X @ b
        return -0.5 * inv_var * float(r @ r) - float(b.sum())
    cur = logp(beta)
    for _ in range(steps):
        for l in range(beta.shape[0]):
            prop = beta.copy()
            prop[l] = abs(prop[l] + scale * rng.normal())
            new = logp(prop)
            if np.log(rng.random()) < new - cur:
                beta, cur = prop, new
    return beta


def _geweke_sigma_seq(shape_increment, rounds=4000, steps=3, seed=0):
    """Successive-conditional test: exact joint draws, then Gibbs/MH steps with
    data redrawn after each; returns the final sigma_seq^-2 draws."""
    rng = np.random.default_rng(seed)
    hyper = Hyperparameters(d_seq=(3.0, 2.0))
    n = 3
    G = np.array([[0.0, 1.0, V0], [1.0, 0.0, 1.0], [1.0, V0, 0.0]])
    X = build_design(G)
    D = X.shape[0]
    out = np.empty(rounds)
    for r in range(rounds):
        prec = rng.gamma(hyper.d_seq[0], 1.0 / hyper.d_seq[1])
        beta = rng.exponential(size=n)
        sim = sim_from_pairs(X @ beta + rng.normal(size=D) / np.sqrt(prec), n)
        for _ in range(steps):
            if shape_increment == "D/2":
                sd = sample_sigma_seq(sim, G, beta, hyper, rng)
                prec = sd ** -2
            else:
                _, rate = sigma_seq_conditional(sim, G, beta, hyper)
                prec = rng.gamma(hyper.d_seq[0] + D * D / 2.0, 1.0 / rate)
            beta = _mh_beta(sim, X, beta, prec, rng)
            sim = sim_from_pairs(X @ beta + rng.normal(size=D) / np.sqrt(prec), n)
        out[r] = prec
    return out, stats.gamma(hyper.d_seq[0], scale=1.0 / hyper.d_seq[1]).cdf


def test_sigma_seq_prior_reproduction_with_sampled_beta():
    draws, cdf = _geweke_sigma_seq("D/2")
    assert stats.kstest(draws, cdf).pvalue > 0.001


def test_sigma_seq_prior_reproduction_fails_with_squared_increment():
    draws, cdf = _geweke_sigma_seq("D^2/2", rounds=1000)
    assert stats.kstest(draws, cdf).pvalue < 0.001


# --- incremental factor ----------------------------------------------------

def full_log_factor(sim, G, i, j, candidate, beta, sigma_seq):
    G2 = G.copy()
    G2[i, j] = candidate
    r = sim.pairs - build_design(G2) @ beta
    return -0.5 * float(r @ r) / sigma_seq ** 2


def test_zero_beta_makes_similarity_uninformative():
    rng = np.random.default_rng(5)
    G = random_block(rng, 5)
    sim = sim_from_pairs(rng.random(10), 5)
    a = seq_log_factor(sim, G, 1, 3, 1.0, np.zeros(5), 0.3)
    b = seq_log_factor(sim, G, 1, 3, V0, np.zeros(5), 0.3)
    assert a == b


def test_flip_without_shared_regulation_changes_nothing():
    G = np.zeros((4, 4))
    G[0, 1] = 1.0  # gene 1 regulates only gene 0
    sim = sim_from_pairs(np.random.default_rng(6).random(6), 4)
    beta = np.ones(4)
    assert seq_log_factor(sim, G, 0, 1, 1.0, beta, 0.5) == seq_log_factor(sim, G, 0, 1, 0.0,
                                                                          beta, 0.5)


def test_incremental_matches_full_recompute():
    rng = np.random.default_rng(7)
    for _ in range(1000):
        n = int(rng.integers(3, 9))
        G = random_block(rng, n)
        beta = rng.random(n)
        sim = sim_from_pairs(rng.normal(size=n * (n - 1) // 2), n)
        i, j = rng.choice(n, size=2, replace=False)
        cand = float(rng.choice([V0, 1.0]))
        sd = float(rng.uniform(0.1, 2.0))
        res = residual(sim, G, beta)
        fast = seq_log_factor(sim, G, i, j, cand, beta, sd, resid=res)
        assert fast == pytest.approx(full_log_factor(sim, G, i, j, cand, beta, sd),
                                     rel=1e-10, abs=1e-10)


def test_likelihood_invariant_to_pair_relabelling():
    rng = np.random.default_rng(8)
    n = 6
    G = random_block(rng, n)
    beta = rng.random(n)
    S = rng.random((n, n))
    S = S + S.T
    a = residual(SimilarityData(S), G, beta)
    # reading the lower triangle (j, i) gives the same pair scores
    jl, il = np.tril_indices(n, k=-1)
    lower = S[jl, il]
    perm = [list(zip(il, jl)).index(pair) for pair in zip(*pair_indices(n))]
    assert np.allclose(lower[perm], SimilarityData(S).pairs)
    b = SimilarityData(S).pairs - np.array([np.sum(G[j] * G[i] * beta) for i, j in
                                            zip(*pair_indices(n))])
    np.testing.assert_allclose(a, b, atol=1e-14)

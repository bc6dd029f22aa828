"""Recovery trials on simulated networks: DSS with and without similarity,
the noisy variant, and the L1-path baseline, scored by AUPR."""

from dataclasses import dataclass, field

import numpy as np

from .evaluation import aupr_score, lasso_baseline, random_baseline
from .model import ChainConfig, Hyperparameters
from .sampler import run_chain
from .simulator import add_noise, generate_network, simulate_design, simulate_similarity
from .spectral import build_spectral_set

DEFAULT_PHOTOPERIODS = ((12, 12), (6, 18), (8, 16), (18, 6))


@dataclass(frozen=True)
class RecoveryDesign:
    n_genes: int = 7
    edge_density: float = 0.25
    photoperiods: tuple = DEFAULT_PHOTOPERIODS
    knockout_sets: tuple = ((),)
    n_cycles: int = 3
    samples_per_run: int = 28
    network_kwargs: dict = field(default_factory=dict)


@dataclass
class TrialResult:
    seed: int
    baseline: float
    scores: dict  # method name -> AUPR

    def ratio(self, method):
        return self.scores[method] / self.baseline


def recovery_trial(seed, design=None, methods=("dss", "dss_sim", "lasso"), snr=None,
                   chain=None, hyper=None):
    """Simulate one network and score the requested methods on it.

    ``methods`` may contain ``dss`` (no similarity), ``dss_sim`` (true
    simulated similarity) and ``lasso``. With ``snr`` set, noise is added
    before any method sees the data.
    """
    design = design or RecoveryDesign()
    gt = generate_network(design.n_genes, design.edge_density, seed=seed,
                          **design.network_kwargs)
    ts = simulate_design(gt, design.photoperiods, design.knockout_sets,
                         n_cycles=design.n_cycles, samples_per_run=design.samples_per_run)
    if snr is not None:
        ts = add_noise(ts, snr, seed=seed)
    spectral = build_spectral_set(ts)
    truth = gt.H_true
    chain = chain or ChainConfig(seed=seed)

    scores = {}
    for method in methods:
        if method == "dss":
            summary, _ = run_chain(spectral, hyper, chain)
            scores[method] = aupr_score(summary.edge_prob, truth)
        elif method == "dss_sim":
            sim = simulate_similarity(truth, seed=seed, gene_names=gt.gene_names)
            summary, _ = run_chain(spectral, hyper, chain, sim=sim)
            scores[method] = aupr_score(summary.edge_prob, truth)
        elif method == "lasso":
            scores[method] = aupr_score(lasso_baseline(spectral), truth)
        else:
            raise ValueError(f"unknown method {method!r}")
    return TrialResult(seed=seed, baseline=random_baseline(truth), scores=scores)


def run_trials(seeds, **kwargs):
    return [recovery_trial(seed, **kwargs) for seed in seeds]


def median_score(results, method):
    return float(np.median([r.scores[method] for r in results]))


def median_baseline(results):
    return float(np.median([r.baseline for r in results]))

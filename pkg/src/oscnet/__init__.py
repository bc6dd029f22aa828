"""Sparse network inference for oscillatory linear systems.

Time series are moved to a real Fourier representation where the derivative
is exact, and a spike-and-slab regression of derivative spectra on signal
spectra is sampled by Gibbs MCMC, optionally coupled to a pairwise
similarity matrix.
"""

from ._backend import NAME as KERNEL_BACKEND
from .evaluation import aupr, aupr_score, lasso_baseline, pr_curve, threshold_network
from .model import ChainConfig, Hyperparameters, NetworkState, SimilarityData, init_state
from .sampler import PosteriorSummary, geweke_z, run_chain
from .simulator import (GroundTruth, add_noise, generate_network, simulate, simulate_design,
                        simulate_similarity)
from .spectral import SpectralSet, TimeSeriesSet, build_spectral_set, rdft, rdft_derivative

__version__ = "0.1.0"

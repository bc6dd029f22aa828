"""Parameters, hyperparameters and structural matrix of the hierarchical model.

Index conventions for N genes and P inputs, ``d = N + P + 1``:

* ``B`` is (d, N): rows 0..N-1 hold ``A^T`` (interaction and decay),
  rows N..N+P-1 hold ``C^T`` (input response), the last row holds the basal
  rates ``b^T``. Column i is the coefficient vector of target gene i.
* ``H`` and ``tau2`` are (N, d) with ``H[i, j]`` paired with ``B[j, i]``;
  rows are targets and columns regulators.
"""

from dataclasses import dataclass, field, replace
from functools import lru_cache

import numpy as np

from .errors import ConfigError, DataError
from .numerics import sample_gamma


@dataclass(frozen=True)
class Hyperparameters:
    """Prior constants, each pair in (shape, rate) or Beta (a, b) form."""

    a_w: tuple = (1.0, 1.0)          # Beta prior on w
    b_tau: tuple = (5.0, 50.0)       # Gamma prior on tau^-2
    c_sigma: tuple = (0.001, 0.001)  # Gamma prior on sigma_D^-2
    d_seq: tuple = (10.0, 0.001)     # Gamma prior on sigma_seq^-2
    v0: float = 0.005                # spike scale

    def __post_init__(self):
        for name in ("a_w", "b_tau", "c_sigma", "d_seq"):
            pair = tuple(float(v) for v in getattr(self, name))
            if len(pair) != 2 or not all(v > 0 and np.isfinite(v) for v in pair):
                raise ConfigError(f"hyperparameter {name} must be a pair of positive numbers")
            object.__setattr__(self, name, pair)
        if not 0.0 < self.v0 < 1.0:
            raise ConfigError(f"v0 must lie in (0, 1), got {self.v0}")
        object.__setattr__(self, "v0", float(self.v0))


@dataclass
class NetworkState:
    """One Gibbs state."""

    B: np.ndarray
    H: np.ndarray
    tau2: np.ndarray
    w: float
    sigma_D: float
    beta: np.ndarray
    sigma_seq: float
    v0: float = 0.005

    @property
    def n_genes(self):
        return self.B.shape[1]

    @property
    def n_inputs(self):
        return self.B.shape[0] - self.B.shape[1] - 1

    @property
    def A(self):
        return self.B[:self.n_genes].T

    @property
    def C(self):
        n = self.n_genes
        return self.B[n:n + self.n_inputs].T

    @property
    def b(self):
        return self.B[-1]

    @property
    def H_genes(self):
        return self.H[:, :self.n_genes]

    def copy(self):
        return replace(self, B=self.B.copy(), H=self.H.copy(), tau2=self.tau2.copy(),
                       beta=self.beta.copy())

    def validate(self):
        """Raise ``DataError`` when any state invariant is violated."""
        n = self.n_genes
        d = self.B.shape[0]
        if self.H.shape != (n, d) or self.tau2.shape != (n, d):
            raise DataError("H / tau2 shape inconsistent with B")
        if not np.all(np.isin(self.H, (self.v0, 1.0))):
            raise DataError("H entries must be v0 or 1")
        if not np.all(np.diag(self.H[:, :n]) == 1.0):
            raise DataError("diagonal of H must be 1")
        if not np.all(self.H[:, n:] == 1.0):
            raise DataError("input and constant columns of H must be 1")
        if not np.all(np.diag(self.B[:n]) <= 0.0):
            raise DataError("decay entries a_ii must be non-positive")
        if not np.all(self.tau2 > 0) or not np.all(np.isfinite(self.tau2)):
            raise DataError("tau2 must be positive and finite")
        if not 0.0 <= self.w <= 1.0:
            raise DataError("w must lie in [0, 1]")
        if not (self.sigma_D > 0 and np.isfinite(self.sigma_D)):
            raise DataError("sigma_D must be positive and finite")
        if not (self.sigma_seq > 0 and np.isfinite(self.sigma_seq)):
            raise DataError("sigma_seq must be positive and finite")
        if self.beta.shape != (n,) or np.any(self.beta < 0):
            raise DataError("beta must be a non-negative vector of length N")
        if not np.all(np.isfinite(self.B)):
            raise DataError("B must be finite")
        return True


@lru_cache(maxsize=32)
def pair_indices(n):
    """Upper-triangular pairs (i < j) in lexicographic order (read-only arrays)."""
    iu, ju = np.triu_indices(n, k=1)
    iu.flags.writeable = False
    ju.flags.writeable = False
    return iu, ju


@dataclass
class SimilarityData:
    """Symmetric pairwise similarity scores between the N genes."""

    S: np.ndarray
    gene_names: list = None
    pairs: np.ndarray = field(init=False)

    def __post_init__(self):
        S = np.asarray(self.S, dtype=float)
        if S.ndim != 2 or S.shape[0] != S.shape[1]:
            raise DataError("similarity matrix must be square")
        if not np.all(np.isfinite(S)):
            raise DataError("similarity matrix contains non-finite values")
        if not np.allclose(S, S.T, rtol=1e-10, atol=1e-12):
            raise DataError("similarity matrix must be symmetric")
        self.S = S
        iu, ju = pair_indices(S.shape[0])
        self.pairs = S[iu, ju].copy()

    @property
    def n_genes(self):
        return self.S.shape[0]

    @property
    def n_pairs(self):
        return self.pairs.shape[0]


@dataclass(frozen=True)
class ChainConfig:
    n_samples: int = 5000
    burn_in: int = 4000
    n_average: int = 1000
    seed: int = 0
    use_similarity: bool = True
    random_scan: bool = False
    decay: str = "reflect"           # sign handling of a_ii: reflect, truncate or free
    similarity_warmup: float = 0.5   # share of burn-in run without the similarity term

    def __post_init__(self):
        if self.decay not in ("reflect", "truncate", "free"):
            raise ConfigError(f"decay must be reflect, truncate or free, got {self.decay!r}")
        if not 0.0 <= self.similarity_warmup <= 1.0:
            raise ConfigError("similarity_warmup must lie in [0, 1]")
        if self.n_samples < 1 or self.burn_in < 0 or self.n_average < 1:
            raise ConfigError("chain lengths must be positive")
        if self.burn_in >= self.n_samples:
            raise ConfigError("burn_in must be smaller than n_samples")
        if self.n_average > self.n_samples - self.burn_in:
            raise ConfigError("n_average cannot exceed n_samples - burn_in")


def init_state(n_genes, n_inputs, hyper, rng):
    """Draw an initial state from the priors (B and beta start at zero)."""
    if n_genes < 2 or n_inputs < 0:
        raise DataError(f"need n_genes >= 2 and n_inputs >= 0, got {n_genes}, {n_inputs}")
    d = n_genes + n_inputs + 1
    H = np.ones((n_genes, d))
    H[:, :n_genes] = hyper.v0
    np.fill_diagonal(H[:, :n_genes], 1.0)
    tau2 = 1.0 / sample_gamma(hyper.b_tau[0], hyper.b_tau[1], rng, size=(n_genes, d))
    w = float(rng.beta(*hyper.a_w))
    sigma_D = 1.0 / np.sqrt(sample_gamma(*hyper.c_sigma, rng))
    sigma_seq = 1.0 / np.sqrt(sample_gamma(*hyper.d_seq, rng))
    return NetworkState(B=np.zeros((d, n_genes)), H=H, tau2=tau2, w=w,
                        sigma_D=float(sigma_D), beta=np.zeros(n_genes),
                        sigma_seq=float(sigma_seq), v0=hyper.v0)

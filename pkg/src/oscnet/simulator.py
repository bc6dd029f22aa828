"""Ground-truth LTI networks driven by periodic binary light inputs.

Trajectories are propagated exactly over each interval on which the input is
constant, using the matrix exponential of the augmented affine system.

Time is measured in days: rates are per day and ``dt`` is in days, while
photoperiods are given in hours.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import expm

from .errors import DataError
from .model import SimilarityData
from .spectral import TimeSeriesSet

HOURS_PER_DAY = 24.0


@dataclass
class GroundTruth:
    A_true: np.ndarray   # (N, N), rows targets
    C_true: np.ndarray   # (N, P)
    b_true: np.ndarray   # (N,)
    gene_names: list
    input_names: list
    metadata: dict = field(default_factory=dict)

    @property
    def n_genes(self):
        return self.A_true.shape[0]

    @property
    def H_true(self):
        """Binary adjacency of the gene-gene block (zero diagonal)."""
        adj = (self.A_true != 0).astype(int)
        np.fill_diagonal(adj, 0)
        return adj


def generate_network(n_genes, edge_density, decay_range=(1.0, 5.0), weight_range=(5.0, 15.0),
                     seed=0, n_inputs=1, input_weight_range=(10.0, 40.0),
                     basal_range=(2.0, 12.0), input_probability=0.5, max_tries=100,
                     require_driven=True):
    """Random sparse stable network.

    Off-diagonal edges appear independently with probability ``edge_density``
    and carry a weight of random sign and magnitude in ``weight_range``. The
    diagonal is ``-U(decay_range)``. Each gene receives each input with
    probability ``input_probability`` (every input drives at least one gene).
    Draws whose homogeneous dynamics have an eigenvalue with non-negative real
    part are rejected and redrawn, as are draws (when ``require_driven``) in
    which some gene is not reachable from any input and so would not oscillate.
    """
    if n_genes < 2:
        raise DataError("n_genes must be at least 2")
    if not 0.0 < edge_density <= 1.0:
        raise DataError(f"edge_density must lie in (0, 1], got {edge_density}")
    for name, (lo, hi) in (("decay_range", decay_range), ("weight_range", weight_range),
                           ("input_weight_range", input_weight_range)):
        if not (0 < lo <= hi and np.isfinite(hi)):
            raise DataError(f"{name} must be a positive finite interval")
    lo_b, hi_b = basal_range
    if not (0 <= lo_b <= hi_b and np.isfinite(hi_b)):
        raise DataError("basal_range must be a non-negative finite interval")

    rng = np.random.default_rng(seed)
    off = ~np.eye(n_genes, dtype=bool)
    for attempt in range(max_tries):
        mask = (rng.random((n_genes, n_genes)) < edge_density) & off
        signs = rng.choice([-1.0, 1.0], size=(n_genes, n_genes))
        mags = rng.uniform(*weight_range, size=(n_genes, n_genes))
        A = np.where(mask, signs * mags, 0.0)
        A[np.diag_indices(n_genes)] = -rng.uniform(*decay_range, size=n_genes)

        C = np.zeros((n_genes, n_inputs))
        for k in range(n_inputs):
            hit = rng.random(n_genes) < input_probability
            if not hit.any():
                hit[rng.integers(n_genes)] = True
            C[hit, k] = rng.choice([-1.0, 1.0], size=hit.sum()) * \
                rng.uniform(*input_weight_range, size=hit.sum())
        b = rng.uniform(lo_b, hi_b, size=n_genes)

        if require_driven and not _all_driven(A, C):
            continue
        if np.max(np.linalg.eigvals(A).real) < 0.0:
            return GroundTruth(
                A_true=A, C_true=C, b_true=b,
                gene_names=[f"G{i + 1}" for i in range(n_genes)],
                input_names=[f"light{k + 1}" if n_inputs > 1 else "light" for k in range(n_inputs)],
                metadata={"seed": seed, "edge_density": edge_density, "attempts": attempt + 1},
            )
    raise DataError(f"no stable network found in {max_tries} draws")


def _all_driven(A, C):
    """True when every gene is reachable from some input through the edges of A."""
    reached = np.any(C != 0, axis=1)
    links = (A != 0) & ~np.eye(A.shape[0], dtype=bool)  # links[i, j]: j -> i
    while True:
        grown = reached | np.any(links & reached[None, :], axis=1)
        if np.array_equal(grown, reached):
            return bool(reached.all())
        reached = grown


def knockout_system(gt, knockouts):
    """Coefficients with the listed genes knocked out.

    A knocked-out gene keeps only its decay, loses its basal rate and input
    response, and no longer acts on any other gene.
    """
    A, C, b = gt.A_true.copy(), gt.C_true.copy(), gt.b_true.copy()
    for name in knockouts:
        if name not in gt.gene_names:
            raise DataError(f"unknown knockout gene {name!r}")
        g = gt.gene_names.index(name)
        decay = A[g, g]
        A[g, :] = 0.0
        A[:, g] = 0.0
        A[g, g] = decay
        C[g, :] = 0.0
        b[g] = 0.0
    return A, C, b


def light_signal(t, on, off):
    """Binary light input: on during the first ``on`` time units of every period."""
    return (np.mod(t, on + off) < on).astype(float)


class _Propagator:
    """Exact flow of dx/dt = A x + f over a step h, cached per (h, f)."""

    def __init__(self, A):
        self.A = A
        self.n = A.shape[0]
        self._cache = {}

    def step(self, x, h, f):
        key = (h, f.tobytes())
        mat = self._cache.get(key)
        if mat is None:
            aug = np.zeros((self.n + 1, self.n + 1))
            aug[:self.n, :self.n] = self.A
            aug[:self.n, self.n] = f
            mat = expm(aug * h)
            self._cache[key] = mat
        return mat[:self.n, :self.n] @ x + mat[:self.n, self.n]

    def affine_map(self, h, f):
        """(Phi, g) with x(h) = Phi x(0) + g."""
        self.step(np.zeros(self.n), h, f)
        mat = self._cache[(h, f.tobytes())]
        return mat[:self.n, :self.n], mat[:self.n, self.n]


def _segments(t0, t1, on, off):
    """Split [t0, t1) at light switching times; yields (start, end, light)."""
    period = on + off
    t = t0
    while t < t1 - 1e-12:
        phase = np.mod(t, period)
        if phase < on - 1e-12:
            nxt, light = t - phase + on, 1.0
        else:
            nxt, light = t - phase + period, 0.0
        end = min(nxt, t1)
        yield t, end, light
        t = end


def _propagate(prop, x, t0, t1, b, C, photoperiod):
    for s, e, light in _segments(t0, t1, *photoperiod):
        x = prop.step(x, e - s, b + C.sum(axis=1) * light)
    return x


def simulate(gt, photoperiod=(12.0, 12.0), n_cycles=3, samples_per_run=28, knockouts=(),
             initial_state=None):
    """One replicate sampled uniformly over ``n_cycles`` light/dark periods.

    ``photoperiod`` is (hours on, hours off); the returned ``dt`` is in days.

    Sampling starts on the periodic steady state (all transients removed),
    which is what an arbitrarily long pre-run would reach. All inputs share
    the same light signal. Pass ``initial_state`` to start from a given state
    instead, after one pre-run period.
    """
    hours_on, hours_off = float(photoperiod[0]), float(photoperiod[1])
    if hours_on + hours_off <= 0 or hours_on < 0 or hours_off < 0:
        raise DataError(f"invalid photoperiod {photoperiod}")
    on, off = hours_on / HOURS_PER_DAY, hours_off / HOURS_PER_DAY
    period = on + off
    if samples_per_run < 3:
        raise DataError("samples_per_run must be at least 3")
    A, C, b = knockout_system(gt, knockouts)
    if np.max(np.linalg.eigvals(A).real) >= 0.0:
        raise DataError("system is not stable")

    prop = _Propagator(A)
    photo = (on, off)
    if initial_state is None:
        Phi = np.eye(A.shape[0])
        g = np.zeros(A.shape[0])
        for s, e, light in _segments(0.0, period, *photo):
            f = b + C.sum(axis=1) * light
            P_seg, g_seg = prop.affine_map(e - s, f)
            Phi, g = P_seg @ Phi, P_seg @ g + g_seg
        x = np.linalg.solve(np.eye(A.shape[0]) - Phi, g)
    else:
        x = _propagate(prop, np.asarray(initial_state, dtype=float), 0.0, period, b, C, photo)

    total = n_cycles * period
    dt = total / samples_per_run
    times = np.arange(samples_per_run) * dt
    out = np.empty((samples_per_run, A.shape[0]))
    out[0] = x
    for m in range(1, samples_per_run):
        x = _propagate(prop, x, times[m - 1], times[m], b, C, photo)
        out[m] = x
    u = np.repeat(light_signal(times, on, off)[:, None], C.shape[1], axis=1)
    return TimeSeriesSet(replicates=[out], inputs=[u], dt=dt, gene_names=list(gt.gene_names),
                         input_names=list(gt.input_names))


def simulate_design(gt, photoperiods, knockout_sets=((),), n_cycles=3, samples_per_run=28):
    """Replicates for every (photoperiod, knockout set) combination, photoperiod-major."""
    reps, inputs, dt = [], [], None
    for photo in photoperiods:
        for kos in knockout_sets:
            ts = simulate(gt, photo, n_cycles, samples_per_run, knockouts=kos)
            if dt is not None and not np.isclose(ts.dt, dt):
                raise DataError("photoperiods with different lengths give different sampling "
                                "intervals; use a common period")
            dt = ts.dt
            reps.append(ts.replicates[0])
            inputs.append(ts.inputs[0])
    return TimeSeriesSet(replicates=reps, inputs=inputs, dt=dt, gene_names=list(gt.gene_names),
                         input_names=list(gt.input_names))


def add_noise(ts, snr, seed=0):
    """White Gaussian noise per gene and replicate with variance ``var(signal) / snr``."""
    if not snr > 0:
        raise DataError(f"snr must be positive, got {snr}")
    rng = np.random.default_rng(seed)
    noisy = []
    for x in ts.replicates:
        sd = np.sqrt(np.var(x, axis=0) / snr)
        noisy.append(x + rng.standard_normal(x.shape) * sd)
    return TimeSeriesSet(replicates=noisy, inputs=[u.copy() for u in ts.inputs], dt=ts.dt,
                         gene_names=list(ts.gene_names), input_names=list(ts.input_names))


def simulate_similarity(H_true, beta_low=0.1, beta_high=0.6, seed=0, gene_names=None):
    """Noiseless additive-clustering similarity from a binary adjacency.

    ``s_ij = sum_l h_il h_jl beta_l`` with ``beta_l ~ U(beta_low, beta_high)``;
    the diagonal of ``H_true`` is ignored.
    """
    if not beta_low < beta_high:
        raise DataError("beta_low must be smaller than beta_high")
    rng = np.random.default_rng(seed)
    beta = rng.uniform(beta_low, beta_high, size=np.shape(H_true)[0])
    return similarity_from_weights(H_true, beta, gene_names)


def similarity_from_weights(H_true, beta, gene_names=None):
    G = np.array(H_true, dtype=float)
    np.fill_diagonal(G, 0.0)
    S = (G * np.asarray(beta, dtype=float)) @ G.T
    return SimilarityData(S=S, gene_names=gene_names)

import numpy as np
import pytest
from scipy import stats
from scipy.linalg import expm

from oscnet.errors import DataError
from oscnet.simulator import (HOURS_PER_DAY, GroundTruth, _all_driven, _propagate, _Propagator,
                              add_noise, generate_network, knockout_system, light_signal,
                              simulate, simulate_design, simulate_similarity,
                              similarity_from_weights)
from oscnet.spectral import TimeSeriesSet


def manual_truth(A, C, b):
    n = A.shape[0]
    return GroundTruth(A_true=np.asarray(A, float), C_true=np.asarray(C, float),
                       b_true=np.asarray(b, float), gene_names=[f"G{i + 1}" for i in range(n)],
                       input_names=["light"])


def rk4(A, f_of_t, x, t0, t1, h):
    n_steps = int(round((t1 - t0) / h))
    h = (t1 - t0) / n_steps
    t = t0
    for _ in range(n_steps):
        k1 = A @ x + f_of_t(t)
        k2 = A @ (x + 0.5 * h * k1) + f_of_t(t + 0.5 * h)
        k3 = A @ (x + 0.5 * h * k2) + f_of_t(t + 0.5 * h)
        k4 = A @ (x + h * k3) + f_of_t(t + h)
        x = x + h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
        t += h
    return x


# --- network generation ---------------------------------------------------

def test_generate_network_structure():
    gt = generate_network(7, 0.25, seed=3)
    assert np.all(np.diag(gt.A_true) < 0)
    off = ~np.eye(7, dtype=bool)
    assert np.array_equal(gt.H_true[off] == 1, gt.A_true[off] != 0)
    assert np.all(np.diag(gt.H_true) == 0)
    assert np.max(np.linalg.eigvals(gt.A_true).real) < 0
    assert _all_driven(gt.A_true, gt.C_true)


def test_generate_network_is_reproducible():
    a, b = generate_network(6, 0.3, seed=11), generate_network(6, 0.3, seed=11)
    assert np.array_equal(a.A_true, b.A_true) and np.array_equal(a.C_true, b.C_true)
    assert np.array_equal(a.b_true, b.b_true)


@pytest.mark.parametrize("density", [0.0, -0.1, 1.5])
def test_invalid_density(density):
    with pytest.raises(DataError):
        generate_network(5, density)


def test_rejection_budget():
    with pytest.raises(DataError):
        generate_network(6, 1.0, decay_range=(0.01, 0.02), weight_range=(50, 60), max_tries=5,
                         require_driven=False)


def test_edge_count_is_binomial():
    # interactions below 1/6 of the smallest decay keep every draw stable (Gershgorin),
    # so no draw is rejected and the mask is the raw Bernoulli sample
    counts = np.array([generate_network(7, 0.25, weight_range=(0.05, 0.15), seed=s,
                                        require_driven=False).H_true.sum() for s in range(100)])
    expected = stats.binom(42, 0.25)
    assert abs(counts.mean() - expected.mean()) < 4 * np.sqrt(expected.var() / 100)
    assert 0.6 < counts.var(ddof=1) / expected.var() < 1.5


def test_all_driven():
    A = np.array([[-1.0, 0.0, 0.0], [1.0, -1.0, 0.0], [0.0, 0.0, -1.0]])
    assert not _all_driven(A, np.array([[1.0], [0.0], [0.0]]))
    A[2, 1] = 2.0
    assert _all_driven(A, np.array([[1.0], [0.0], [0.0]]))


# --- simulation -----------------------------------------------------------

def test_fixed_point():
    gt = manual_truth(-np.eye(3), np.zeros((3, 1)), np.ones(3))
    ts = simulate(gt, initial_state=np.zeros(3), n_cycles=20, samples_per_run=28)
    np.testing.assert_allclose(ts.replicates[0][-1], 1.0, atol=1e-6)
    ts = simulate(gt)
    np.testing.assert_allclose(ts.replicates[0], 1.0, atol=1e-12)


def test_output_is_periodic():
    gt = generate_network(7, 0.25, seed=2)
    x = simulate(gt, (12, 12), n_cycles=2, samples_per_run=56).replicates[0]
    assert np.max(np.abs(x[:28] - x[28:])) < 1e-6


def test_steady_state_start_matches_long_integration():
    gt = generate_network(5, 0.3, seed=4)
    ts = simulate(gt, (8, 16), n_cycles=1, samples_per_run=12)
    long = simulate(gt, (8, 16), n_cycles=1, samples_per_run=12, initial_state=np.zeros(5))
    # one pre-run period from zero leaves a transient; many periods remove it
    x = np.zeros(5)
    prop = _Propagator(gt.A_true)
    for _ in range(200):
        x = _propagate(prop, x, 0.0, 1.0, gt.b_true, gt.C_true, (8 / 24, 16 / 24))
    np.testing.assert_allclose(ts.replicates[0][0], x, atol=1e-6)
    assert long.replicates[0].shape == (12, 5)


def test_twelve_twelve_design():
    gt = generate_network(7, 0.25, seed=0)
    ts = simulate(gt, (12, 12), n_cycles=3, samples_per_run=28)
    assert ts.replicates[0].shape == (28, 7)
    assert ts.dt == pytest.approx(3 / 28)
    t = np.arange(28) * ts.dt
    np.testing.assert_array_equal(ts.inputs[0][:, 0], (np.mod(t, 1.0) < 0.5).astype(float))
    assert ts.inputs[0][:, 0].sum() == 14


def test_light_signal_units():
    t = np.array([0.0, 0.24, 0.26, 0.99, 1.0])
    np.testing.assert_array_equal(light_signal(t, 6 / HOURS_PER_DAY, 18 / HOURS_PER_DAY),
                                  [1, 1, 0, 0, 1])


def test_closed_form_matches_rk4():
    for seed in range(5):
        gt = generate_network(5, 0.3, seed=100 + seed)
        on, off = 10 / 24, 14 / 24
        rng = np.random.default_rng(seed)
        x0 = rng.normal(size=5)
        prop = _Propagator(gt.A_true)
        exact = _propagate(prop, x0, 0.0, on + off, gt.b_true, gt.C_true, (on, off))
        drive = gt.C_true.sum(axis=1)
        mid = rk4(gt.A_true, lambda t: gt.b_true + drive, x0, 0.0, on, 1e-4)
        num = rk4(gt.A_true, lambda t: gt.b_true, mid, on, on + off, 1e-4)
        np.testing.assert_allclose(exact, num, atol=1e-6 * (1 + np.max(np.abs(num))))


def test_step_matches_matrix_exponential_formula():
    A = np.array([[-1.0, 0.5], [0.0, -2.0]])
    f = np.array([1.0, 3.0])
    x = np.array([0.2, -0.4])
    got = _Propagator(A).step(x, 0.7, f)
    Phi = expm(0.7 * A)
    ref = Phi @ x + np.linalg.solve(A, (Phi - np.eye(2)) @ f)
    np.testing.assert_allclose(got, ref, atol=1e-12)


def test_knockout_ignores_knocked_gene_outgoing_weights():
    gt = generate_network(6, 0.4, seed=7)
    g = 2
    ts = simulate(gt, (12, 12), knockouts=["G3"])
    perturbed = manual_truth(gt.A_true.copy(), gt.C_true, gt.b_true)
    perturbed.gene_names = list(gt.gene_names)
    rows = [i for i in range(6) if i != g]
    perturbed.A_true[rows, g] += np.random.default_rng(0).normal(size=5)
    ts2 = simulate(perturbed, (12, 12), knockouts=["G3"])
    np.testing.assert_allclose(ts.replicates[0], ts2.replicates[0], atol=1e-12)
    # the knocked-out gene only decays: its steady state is zero
    np.testing.assert_allclose(ts.replicates[0][:, g], 0.0, atol=1e-12)


def test_knockout_system_semantics():
    gt = generate_network(4, 0.5, seed=1)
    A, C, b = knockout_system(gt, ["G2"])
    assert A[1, 1] == gt.A_true[1, 1]
    assert np.all(A[1, [0, 2, 3]] == 0) and np.all(A[[0, 2, 3], 1] == 0)
    assert np.all(C[1] == 0) and b[1] == 0
    with pytest.raises(DataError):
        knockout_system(gt, ["nope"])


def test_simulate_errors():
    gt = generate_network(3, 0.5, seed=0)
    with pytest.raises(DataError):
        simulate(gt, samples_per_run=2)
    with pytest.raises(DataError):
        simulate(gt, (-1, 12))
    unstable = manual_truth(np.array([[0.5, 0.0], [0.0, -1.0]]), np.zeros((2, 1)), np.ones(2))
    with pytest.raises(DataError):
        simulate(unstable)


def test_design_is_photoperiod_major():
    gt = generate_network(4, 0.4, seed=5)
    ts = simulate_design(gt, [(12, 12), (6, 18)], [(), ("G1",)])
    assert ts.n_replicates == 4
    np.testing.assert_allclose(ts.replicates[1], simulate(gt, (12, 12), knockouts=["G1"])
                               .replicates[0])
    np.testing.assert_allclose(ts.replicates[2], simulate(gt, (6, 18)).replicates[0])


def test_design_rejects_mixed_periods():
    gt = generate_network(3, 0.5, seed=0)
    with pytest.raises(DataError):
        simulate_design(gt, [(12, 12), (10, 10)])


# --- noise ----------------------------------------------------------------

def test_huge_snr_leaves_series_unchanged():
    ts = simulate(generate_network(5, 0.3, seed=0))
    noisy = add_noise(ts, 1e12, seed=1)
    x = ts.replicates[0]
    assert np.max(np.abs(noisy.replicates[0] - x)) <= 1e-5 * np.max(np.abs(x))


def test_snr_ten_variance_ratio():
    ts = simulate_design(generate_network(7, 0.25, seed=0), [(12, 12), (6, 18)])
    noise_var = np.zeros((ts.n_replicates, ts.n_genes))
    for s in range(100):
        noisy = add_noise(ts, 10.0, seed=s)
        for k, (x, y) in enumerate(zip(ts.replicates, noisy.replicates)):
            noise_var[k] += np.var(y - x, axis=0) / 100
    ratios = np.array([np.var(x, axis=0) for x in ts.replicates]) / noise_var
    assert np.all(np.abs(ratios - 10.0) < 1.0)


def test_constant_gene_gets_no_noise():
    x = np.column_stack([np.full(20, 3.0), np.sin(np.arange(20))])
    ts = TimeSeriesSet(replicates=[x], inputs=[], dt=1.0)
    noisy = add_noise(ts, 10.0, seed=0).replicates[0]
    assert np.all(noisy[:, 0] == 3.0)
    assert not np.allclose(noisy[:, 1], x[:, 1])


def test_noise_reproducible_and_validated():
    ts = simulate(generate_network(4, 0.4, seed=0))
    assert np.array_equal(add_noise(ts, 5, seed=3).replicates[0],
                          add_noise(ts, 5, seed=3).replicates[0])
    with pytest.raises(DataError):
        add_noise(ts, 0.0)


# --- similarity -----------------------------------------------------------

def test_single_shared_regulator():
    H = np.zeros((3, 3), dtype=int)
    H[0, 2] = H[1, 2] = 1
    sim = similarity_from_weights(H, [0.1, 0.2, 0.5])
    assert sim.S[0, 1] == 0.5
    assert sim.S[0, 2] == 0.0 and sim.S[1, 2] == 0.0


def test_similarity_matches_double_loop():
    rng = np.random.default_rng(0)
    H = (rng.random((6, 6)) < 0.4).astype(int)
    sim = simulate_similarity(H, 0.1, 0.6, seed=4)
    beta = np.random.default_rng(4).uniform(0.1, 0.6, 6)
    assert np.all((beta >= 0.1) & (beta < 0.6))
    for i in range(6):
        for j in range(6):
            if i != j:
                ref = sum(H[i, l] * H[j, l] * beta[l] for l in range(6) if l not in (i, j))
                assert sim.S[i, j] == pytest.approx(ref, abs=1e-14)


def test_similarity_range_validation():
    with pytest.raises(DataError):
        simulate_similarity(np.eye(3), 0.6, 0.1)

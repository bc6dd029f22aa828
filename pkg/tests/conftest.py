import numpy as np
import pytest

from oscnet._backend import compiled_kernels, python_kernels

ACCEPTANCE_LINES = []


def dft_oracle(x):
    """Direct O(M^2) DFT with 1/M scaling (bins 0..M-1)."""
    m = len(x)
    t = np.arange(m)
    return np.array([np.sum(x * np.exp(-2j * np.pi * k * t / m)) for k in range(m)]) / m


def random_spd(rng, n, cond=10.0):
    q, _ = np.linalg.qr(rng.normal(size=(n, n)))
    return q @ np.diag(np.geomspace(1.0, cond, n)) @ q.T


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(params=["python", "cython"])
def kernel_backend(request, monkeypatch):
    """Run a test once per kernel backend by patching every importer."""
    if request.param == "cython":
        if compiled_kernels is None:
            pytest.skip("compiled extension not built")
        k = compiled_kernels
    else:
        k = python_kernels
    import oscnet.evaluation
    import oscnet.numerics
    import oscnet.sampler
    for mod in (oscnet.numerics, oscnet.sampler, oscnet.evaluation):
        monkeypatch.setattr(mod, "kernels", k)
    return request.param


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(line[1])


def random_problem(rng, n=3, p=1, rows=9, reps=2, hyper=None, h_prob=0.5):
    """Random sufficient statistics plus a valid random state."""
    from oscnet.model import Hyperparameters, NetworkState
    from oscnet.sampler import accumulate_sufficient_stats
    from oscnet.spectral import SpectralSet
    hyper = hyper or Hyperparameters()
    d = n + p + 1
    R = [rng.normal(size=(rows, d)) for _ in range(reps)]
    Xdot = [rng.normal(size=(rows, n)) for _ in range(reps)]
    sp = SpectralSet(X=[r[:, :n] for r in R], Xdot=Xdot, R=R, omega=np.arange(1, rows // 2 + 1),
                     n_freq=rows - 1)
    H = np.ones((n, d))
    block = np.where(rng.random((n, n)) < h_prob, 1.0, hyper.v0)
    np.fill_diagonal(block, 1.0)
    H[:, :n] = block
    B = rng.normal(size=(d, n))
    B[np.arange(n), np.arange(n)] = -np.abs(B[np.arange(n), np.arange(n)])
    state = NetworkState(B=B, H=H, tau2=rng.gamma(2.0, 1.0, size=(n, d)), w=float(rng.random()),
                         sigma_D=float(rng.gamma(2.0, 0.5)), beta=rng.random(n),
                         sigma_seq=float(rng.gamma(2.0, 0.5)), v0=hyper.v0)
    return accumulate_sufficient_stats(sp), state, sp

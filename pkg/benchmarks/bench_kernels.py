"""Compare the compiled and pure-Python kernels.

    python benchmarks/bench_kernels.py [--repeat 5] [--chain-sweeps 300]

Times each kernel on a representative problem, checks both backends agree,
and times a short end-to-end chain under each backend (the Python run is
forced with OSCNET_PURE_PYTHON=1 in a subprocess).
"""

import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from oscnet._backend import compiled_kernels, python_kernels
from oscnet.similarity import pair_index_matrix


def sweep_case(n=7, seed=0):
    rng = np.random.default_rng(seed)
    v0 = 0.005
    h = np.where(rng.random((n, n)) < 0.3, 1.0, v0)
    np.fill_diagonal(h, 1.0)
    d = n * (n - 1) // 2
    order = np.array([i * n + j for i in range(n) for j in range(n) if i != j], dtype=np.int64)
    return dict(h=h, coef=rng.normal(size=(n, n)), tau2=1.0 / rng.gamma(5, 1 / 50, (n, n)),
                order=order, uniforms=rng.random(order.size), probs=np.empty(order.size),
                w=0.3, v0=v0, resid=rng.normal(size=d), beta=rng.uniform(0.1, 0.6, n),
                pair_index=np.array(pair_index_matrix(n)), inv_var_seq=100.0, use_sim=True)


def run_sweep(k, case):
    args = dict(case, h=case["h"].copy(), resid=case["resid"].copy())
    k.sweep_h(**args)
    return args["h"], args["resid"]


def nnls_case(m=21, n=7, seed=0):
    rng = np.random.default_rng(seed)
    return np.ascontiguousarray(rng.random((m, n))), rng.normal(size=m)


def lasso_case(n=120, p=9, seed=0):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(n, p))
    X[:, 1] = X[:, 0] + 0.05 * rng.normal(size=n)  # correlated pair slows descent
    y = X[:, :3] @ np.array([1.0, -0.5, 0.3]) + 0.1 * rng.normal(size=n)
    gram = np.ascontiguousarray(X.T @ X / n)
    corr = X.T @ y / n
    pen = np.ones(p, dtype=np.uint8)
    pen[-1] = 0
    return gram, corr, pen


def bench(label, fn, repeat):
    number = 1
    while timeit.timeit(fn, number=number) < 0.05:
        number *= 2
    best = min(timeit.repeat(fn, number=number, repeat=repeat)) / number
    return label, best


def chain_seconds(pure, sweeps):
    code = (
        "import time, oscnet as o\n"
        "gt = o.generate_network(7, 0.25, seed=0)\n"
        "sp = o.build_spectral_set(o.simulate_design(gt, [(12,12),(6,18),(8,16),(18,6)]))\n"
        "sim = o.simulate_similarity(gt.H_true, seed=0)\n"
        f"cfg = o.ChainConfig(n_samples={sweeps}, burn_in={sweeps // 2}, n_average={sweeps // 4})\n"
        "t = time.perf_counter(); o.run_chain(sp, config=cfg, sim=sim)\n"
        "print(time.perf_counter() - t, o.KERNEL_BACKEND)\n"
    )
    env = dict(os.environ)
    if pure:
        env["OSCNET_PURE_PYTHON"] = "1"
    else:
        env.pop("OSCNET_PURE_PYTHON", None)
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True,
                         text=True, check=True).stdout.split()
    return float(out[0]), out[1]


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    parser.add_argument("--chain-sweeps", type=int, default=300)
    args = parser.parse_args(argv)

    if compiled_kernels is None:
        print("compiled extension not built; only the Python kernels are available")
        return 1

    case = sweep_case()
    a, b = run_sweep(python_kernels, case), run_sweep(compiled_kernels, case)
    assert np.array_equal(a[0], b[0]) and np.allclose(a[1], b[1], atol=1e-12)
    A, y = nnls_case()
    xa, _ = python_kernels.nnls(A, y, 60)
    xb, _ = compiled_kernels.nnls(A, y, 60)
    assert np.allclose(xa, xb, atol=1e-10)
    gram, corr, pen = lasso_case()

    def lasso(k):
        beta = np.zeros(gram.shape[0])
        k.lasso_cd(gram, corr, beta, pen, 0.01, 1e-10, 100000)

    rows = []
    for name, py_fn, c_fn in [
        ("sweep_h (N=7, similarity on)", lambda: run_sweep(python_kernels, case),
         lambda: run_sweep(compiled_kernels, case)),
        ("nnls (21 x 7)", lambda: python_kernels.nnls(A, y, 60),
         lambda: compiled_kernels.nnls(A, y, 60)),
        ("lasso_cd (p=9, one lambda)", lambda: lasso(python_kernels),
         lambda: lasso(compiled_kernels)),
    ]:
        _, t_py = bench(name, py_fn, args.repeat)
        _, t_c = bench(name, c_fn, args.repeat)
        rows.append((name, t_py, t_c))

    t_py, name_py = chain_seconds(True, args.chain_sweeps)
    t_c, name_c = chain_seconds(False, args.chain_sweeps)
    assert (name_py, name_c) == ("python", "cython")
    rows.append((f"run_chain ({args.chain_sweeps} sweeps, similarity on)", t_py, t_c))

    width = max(len(r[0]) for r in rows)
    print(f"{'kernel':<{width}}  {'python':>12}  {'cython':>12}  {'speedup':>8}")
    for name, t_py, t_c in rows:
        print(f"{name:<{width}}  {t_py * 1e3:>10.3f}ms  {t_c * 1e3:>10.3f}ms  {t_py / t_c:>7.1f}x")
    return 0


if __name__ == "__main__":
    sys.exit(main())

"""Command-line interface: ``oscnet simulate | infer | eval``.

Exit codes: 0 success, 1 usage or configuration error, 2 data error,
3 numerical failure. ``OSCNET_OUT_DIR`` sets the default output directory.
"""

import argparse
import os
import sys
from pathlib import Path

import numpy as np

from . import io
from ._backend import NAME as BACKEND
from .errors import ConfigError, DataError, OscnetError
from .evaluation import aupr, pr_curve, random_baseline, threshold_network
from .model import ChainConfig, Hyperparameters
from .sampler import run_chain
from .simulator import add_noise, generate_network, simulate_design, simulate_similarity
from .spectral import build_spectral_set


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _out_dir(args):
    out = Path(args.out or os.environ.get("OSCNET_OUT_DIR") or "oscnet_out")
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ConfigError(f"cannot create output directory {out}: {exc}") from exc
    if not os.access(out, os.W_OK):
        raise ConfigError(f"output directory {out} is not writable")
    return out


def _chain_overrides(args):
    return {"seed": args.seed, "n_samples": args.samples, "burn_in": args.burn_in,
            "n_average": args.average}


# ---------------------------------------------------------------- simulate

def cmd_simulate(args):
    config = io.load_config(args.config, {"seed": args.seed})
    out = _out_dir(args)
    gt = generate_network(config.n_genes, config.edge_density, seed=config.seed,
                          **config.network_kwargs())
    photoperiods = [tuple(p) for p in config.photoperiods]
    knockouts = [tuple(k) for k in config.knockouts]
    ts = simulate_design(gt, photoperiods, knockouts, n_cycles=config.n_cycles,
                         samples_per_run=config.samples_per_run)
    if config.snr is not None:
        ts = add_noise(ts, config.snr, seed=config.seed)
    io.write_timeseries(ts, out)
    io.write_matrix(out / "truth.csv", gt.H_true, gt.gene_names)
    if config.similarity:
        lo, hi = config.beta_range
        sim = simulate_similarity(gt.H_true, lo, hi, seed=config.seed, gene_names=gt.gene_names)
        io.write_matrix(out / "similarity.csv", sim.S, gt.gene_names, corner="gene")
    io.write_json(out / "ground_truth.json", {
        "gene_names": gt.gene_names,
        "input_names": gt.input_names,
        "A": gt.A_true.tolist(),
        "C": gt.C_true.tolist(),
        "b": gt.b_true.tolist(),
        "replicates": [{"index": k, "photoperiod": list(p), "knockouts": list(ko)}
                       for k, (p, ko) in enumerate(
                           ((p, ko) for p in photoperiods for ko in knockouts), start=1)],
        "time_unit": "day",
    })
    io.write_config(config, out / "config_resolved.yaml")
    print(f"wrote {ts.n_replicates} replicates of {ts.n_times} samples to {out}")
    return 0


# ------------------------------------------------------------------ infer

def cmd_infer(args):
    overrides = _chain_overrides(args)
    if args.no_similarity:
        overrides["use_similarity"] = False
    config = io.load_config(args.config, overrides)
    data_dir = Path(args.data_dir)
    ts = io.read_timeseries(data_dir)
    sim = None
    sim_path = data_dir / "similarity.csv"
    if config.use_similarity and sim_path.exists():
        sim = io.read_similarity(sim_path, ts.gene_names)
    hyper = Hyperparameters(a_w=config.a_w, b_tau=config.b_tau, c_sigma=config.c_sigma,
                            d_seq=config.d_seq, v0=config.v0)
    chain = ChainConfig(n_samples=config.n_samples, burn_in=config.burn_in,
                        n_average=config.n_average, seed=config.seed,
                        use_similarity=sim is not None, random_scan=config.random_scan,
                        decay=config.decay,
                        similarity_warmup=config.similarity_warmup)
    out = _out_dir(args)
    summary, trace = run_chain(build_spectral_set(ts), hyper, chain, sim=sim)

    genes = ts.gene_names
    io.write_matrix(out / "edge_probabilities.csv", summary.edge_prob, genes)
    io.write_matrix(out / "mean_A.csv", summary.A, genes)
    io.write_matrix(out / "mean_C.csv", summary.C, genes, ts.input_names)
    io.write_matrix(out / "geweke_edges.csv", summary.geweke_edges, genes)
    n = len(genes)
    ranked = sorted(((summary.edge_prob[i, j], j, i) for i in range(n) for j in range(n)
                     if i != j), key=lambda e: (-e[0], e[1], e[2]))
    with (out / "edges.tsv").open("w") as fh:
        fh.write("regulator\ttarget\tprobability\n")
        for p, j, i in ranked:
            fh.write(f"{genes[j]}\t{genes[i]}\t{io.fmt(p)}\n")
    io.write_table(out / "traces.csv", ["iteration", "w", "sigma_D", "sigma_seq"],
                   [[k + 1, a, b, c] for k, (a, b, c) in
                    enumerate(zip(trace.w, trace.sigma_D, trace.sigma_seq))])
    io.write_json(out / "diagnostics.json", {
        "n_samples": chain.n_samples,
        "burn_in": chain.burn_in,
        "n_averaged": summary.n_averaged,
        "seed": chain.seed,
        "used_similarity": sim is not None,
        "fraction_edges_abs_z_below_3": summary.fraction_converged,
        "geweke_scalars": summary.geweke_scalars,
        "w_mean": summary.w_mean,
        "sigma_D_mean": summary.sigma_D_mean,
        "beta_mean": summary.beta_mean.tolist(),
        "basal_mean": summary.b.tolist(),
        "kernel_backend": BACKEND,
    })
    io.write_config(config, out / "config_resolved.yaml")
    print(f"averaged {summary.n_averaged} states; "
          f"{summary.fraction_converged:.0%} of edge traces have |z| < 3; wrote {out}")
    return 0


# ------------------------------------------------------------------- eval

def cmd_eval(args):
    pred, pred_genes = io.read_square(args.pred)
    truth, truth_genes = io.read_square(args.truth)
    if pred_genes != truth_genes:
        raise DataError(f"gene sets differ: prediction {pred_genes}, truth {truth_genes}")
    if args.threshold is not None and not 0.0 <= args.threshold <= 1.0:
        raise ConfigError("--threshold must lie in [0, 1]")
    out = _out_dir(args)
    curve = pr_curve(pred, truth)
    area = aupr(curve)
    io.write_table(out / "pr_curve.csv", ["recall", "precision"], curve.tolist())
    n_edges = int(np.count_nonzero(truth[~np.eye(len(truth), dtype=bool)]))
    summary = (f"aupr={io.fmt(area)} random_baseline={io.fmt(random_baseline(truth))} "
               f"true_edges={n_edges}\n")
    (out / "aupr.txt").write_text(summary)
    if args.threshold is not None:
        edges = threshold_network(pred, args.threshold)
        with (out / "edges_thresholded.tsv").open("w") as fh:
            fh.write("regulator\ttarget\tprobability\tbidirectional\treverse_probability\n")
            for e in edges:
                fh.write(f"{pred_genes[e.source]}\t{pred_genes[e.target]}\t"
                         f"{io.fmt(e.probability)}\t{int(e.bidirectional)}\t"
                         f"{io.fmt(e.reverse_probability)}\n")
    sys.stdout.write(summary)
    return 0


# ----------------------------------------------------------------- parser

def build_parser():
    parser = _Parser(prog="oscnet", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p):
        p.add_argument("--out", help="output directory (default: $OSCNET_OUT_DIR or ./oscnet_out)")

    p = sub.add_parser("simulate", help="simulate a ground-truth network and its time series")
    p.add_argument("--config", help="YAML config file")
    p.add_argument("--seed", type=int)
    common(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("infer", help="sample the network posterior from expression CSVs")
    p.add_argument("data_dir")
    p.add_argument("--config", help="YAML config file")
    p.add_argument("--seed", type=int)
    p.add_argument("--samples", type=int, help="total Gibbs sweeps")
    p.add_argument("--burn-in", type=int)
    p.add_argument("--average", type=int, help="trailing sweeps averaged")
    p.add_argument("--no-similarity", action="store_true",
                   help="ignore similarity.csv even if present")
    common(p)
    p.set_defaults(func=cmd_infer)

    p = sub.add_parser("eval", help="score an edge-probability matrix against a truth matrix")
    p.add_argument("pred")
    p.add_argument("truth")
    p.add_argument("--threshold", type=float)
    common(p)
    p.set_defaults(func=cmd_eval)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except OscnetError as exc:
        print(f"oscnet: error: {exc}", file=sys.stderr)
        return exc.exit_code
    except ArithmeticError as exc:
        print(f"oscnet: numerical error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())

"""File formats: expression/input CSVs, square gene matrices, run configs.

Floats are written in their shortest round-trip form so that reruns with the
same inputs produce byte-identical files.
"""

import csv
import json
import re
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np
import yaml

from .errors import ConfigError, DataError
from .model import SimilarityData
from .spectral import TimeSeriesSet

_EXPR_RE = re.compile(r"^expr_(\d+)\.csv$")


def fmt(value):
    """Deterministic text form of a number."""
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    value = float(value)
    if np.isnan(value):
        return "nan"
    return repr(value)


# ---------------------------------------------------------------- configs

@dataclass
class RunConfig:
    """Every key a config file may set; unknown keys are rejected."""

    seed: int = 0
    # simulation
    n_genes: int = 7
    edge_density: float = 0.25
    photoperiods: list = None
    knockouts: list = None
    n_cycles: int = 3
    samples_per_run: int = 28
    snr: float = None
    similarity: bool = True
    beta_range: list = None
    decay_range: list = None
    weight_range: list = None
    input_weight_range: list = None
    basal_range: list = None
    input_probability: float = 0.5
    # inference
    n_samples: int = 5000
    burn_in: int = 4000
    n_average: int = 1000
    use_similarity: bool = True
    random_scan: bool = False
    decay: str = "reflect"
    similarity_warmup: float = 0.5
    a_w: list = None
    b_tau: list = None
    c_sigma: list = None
    d_seq: list = None
    v0: float = 0.005

    def __post_init__(self):
        if self.photoperiods is None:
            self.photoperiods = [[12, 12], [6, 18], [8, 16], [18, 6]]
        if self.knockouts is None:
            self.knockouts = [[]]
        if self.beta_range is None:
            self.beta_range = [0.1, 0.6]
        for name, default in (("a_w", [1.0, 1.0]), ("b_tau", [5.0, 50.0]),
                              ("c_sigma", [0.001, 0.001]), ("d_seq", [10.0, 0.001])):
            if getattr(self, name) is None:
                setattr(self, name, default)

    def as_dict(self):
        return {f.name: getattr(self, f.name) for f in fields(self)}

    def network_kwargs(self):
        out = {"input_probability": self.input_probability}
        for name in ("decay_range", "weight_range", "input_weight_range", "basal_range"):
            if getattr(self, name) is not None:
                out[name] = tuple(getattr(self, name))
        return out


def load_config(path=None, overrides=None):
    """Read a flat YAML mapping into a :class:`RunConfig`, then apply overrides."""
    data = {}
    if path is not None:
        path = Path(path)
        if not path.is_file():
            raise ConfigError(f"config file not found: {path}")
        try:
            data = yaml.safe_load(path.read_text()) or {}
        except yaml.YAMLError as exc:
            raise ConfigError(f"cannot parse config {path}: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError(f"config {path} must be a key-value mapping")
    known = {f.name for f in fields(RunConfig)}
    unknown = sorted(set(data) - known)
    if unknown:
        raise ConfigError(f"unknown config key(s): {', '.join(unknown)}")
    data.update({k: v for k, v in (overrides or {}).items() if v is not None})
    try:
        return RunConfig(**data)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc


def write_config(config, path):
    Path(path).write_text(yaml.safe_dump(config.as_dict(), sort_keys=True,
                                         default_flow_style=None))


# ----------------------------------------------------------- time series

def _read_table(path):
    path = Path(path)
    try:
        with path.open(newline="") as fh:
            rows = [row for row in csv.reader(fh) if row]
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    if len(rows) < 2:
        raise DataError(f"{path} has no data rows")
    header, body = rows[0], rows[1:]
    try:
        values = np.array([[float(c) for c in row] for row in body])
    except ValueError as exc:
        raise DataError(f"non-numeric cell in {path}: {exc}") from exc
    if values.shape[1] != len(header):
        raise DataError(f"{path}: rows do not match the header width")
    return header, values


def write_table(path, header, rows):
    with Path(path).open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([c if isinstance(c, str) else fmt(c) for c in row])


def write_timeseries(ts, out_dir):
    """Write ``expr_<k>.csv`` and ``inputs_<k>.csv`` for every replicate."""
    out_dir = Path(out_dir)
    times = np.arange(ts.n_times) * ts.dt
    for k, (x, u) in enumerate(zip(ts.replicates, ts.inputs), start=1):
        write_table(out_dir / f"expr_{k}.csv", ["time"] + ts.gene_names,
                    [[t, *row] for t, row in zip(times, x)])
        write_table(out_dir / f"inputs_{k}.csv", ["time"] + ts.input_names,
                    [[t, *row] for t, row in zip(times, u)])


def _uniform_dt(times, path):
    if times.shape[0] < 3:
        raise DataError(f"{path}: need at least 3 time points")
    steps = np.diff(times)
    dt = float(times[-1] - times[0]) / (times.shape[0] - 1)
    if dt <= 0 or not np.allclose(steps, dt, rtol=1e-6, atol=1e-12):
        raise DataError(f"{path}: time column must be increasing and uniformly spaced")
    return dt


def read_timeseries(data_dir):
    """Load every ``expr_<k>.csv`` (and matching ``inputs_<k>.csv``) in a directory."""
    data_dir = Path(data_dir)
    if not data_dir.is_dir():
        raise DataError(f"data directory not found: {data_dir}")
    found = sorted((int(m.group(1)), p) for p in data_dir.iterdir()
                   if (m := _EXPR_RE.match(p.name)))
    if not found:
        raise DataError(f"no expr_<k>.csv files in {data_dir}")
    reps, inputs, genes, input_names, dt = [], [], None, None, None
    first_path = None
    for k, path in found:
        header, values = _read_table(path)
        if header[0] != "time":
            raise DataError(f"{path}: first column must be 'time'")
        if genes is None:
            genes, first_path = header[1:], path
        elif header[1:] != genes:
            raise DataError(f"gene columns differ: {first_path.name} has {genes}, "
                            f"{path.name} has {header[1:]}")
        this_dt = _uniform_dt(values[:, 0], path)
        if dt is None:
            dt = this_dt
        elif not np.isclose(dt, this_dt, rtol=1e-6):
            raise DataError(f"{path}: sampling interval differs from other replicates")
        reps.append(values[:, 1:])

        in_path = data_dir / f"inputs_{k}.csv"
        if in_path.exists():
            in_header, in_values = _read_table(in_path)
            if in_values.shape[0] != values.shape[0] or \
                    not np.allclose(in_values[:, 0], values[:, 0]):
                raise DataError(f"{in_path}: time column differs from {path.name}")
            names = in_header[1:]
            u = in_values[:, 1:]
        else:
            names, u = [], np.zeros((values.shape[0], 0))
        if input_names is None:
            input_names = names
        elif names != input_names:
            raise DataError(f"{in_path}: input columns differ from other replicates")
        inputs.append(u)
    return TimeSeriesSet(replicates=reps, inputs=inputs, dt=dt, gene_names=genes,
                         input_names=input_names)


# ------------------------------------------------------- square matrices

def write_matrix(path, matrix, row_names, col_names=None, corner="target"):
    col_names = row_names if col_names is None else col_names
    write_table(path, [corner] + list(col_names),
                [[name, *row] for name, row in zip(row_names, np.asarray(matrix))])


def read_matrix(path):
    """Labelled matrix CSV -> (matrix, row_names, col_names)."""
    path = Path(path)
    try:
        with path.open(newline="") as fh:
            rows = [row for row in csv.reader(fh) if row]
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    if len(rows) < 2:
        raise DataError(f"{path} has no data rows")
    cols = rows[0][1:]
    names = [r[0] for r in rows[1:]]
    try:
        values = np.array([[float(c) for c in r[1:]] for r in rows[1:]])
    except ValueError as exc:
        raise DataError(f"non-numeric cell in {path}: {exc}") from exc
    if values.ndim != 2 or values.shape[1] != len(cols):
        raise DataError(f"{path}: rows do not match the header width")
    return values, names, cols


def read_square(path):
    values, rows, cols = read_matrix(path)
    if rows != cols:
        raise DataError(f"{path}: row and column labels differ")
    return values, rows


def read_similarity(path, gene_names):
    values, names = read_square(path)
    if names != list(gene_names):
        raise DataError(f"{path}: similarity genes {names} do not match data genes "
                        f"{list(gene_names)}")
    return SimilarityData(S=values, gene_names=names)


def write_json(path, payload):
    Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")

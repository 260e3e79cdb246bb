"""Result tables and the on-disk dataset format.

Result tables are CSV files whose leading ``#`` lines carry metadata
(config hash, seed, package version, timestamp, the config itself). The
body is deterministic: floats are written with ``%.17g``.

A dataset is a points CSV (one point per row, optional final ``label``
column) plus a JSON sidecar naming the optional clean-points and bases
files.
"""

import csv
import datetime
import json
import os
from dataclasses import dataclass, field

import numpy as np

from ..geometry import DataSet, SubspaceModel

TIMESTAMP_KEY = "timestamp"


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return "%.17g" % float(v)
    return str(v)


@dataclass
class ResultTable:
    columns: list
    rows: list = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    def add(self, *values):
        if len(values) != len(self.columns):
            raise ValueError(f"row has {len(values)} values, table has {len(self.columns)} columns")
        self.rows.append(values)

    def column(self, name):
        j = self.columns.index(name)
        return [r[j] for r in self.rows]

    def body(self):
        """CSV body text (header plus rows), without metadata."""
        lines = [",".join(self.columns)]
        lines += [",".join(_fmt(v) for v in r) for r in self.rows]
        return "\n".join(lines) + "\n"

    def write(self, path):
        os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
        meta = dict(self.meta)
        meta.setdefault(TIMESTAMP_KEY, datetime.datetime.now(datetime.timezone.utc).isoformat())
        with open(path, "w", newline="") as fh:
            for k, v in meta.items():
                text = v if isinstance(v, str) else json.dumps(v, sort_keys=True)
                fh.write(f"# {k}: {text}\n")
            fh.write(self.body())
        return path


def read_table(path):
    """Parse a result table; returns ``(meta, columns, rows)`` with string cells."""
    meta, body = {}, []
    with open(path) as fh:
        for line in fh:
            if line.startswith("#"):
                key, _, val = line[1:].strip().partition(": ")
                meta[key] = val
            else:
                body.append(line)
    reader = csv.reader(body)
    columns = next(reader)
    return meta, columns, [r for r in reader if r]


def table_body(path):
    """File contents with the metadata lines stripped."""
    with open(path) as fh:
        return "".join(line for line in fh if not line.startswith("#"))


def _write_matrix(path, M, header, extra=None, extra_name=None):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header + ([extra_name] if extra is not None else []))
        for i, row in enumerate(M):
            cells = ["%.17g" % v for v in row]
            if extra is not None:
                cells.append(str(int(extra[i])))
            w.writerow(cells)


def _read_matrix(path):
    with open(path) as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = [r for r in reader if r]
    return header, rows


def save_dataset(dataset, out_dir, models=None, stem="data"):
    """Write ``dataset`` (and optionally its true bases) under ``out_dir``.

    Returns the path of the JSON sidecar.
    """
    os.makedirs(out_dir, exist_ok=True)
    n, N = dataset.points.shape
    coords = [f"x{j}" for j in range(n)]
    files = {"points": f"{stem}_points.csv", "clean_points": None, "bases": None}
    _write_matrix(os.path.join(out_dir, files["points"]), dataset.points.T, coords,
                  extra=dataset.labels, extra_name="label")
    if dataset.clean_points is not None:
        files["clean_points"] = f"{stem}_clean.csv"
        _write_matrix(os.path.join(out_dir, files["clean_points"]), dataset.clean_points.T, coords)
    if models:
        files["bases"] = f"{stem}_bases.csv"
        owners = np.concatenate([np.full(m.dim, idx) for idx, m in enumerate(models)])
        cols = np.hstack([m.basis for m in models]).T
        _write_matrix(os.path.join(out_dir, files["bases"]), cols, coords, extra=owners, extra_name="subspace")
    sidecar = {
        "n": n,
        "N": N,
        "L": None if dataset.labels is None else int(np.unique(dataset.labels).size),
        "epsilon": dataset.noise_bound,
        **files,
    }
    path = os.path.join(out_dir, f"{stem}.json")
    with open(path, "w") as fh:
        json.dump(sidecar, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def load_dataset(path):
    """Read a dataset from its JSON sidecar or directly from a points CSV.

    Returns
    -------
    dataset : DataSet
        Points are stored as columns.
    models : list of SubspaceModel or None
    """
    if path.endswith(".json"):
        with open(path) as fh:
            side = json.load(fh)
        base = os.path.dirname(os.path.abspath(path))
        points_path = os.path.join(base, side["points"])
    else:
        side, base, points_path = {}, None, path

    header, rows = _read_matrix(points_path)
    has_label = bool(header) and header[-1] == "label"
    raw = np.array([[float(v) for v in (r[:-1] if has_label else r)] for r in rows])
    labels = np.array([int(r[-1]) for r in rows]) if has_label else None
    if raw.ndim != 2 or raw.shape[0] == 0:
        raise ValueError(f"{points_path}: no points found")
    n = raw.shape[1]
    if "n" in side and side["n"] != n:
        raise ValueError(f"sidecar says n={side['n']} but points have {n} coordinates")
    if "N" in side and side["N"] != raw.shape[0]:
        raise ValueError(f"sidecar says N={side['N']} but file holds {raw.shape[0]} points")

    clean = None
    if side.get("clean_points"):
        _, crow = _read_matrix(os.path.join(base, side["clean_points"]))
        clean = np.array(crow, dtype=float).T
    models = None
    if side.get("bases"):
        _, brow = _read_matrix(os.path.join(base, side["bases"]))
        arr = np.array(brow, dtype=float)
        owner = arr[:, -1].astype(int)
        models = [SubspaceModel(arr[owner == k, :-1].T) for k in np.unique(owner)]
    dataset = DataSet(points=raw.T, labels=labels, clean_points=clean, noise_bound=side.get("epsilon"))
    return dataset, models

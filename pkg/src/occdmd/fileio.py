"""Text file formats: trajectory CSV, dataset manifest, model file and sweep tables.

CSV and .dat floats are written with 17 significant digits and JSON floats
with Python's shortest round-trip repr, so every finite double survives a
write/read cycle unchanged.
"""

from __future__ import annotations

import csv
import json
import os
from pathlib import Path

import numpy as np

from .errors import InputError, ParseError, SchemaError
from .estimators import Model
from .kernel import KernelParams
from .trajectory import QuadratureSpec, Trajectory

FLOAT_FMT = ".17g"
MANIFEST_NAME = "manifest.json"
MODEL_FORMAT = "occdmd-model/1"
MANIFEST_FORMAT = "occdmd-dataset/1"


def fmt(x: float) -> str:
    return format(float(x), FLOAT_FMT)


def _parse_float(text, path, line):
    try:
        return float(text)
    except ValueError:
        raise ParseError(f"not a number: {text!r}", path, line) from None


# -- sweep tables ------------------------------------------------------------

def write_dat(rows, path, comments=()) -> None:
    """Write sweep rows as whitespace-separated ``lambda okr_err sldmd_err`` columns."""
    lines = [f"# {c}" for c in comments]
    lines.append("# lambda okr_err sldmd_err")
    lines += [f"{fmt(r.lam)} {fmt(r.okr_err)} {fmt(r.sldmd_err)}" for r in rows]
    Path(path).write_text("\n".join(lines) + "\n")


def read_dat(path):
    from .bench import SweepRow

    rows = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) != 3:
                raise ParseError(f"expected 3 columns, got {len(parts)}", path, lineno)
            rows.append(SweepRow(*(_parse_float(p, path, lineno) for p in parts)))
    return rows


# -- trajectories --------------------------------------------------------------

def write_trajectory_csv(traj: Trajectory, path) -> None:
    """Write ``t,x1,...,xn`` rows to a path or an open text stream."""
    if hasattr(path, "write"):
        _write_csv_rows(traj, path)
        return
    with open(path, "w", newline="") as fh:
        _write_csv_rows(traj, fh)


def _write_csv_rows(traj, fh):
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["t"] + [f"x{i + 1}" for i in range(traj.n)])
    for t, x in zip(traj.times, traj.states):
        w.writerow([fmt(t)] + [fmt(v) for v in x])


def read_trajectory_csv(path) -> Trajectory:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError("empty file", path, 1) from None
        header = [h.strip() for h in header]
        n = len(header) - 1
        if n < 1 or header[0] != "t" or header[1:] != [f"x{i + 1}" for i in range(n)]:
            raise ParseError(f"bad header {header}; expected t,x1,...,xn", path, 1)
        times, states = [], []
        for row in reader:
            lineno = reader.line_num
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != n + 1:
                raise ParseError(f"expected {n + 1} fields, got {len(row)}", path, lineno)
            vals = [_parse_float(c, path, lineno) for c in row]
            if not all(np.isfinite(vals)):
                raise ParseError("non-finite value", path, lineno)
            if times and vals[0] <= times[-1]:
                raise ParseError(f"time {vals[0]!r} is not greater than the previous time {times[-1]!r}",
                                 path, lineno)
            times.append(vals[0])
            states.append(vals[1:])
    if len(times) < 3:
        raise SchemaError(f"{path}: a trajectory needs at least 3 samples, got {len(times)}")
    return Trajectory(np.array(times), np.array(states))


def write_trajectories(dataset, directory, meta=None) -> Path:
    """Write one CSV per trajectory plus ``manifest.json``; returns the manifest path."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    dataset = list(dataset)
    if not dataset:
        raise InputError("cannot write an empty dataset")
    width = max(4, len(str(len(dataset) - 1)))
    files = []
    for k, tr in enumerate(dataset):
        name = f"traj_{k:0{width}d}.csv"
        write_trajectory_csv(tr, directory / name)
        files.append(name)
    manifest = {
        "format": MANIFEST_FORMAT,
        "n": dataset[0].n,
        "M": len(dataset),
        **(meta or {}),
        "files": files,
    }
    path = directory / MANIFEST_NAME
    path.write_text(json.dumps(manifest, indent=2, sort_keys=False) + "\n")
    return path


def _load_json(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, path, exc.lineno) from None


def read_manifest(path) -> dict:
    path = Path(path)
    if path.is_dir():
        path = path / MANIFEST_NAME
    manifest = _load_json(path)
    for key in ("n", "M", "files"):
        if key not in manifest:
            raise SchemaError(f"{path}: manifest lacks {key!r}")
    manifest["_path"] = path
    return manifest


def read_trajectories(path) -> list[Trajectory]:
    """Load a dataset from a manifest file or the directory containing it."""
    manifest = read_manifest(path)
    base = manifest["_path"].parent
    trajs = [read_trajectory_csv(base / name) for name in manifest["files"]]
    if len(trajs) != manifest["M"]:
        raise SchemaError(f"manifest declares M={manifest['M']} but lists {len(trajs)} files")
    for name, tr in zip(manifest["files"], trajs):
        if tr.n != manifest["n"]:
            raise SchemaError(f"{name}: dimension {tr.n} but manifest declares n={manifest['n']}")
    return trajs


# -- models ----------------------------------------------------------------------

def save_model(model: Model, path, data_dir=None) -> Path:
    """Write the model file; training trajectories go to ``data_dir`` (default ``<stem>_data/``)."""
    path = Path(path)
    if data_dir is None:
        data_dir = path.with_name(path.stem + "_data")
    manifest = write_trajectories(model.trajs, data_dir)
    doc = {
        "format": MODEL_FORMAT,
        "n": model.n,
        "M": model.M,
        "method": model.method,
        "lambda": model.lam,
        "mu_r": model.params_r.mu,
        "quad": model.quad.rule,
        "A": model.A.tolist(),
        "trajectories": os.path.relpath(manifest, path.parent),
    }
    path.write_text(json.dumps(doc, indent=1) + "\n")
    return path


def load_model(path) -> Model:
    path = Path(path)
    doc = _load_json(path)
    for key in ("n", "M", "method", "lambda", "mu_r", "quad", "A", "trajectories"):
        if key not in doc:
            raise SchemaError(f"{path}: model file lacks {key!r}")
    try:
        A = np.array([[float(v) for v in row] for row in doc["A"]], dtype=float)
    except (TypeError, ValueError) as exc:
        raise SchemaError(f"{path}: bad coefficient matrix: {exc}") from None
    if A.shape != (doc["n"], doc["M"]):
        raise SchemaError(f"{path}: A has shape {A.shape}, header says ({doc['n']}, {doc['M']})")
    trajs = read_trajectories(path.parent / doc["trajectories"])
    if len(trajs) != doc["M"]:
        raise SchemaError(f"{path}: {len(trajs)} training trajectories, header says M={doc['M']}")
    return Model(A, trajs, KernelParams(float(doc["mu_r"])), QuadratureSpec(doc["quad"]),
                 doc["method"], float(doc["lambda"]))

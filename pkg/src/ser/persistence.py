"""On-disk formats: feature CSV, mask JSON, convergence and ROC CSVs."""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .classifiers import Dataset
from .errors import DataError, MalformedHeader

SIDECAR = "config.json"


def fmt_float(x) -> str:
    return format(float(x), ".9g")


def write_features_csv(path, rows) -> None:
    """``rows`` is a list of (path, class_name, vector); all vectors share one width."""
    width = len(rows[0][2]) if rows else 0
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["path", "label", *(f"f{i}" for i in range(width))])
        for p, label, vec in rows:
            w.writerow([p, label, *(fmt_float(v) for v in vec)])


class FeatureTable:
    def __init__(self, paths, names, rows, class_names):
        self.paths = paths
        self.names = names
        self.rows = rows
        self.class_names = class_names

    @property
    def dataset(self) -> Dataset:
        ids = np.array([self.class_names.index(n) for n in self.names])
        return Dataset(self.rows, ids, len(self.class_names))


def read_features_csv(path) -> FeatureTable:
    """Load a feature CSV. Class order comes from the sidecar when present,
    else from the sorted set of labels in the file."""
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"features file not found: {path}")
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if not header or header[:2] != ["path", "label"]:
            raise MalformedHeader(f"{path}: header must start with path,label")
        paths, names, rows = [], [], []
        for rec in reader:
            paths.append(rec[0])
            names.append(rec[1])
            rows.append([float(v) for v in rec[2:]])
    if not rows:
        raise DataError(f"{path}: no feature rows")
    class_names = sorted(set(names))
    sidecar = path.parent / SIDECAR
    if sidecar.is_file():
        stored = json.loads(sidecar.read_text(encoding="utf-8")).get("class_names")
        if stored and set(names) <= set(stored):
            class_names = list(stored)
    return FeatureTable(paths, names, np.array(rows, dtype=np.float64), class_names)


def write_json(path, obj) -> None:
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def write_sidecar(out_dir, config, **extra) -> None:
    body = {"config": dict(config), **extra}
    write_json(Path(out_dir) / SIDECAR, body)


def write_mask_json(path, result, n_features: int) -> None:
    write_json(path, {
        "algo": result.algo,
        "n_features": n_features,
        "selected_count": result.mask.selected_count,
        "fitness": float(fmt_float(result.fitness)),
        "evaluations": result.record.evaluations,
        "indices": result.mask.indices,
    })


def read_mask_json(path, n_features: int) -> np.ndarray:
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"mask file not found: {path}")
    d = json.loads(path.read_text(encoding="utf-8"))
    if d.get("n_features", n_features) != n_features:
        raise DataError(f"{path}: mask is for {d['n_features']} features, data has {n_features}")
    bits = np.zeros(n_features, dtype=bool)
    bits[d["indices"]] = True
    if not bits.any():
        raise DataError(f"{path}: empty mask")
    return bits


def write_convergence_csv(path, result) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["iter", "best_fitness", "selected_count"])
        for it, f, c in result.convergence_rows():
            w.writerow([it, fmt_float(f), c])


def write_roc_csvs(out_dir, roc, class_names) -> list:
    written = []
    for entry in roc:
        name = class_names[entry.class_id]
        p = Path(out_dir) / f"roc_{name}.csv"
        with open(p, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["class", "threshold", "fpr", "tpr"])
            for t, x, y in zip(entry.thresholds, entry.fpr, entry.tpr):
                w.writerow([name, fmt_float(t), fmt_float(x), fmt_float(y)])
        written.append(p)
    return written

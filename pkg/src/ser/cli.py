"""``ser`` command line: extract -> select -> evaluate / compare.

Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .audio_io import load_labeled, parallel_map, scan_corpus
from .classifiers import standardize_fit
from .config import RunConfig, read_config_file
from .errors import SerError, UsageError
from .evaluation import cross_validate
from .lpc import extract_features
from .optimizers import ALGORITHMS, select_features
from .persistence import (
    read_features_csv,
    read_mask_json,
    write_convergence_csv,
    write_features_csv,
    write_json,
    write_mask_json,
    write_roc_csvs,
    write_sidecar,
)

log = logging.getLogger("ser")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _sidecar_config(cfg: RunConfig) -> dict:
    return {k: v for k, v in cfg.items() if k != "out"}


def _out_dir(cfg: RunConfig) -> Path:
    if not cfg["out"]:
        raise UsageError("--out is required")
    out = Path(cfg["out"])
    out.mkdir(parents=True, exist_ok=True)
    return out


# --- subcommands -------------------------------------------------------------


def cmd_extract(cfg: RunConfig) -> int:
    if not cfg["data"]:
        raise UsageError("--data is required")
    out = _out_dir(cfg)
    manifest = scan_corpus(cfg["data"], cfg["convention"], cfg["manifest"] or None)
    pre, mcfg, lcfg = cfg.preprocess(), cfg.mfcc(), cfg.lpc()

    def work(entry):
        try:
            sig = load_labeled(entry)
            return entry, extract_features(sig, pre, mcfg, lcfg).values, None
        except SerError as exc:
            return entry, None, exc

    results = parallel_map(work, manifest.entries)
    rows, failures = [], list(manifest.errors)
    code = 2 if manifest.errors else 0
    for (path, label), vec, exc in results:
        if exc is not None:
            failures.append((path, str(exc)))
            code = max(code, exc.exit_code)
        else:
            rows.append((path, label.class_name, vec))
    if rows:
        write_features_csv(out / "features.csv", rows)
    write_sidecar(
        out, _sidecar_config(cfg),
        class_names=manifest.class_names,
        class_counts={manifest.class_names[k]: v for k, v in manifest.class_counts.items()},
        n_rows=len(rows),
        n_features=len(rows[0][2]) if rows else 0,
        failures=[{"path": p, "error": e} for p, e in failures],
    )
    for p, e in failures:
        print(f"failed: {p}: {e}", file=sys.stderr)
    width = len(rows[0][2]) if rows else 0
    print(f"extracted {len(rows)} x {width} features -> {out / 'features.csv'}")
    return code


def _load_standardized(cfg: RunConfig):
    table = read_features_csv(cfg["features_csv"])
    data = table.dataset
    return table, standardize_fit(data).apply(data)


def _select(cfg: RunConfig, data, algo: str):
    return select_features(
        data, algo, cfg.optimizer_config(algo), cfg["opt.alpha_fs"], k=cfg["knn.k"]
    )


def cmd_select(cfg: RunConfig) -> int:
    out = _out_dir(cfg)
    table, data = _load_standardized(cfg)
    algo = cfg["opt.algo"]
    res = _select(cfg, data, algo)
    write_mask_json(out / "mask.json", res, data.rows.shape[1])
    write_convergence_csv(out / "convergence.csv", res)
    write_sidecar(out, _sidecar_config(cfg), class_names=table.class_names)
    print(f"{algo}: selected {res.mask.selected_count}/{data.rows.shape[1]} features, "
          f"fitness {res.fitness:.6f}")
    return 0


def _cv(cfg: RunConfig, data, algo=None, mask=None, per_fold=False):
    selector = None
    if per_fold:
        algo = algo or cfg["opt.algo"]

        def selector(train, seed):
            ocfg = cfg.optimizer_config(algo)
            ocfg = type(ocfg)(**{**ocfg.__dict__, "seed": seed})
            return select_features(train, algo, ocfg, cfg["opt.alpha_fs"], k=cfg["knn.k"]).mask

    return cross_validate(
        data, cfg.classifier_config(), cfg["folds"], cfg.substream_seed("folds"),
        mask=mask, selector=selector,
    )


def cmd_evaluate(cfg: RunConfig) -> int:
    out = _out_dir(cfg)
    table = read_features_csv(cfg["features_csv"])
    data = table.dataset
    mask = None
    if cfg.get("mask_path"):
        mask = read_mask_json(cfg["mask_path"], data.rows.shape[1])
    elif cfg.get("global_mask"):
        std_all = standardize_fit(data).apply(data)
        mask = _select(cfg, std_all, cfg["opt.algo"]).mask.bits
    report = _cv(cfg, data, mask=mask, per_fold=bool(cfg.get("select_per_fold")))
    text = report.table()
    print(text)
    (out / "report.txt").write_text(text + "\n", encoding="utf-8")
    body = report.to_dict()
    body["class_names"] = table.class_names
    write_json(out / "report.json", body)
    write_roc_csvs(out, report.roc, table.class_names)
    write_sidecar(out, _sidecar_config(cfg), class_names=table.class_names)
    return 0


COMPARE_COLUMNS = ("algo", "selected_count", "accuracy", "precision", "recall", "f1")


def cmd_compare(cfg: RunConfig) -> int:
    out = _out_dir(cfg)
    table = read_features_csv(cfg["features_csv"])
    data = table.dataset
    algos = [a.strip() for a in cfg["algos"].split(",") if a.strip()]
    for a in algos:
        if a not in ALGORITHMS:
            raise UsageError(f"unknown optimizer {a!r}")
    per_fold = bool(cfg.get("select_per_fold"))
    std_all = standardize_fit(data).apply(data)
    rows = []
    for algo in algos:
        if per_fold:
            report = _cv(cfg, data, algo=algo, per_fold=True)
            count = float(np.mean([len(m) for m in report.masks]))
        else:
            res = _select(cfg, std_all, algo)
            report = _cv(cfg, data, mask=res.mask.bits)
            count = res.mask.selected_count
        m = report.mean
        rows.append({"algo": algo.upper(), "selected_count": count, "accuracy": m["accuracy"],
                     "precision": m["precision"], "recall": m["recall"], "f1": m["f1"]})

    lines = [f"{'Algorithm':<10}{'Selected':>10}{'Accuracy':>10}{'Precision':>11}{'Recall':>9}{'F1':>9}"]
    for r in rows:
        lines.append(f"{r['algo']:<10}{r['selected_count']:>10g}{r['accuracy']:>10.2f}"
                     f"{r['precision']:>11.2f}{r['recall']:>9.2f}{r['f1']:>9.2f}")
    text = "\n".join(lines)
    print(text)
    (out / "compare.txt").write_text(text + "\n", encoding="utf-8")
    with open(out / "compare.csv", "w", encoding="utf-8") as fh:
        fh.write(",".join(COMPARE_COLUMNS) + "\n")
        for r in rows:
            fh.write(f"{r['algo']},{r['selected_count']:g},{r['accuracy']:.2f},{r['precision']:.2f},"
                     f"{r['recall']:.2f},{r['f1']:.2f}\n")
    write_json(out / "compare.json", {"rows": rows, "class_names": table.class_names})
    write_sidecar(out, _sidecar_config(cfg), class_names=table.class_names)
    return 0


# --- argument parsing ----------------------------------------------------------


def _common(p):
    p.add_argument("--config", help="key=value config file")
    p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                   help="override any config key (repeatable)")
    p.add_argument("--seed", type=int)
    p.add_argument("--out")
    p.add_argument("-v", "--verbose", action="store_true")


def _optimizer_flags(p):
    p.add_argument("--algo", choices=ALGORITHMS)
    p.add_argument("--pop", type=int)
    p.add_argument("--iters", type=int)
    p.add_argument("--alpha-fs", type=float)
    p.add_argument("--threshold", type=float)
    p.add_argument("--somersault-f", type=float)
    p.add_argument("--k", type=int, help="KNN neighbor count")


def _classifier_flags(p):
    p.add_argument("--classifier", choices=("knn", "mlp"))
    p.add_argument("--folds", type=int)
    p.add_argument("--hidden", help="MLP hidden sizes, e.g. 5,5")
    p.add_argument("--lr", type=float)
    p.add_argument("--epochs", type=int)
    p.add_argument("--batch", type=int)


def build_parser():
    ap = _Parser(prog="ser", description="Speech emotion recognition pipeline")
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("extract", help="WAV corpus -> MFCC+LPC feature CSV")
    _common(p)
    p.add_argument("--data")
    p.add_argument("--convention", choices=("savee", "emodb", "manifest", "csv-manifest"))
    p.add_argument("--manifest", help="path,label CSV (manifest convention)")
    p.add_argument("--features", dest="stages", help="comma list from mfcc,lpc")
    p.add_argument("--pre-emphasis", type=float)
    p.add_argument("--frame-ms", type=float)
    p.add_argument("--hop-fraction", type=float)
    p.add_argument("--window", choices=("hamming", "rectangular"))

    p = sub.add_parser("select", help="wrapper feature selection")
    _common(p)
    p.add_argument("--features", dest="features_csv", required=True)
    _optimizer_flags(p)

    p = sub.add_parser("evaluate", help="k-fold evaluation report")
    _common(p)
    p.add_argument("--features", dest="features_csv", required=True)
    _classifier_flags(p)
    _optimizer_flags(p)
    g = p.add_mutually_exclusive_group()
    g.add_argument("--mask", dest="mask_path")
    g.add_argument("--select-per-fold", action="store_true")
    g.add_argument("--global-mask", action="store_true",
                   help="select once on all rows before cross-validation")

    p = sub.add_parser("compare", help="optimizer comparison table")
    _common(p)
    p.add_argument("--features", dest="features_csv", required=True)
    p.add_argument("--algos", default="ga,gwo,pso,mrfo")
    p.add_argument("--select-per-fold", action="store_true")
    _classifier_flags(p)
    _optimizer_flags(p)
    return ap


FLAG_KEYS = {
    "data": "data", "convention": "convention", "manifest": "manifest", "stages": "features",
    "seed": "seed", "out": "out", "pre_emphasis": "pre_emphasis", "frame_ms": "frame_ms",
    "hop_fraction": "hop_fraction", "window": "window", "algo": "opt.algo", "pop": "opt.pop",
    "iters": "opt.iters", "alpha_fs": "opt.alpha_fs", "threshold": "opt.threshold",
    "somersault_f": "opt.somersault_f", "k": "knn.k", "classifier": "classifier", "folds": "folds",
    "hidden": "mlp.hidden", "lr": "mlp.lr", "epochs": "mlp.epochs", "batch": "mlp.batch",
}
PASSTHROUGH = ("features_csv", "mask_path", "select_per_fold", "global_mask", "algos")


def config_from_args(args) -> RunConfig:
    file_values = read_config_file(args.config) if args.config else {}
    overrides = {}
    for item in args.set:
        if "=" not in item:
            raise UsageError(f"--set expects KEY=VALUE, got {item!r}")
        k, v = item.split("=", 1)
        overrides[k.strip()] = v
    ns = vars(args)
    for attr, key in FLAG_KEYS.items():
        if ns.get(attr) is not None:
            overrides[key] = ns[attr]
    cfg = RunConfig.build(file_values, overrides)
    for attr in PASSTHROUGH:
        if attr in ns and ns[attr] is not None:
            cfg[attr] = ns[attr]
    return cfg


COMMANDS = {"extract": cmd_extract, "select": cmd_select, "evaluate": cmd_evaluate, "compare": cmd_compare}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = config_from_args(args)
        return COMMANDS[args.command](cfg)
    except FileNotFoundError as exc:
        print(f"ser: {exc}", file=sys.stderr)
        return 2
    except SerError as exc:
        print(f"ser: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())

"""Run configuration: flat ``key=value`` settings shared by every subcommand."""

from __future__ import annotations

import json
import zlib
from pathlib import Path

import numpy as np

from .classifiers import ClassifierConfig
from .dsp import PreprocessConfig
from .errors import UsageError
from .lpc import LpcConfig
from .mfcc import MfccConfig
from .optimizers import MrfoConfig, OptimizerConfig

DEFAULTS = {
    "data": "",
    "convention": "savee",
    "manifest": "",
    "out": "",
    "features": "mfcc,lpc",
    "seed": 0,
    "pre_emphasis": 0.97,
    "frame_ms": 50.0,
    "hop_fraction": 0.5,
    "window": "hamming",
    "mfcc.num_filters": 26,
    "mfcc.num_coeffs": 12,
    "mfcc.target_frames": 18,
    "mfcc.fmin": 0.0,
    "mfcc.fmax": "",
    "lpc.order": 13,
    "lpc.target_frames": 57,
    "lpc.include_gain": False,
    "lpc.error_header": True,
    "classifier": "knn",
    "folds": 5,
    "knn.k": 5,
    "mlp.hidden": "5,5",
    "mlp.lr": 0.01,
    "mlp.epochs": 300,
    "mlp.batch": 16,
    "opt.algo": "mrfo",
    "opt.pop": 30,
    "opt.iters": 100,
    "opt.somersault_f": 2.0,
    "opt.alpha_fs": 0.99,
    "opt.threshold": 0.5,
}


def _coerce(key: str, value):
    default = DEFAULTS.get(key)
    if default is None:
        raise UsageError(f"unknown config key {key!r}")
    if isinstance(value, str):
        value = value.strip()
        if isinstance(default, bool):
            if value.lower() in ("1", "true", "yes", "on"):
                return True
            if value.lower() in ("0", "false", "no", "off"):
                return False
            raise UsageError(f"{key}: expected a boolean, got {value!r}")
        try:
            if isinstance(default, int):
                return int(value)
            if isinstance(default, float):
                return float(value)
        except ValueError:
            raise UsageError(f"{key}: cannot parse {value!r}") from None
    return value


def read_config_file(path) -> dict:
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    out = {}
    for n, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{n}: expected key=value")
        k, v = line.split("=", 1)
        out[k.strip()] = _coerce(k.strip(), v)
    return out


class RunConfig(dict):
    """Defaults, overlaid by a config file, overlaid by explicit flags."""

    @classmethod
    def build(cls, file_values=None, overrides=None) -> "RunConfig":
        cfg = cls(DEFAULTS)
        for src in (file_values or {}, overrides or {}):
            for k, v in src.items():
                if v is not None:
                    cfg[k] = _coerce(k, v)
        return cfg

    def substream_seed(self, name: str) -> int:
        """Seed for a named consumer of randomness, derived from the master seed."""
        ss = np.random.SeedSequence([int(self["seed"]), zlib.crc32(name.encode())])
        return int(ss.generate_state(1)[0])

    def preprocess(self) -> PreprocessConfig:
        return PreprocessConfig(self["pre_emphasis"], self["frame_ms"], self["hop_fraction"], self["window"])

    def feature_stages(self) -> set:
        stages = {s.strip() for s in str(self["features"]).split(",") if s.strip()}
        if not stages or not stages <= {"mfcc", "lpc"}:
            raise UsageError("--features takes a comma list drawn from mfcc,lpc")
        return stages

    def mfcc(self):
        if "mfcc" not in self.feature_stages():
            return None
        fmax = self["mfcc.fmax"]
        return MfccConfig(
            self["mfcc.num_filters"], self["mfcc.num_coeffs"], self["mfcc.target_frames"],
            self["mfcc.fmin"], float(fmax) if fmax not in ("", None) else None,
        )

    def lpc(self):
        if "lpc" not in self.feature_stages():
            return None
        return LpcConfig(
            self["lpc.order"], self["lpc.target_frames"], self["lpc.include_gain"], self["lpc.error_header"]
        )

    def classifier_config(self) -> ClassifierConfig:
        hidden = tuple(int(h) for h in str(self["mlp.hidden"]).split(",") if h.strip())
        return ClassifierConfig(
            self["classifier"], self["knn.k"], hidden, self["mlp.lr"], self["mlp.epochs"], self["mlp.batch"]
        )

    def optimizer_config(self, algo: str | None = None) -> OptimizerConfig:
        algo = algo or self["opt.algo"]
        common = dict(
            pop_size=self["opt.pop"],
            max_iter=self["opt.iters"],
            seed=self.substream_seed(f"optimizer:{algo}"),
            mode="binary",
            threshold=self["opt.threshold"],
        )
        if algo == "mrfo":
            return MrfoConfig(**common, somersault_factor=self["opt.somersault_f"])
        return OptimizerConfig(**common)

    def to_json(self) -> str:
        return json.dumps(dict(self), indent=2, sort_keys=True)

"""Wrapper feature selection: binary masks scored by cross-validated KNN."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..classifiers import ClassifierConfig, Dataset, fit_classifier, knn_vote
from ..errors import UsageError
from .common import MrfoConfig, OptimizerConfig, SearchSpace

DEFAULT_ALPHA = 0.99
INNER_FOLDS = 3


@dataclass(frozen=True)
class FeatureMask:
    bits: np.ndarray

    @property
    def selected_count(self) -> int:
        return int(self.bits.sum())

    @property
    def indices(self) -> list:
        return np.flatnonzero(self.bits).tolist()


def binarize(position, threshold: float = 0.5, space=None) -> FeatureMask:
    """Bit ``k`` is set when ``position[k] > threshold``; an empty mask keeps the argmax."""
    x = np.asarray(position, dtype=np.float64)
    bits = x > threshold
    if not bits.any():
        bits = np.zeros(len(x), dtype=bool)
        bits[int(np.argmax(x))] = True
    return FeatureMask(bits)


class SelectionObjective:
    """``f(mask) = alpha * err + (1 - alpha) * selected / D``.

    ``err`` is one minus the mean accuracy over a fixed stratified split of
    ``data``. Scores are memoized per mask.
    """

    def __init__(self, data: Dataset, alpha: float = DEFAULT_ALPHA, seed: int = 0,
                 k: int = 5, folds: int = INNER_FOLDS, classifier: ClassifierConfig | None = None):
        from ..evaluation import stratified_kfold

        if not 0.0 < alpha < 1.0:
            raise UsageError("alpha_fs must lie in (0, 1)")
        if len(np.unique(data.labels)) < 2:
            raise UsageError("feature selection needs at least two classes")
        self.data = data
        self.alpha = alpha
        self.seed = seed
        self.k = k
        self.classifier = classifier or ClassifierConfig("knn", k=k)
        plan = stratified_kfold(data.labels, folds, seed)
        self.splits = [(np.flatnonzero(plan.assignments != f), np.flatnonzero(plan.assignments == f))
                       for f in range(folds)]
        self._cache = {}

    @property
    def dim(self) -> int:
        return self.data.rows.shape[1]

    def accuracy(self, bits) -> float:
        m = np.asarray(bits, dtype=bool)
        X = self.data.rows[:, m]
        y = self.data.labels
        accs = []
        for tr, va in self.splits:
            if self.classifier.kind == "knn":
                Xt, Xv = X[tr], X[va]
                d = (Xv * Xv).sum(1)[:, None] - 2.0 * Xv @ Xt.T + (Xt * Xt).sum(1)[None, :]
                k = min(self.k, len(tr))
                pred, _ = knn_vote(np.maximum(d, 0.0), y[tr], k, self.data.class_count)
            else:
                model = fit_classifier(self.classifier, Dataset(X[tr], y[tr], self.data.class_count), self.seed)
                pred, _ = model.predict(X[va])
            accs.append(np.mean(pred == y[va]))
        return float(np.mean(accs))

    def __call__(self, bits) -> float:
        m = np.asarray(bits, dtype=bool)
        key = np.packbits(m).tobytes()
        if key not in self._cache:
            err = 1.0 - self.accuracy(m)
            self._cache[key] = self.alpha * err + (1.0 - self.alpha) * m.sum() / len(m)
        return self._cache[key]


def feature_selection_fitness(mask, data: Dataset, alpha_fs: float = DEFAULT_ALPHA, seed: int = 0, **kw) -> float:
    bits = mask.bits if isinstance(mask, FeatureMask) else mask
    return SelectionObjective(data, alpha_fs, seed, **kw)(bits)


ALGORITHMS = ("mrfo", "ga", "pso", "gwo")


def get_optimizer(name: str):
    from .baselines import ga_optimize, gwo_optimize, pso_optimize
    from .mrfo import mrfo_optimize

    table = {"mrfo": mrfo_optimize, "ga": ga_optimize, "pso": pso_optimize, "gwo": gwo_optimize}
    if name not in table:
        raise UsageError(f"unknown optimizer {name!r}; choose from {', '.join(ALGORITHMS)}")
    return table[name]


@dataclass
class SelectionResult:
    algo: str
    mask: FeatureMask
    fitness: float
    record: object
    selected_history: list

    def convergence_rows(self):
        return [
            (i + 1, f, c)
            for i, (f, c) in enumerate(zip(self.record.best_fitness, self.selected_history))
        ]


def select_features(data: Dataset, algo: str = "mrfo", cfg: OptimizerConfig | None = None,
                    alpha_fs: float = DEFAULT_ALPHA, k: int = 5,
                    classifier: ClassifierConfig | None = None) -> SelectionResult:
    """Run a binary wrapper search over the columns of ``data``."""
    cfg = cfg or MrfoConfig()
    if cfg.mode != "binary":
        cfg = type(cfg)(**{**cfg.__dict__, "mode": "binary"})
    objective = SelectionObjective(data, alpha_fs, cfg.seed, k=k, classifier=classifier)
    space = SearchSpace.unit(objective.dim)
    best, record = get_optimizer(algo)(objective, space, cfg)
    mask = binarize(best.position, cfg.threshold)
    history = [binarize(p, cfg.threshold).selected_count for p in record.best_positions]
    return SelectionResult(algo, mask, float(best.fitness), record, history)

"""Stratified k-fold cross-validation, confusion-matrix metrics and ROC data."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .classifiers import ClassifierConfig, Dataset, fit_classifier, standardize_fit
from .errors import DegenerateClass, EmptyMatrix, LabelOutOfRange, TooFewSamples, UsageError


@dataclass(frozen=True)
class FoldPlan:
    k: int
    assignments: np.ndarray
    seed: int

    def split(self, fold: int):
        return np.flatnonzero(self.assignments != fold), np.flatnonzero(self.assignments == fold)


def stratified_kfold(labels, k: int, seed: int = 0) -> FoldPlan:
    """Shuffle each class with ``seed`` and deal its members round-robin.

    The dealing position carries over between classes so total fold sizes
    stay balanced as well as per-class counts.
    """
    labels = np.asarray(labels)
    if k < 2:
        raise UsageError("need at least 2 folds")
    if labels.size == 0:
        raise TooFewSamples("no samples to split")
    rng = np.random.default_rng(seed)
    out = np.empty(len(labels), dtype=np.int64)
    offset = 0
    for c in np.unique(labels):
        members = np.flatnonzero(labels == c)
        members = members[rng.permutation(len(members))]
        out[members] = (offset + np.arange(len(members))) % k
        offset = (offset + len(members)) % k
    return FoldPlan(k, out, seed)


def confusion_matrix(truth, predictions, C: int) -> np.ndarray:
    """Counts with rows = true class, columns = predicted class."""
    t = np.asarray(truth, dtype=np.int64)
    p = np.asarray(predictions, dtype=np.int64)
    if t.shape != p.shape:
        raise UsageError("truth and predictions differ in length")
    if t.size and (min(t.min(), p.min()) < 0 or max(t.max(), p.max()) >= C):
        raise LabelOutOfRange(f"label outside [0, {C})")
    m = np.zeros((C, C), dtype=np.int64)
    np.add.at(m, (t, p), 1)
    return m


@dataclass
class Metrics:
    accuracy: float
    precision: np.ndarray
    recall: np.ndarray
    f1: np.ndarray
    degenerate: list  # class ids with a zero denominator somewhere
    active: np.ndarray  # classes that occur as truth or prediction

    def _macro(self, v) -> float:
        return float(v[self.active].mean())

    @property
    def macro_precision(self) -> float:
        return self._macro(self.precision)

    @property
    def macro_recall(self) -> float:
        return self._macro(self.recall)

    @property
    def macro_f1(self) -> float:
        return self._macro(self.f1)


def metrics(m) -> Metrics:
    """Accuracy, per-class precision/recall/F1 and macro averages.

    Classes with a zero denominator get 0 for that metric and are listed in
    ``degenerate``. Macro averages run over classes that appear in the
    matrix at all (non-zero row or column).
    """
    m = np.asarray(m, dtype=np.float64)
    total = m.sum()
    if total <= 0:
        raise EmptyMatrix("confusion matrix has no counts")
    diag = np.diag(m)
    col = m.sum(axis=0)
    row = m.sum(axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        precision = np.where(col > 0, diag / col, 0.0)
        recall = np.where(row > 0, diag / row, 0.0)
        f1 = np.where(
            (precision > 0) & (recall > 0), 2.0 / (1.0 / precision + 1.0 / recall), 0.0
        )
    degenerate = [int(c) for c in np.flatnonzero((col == 0) | (row == 0))]
    active = (row > 0) | (col > 0)
    return Metrics(float(diag.sum() / total), precision, recall, f1, degenerate, active)


@dataclass
class RocEntry:
    class_id: int
    thresholds: np.ndarray
    fpr: np.ndarray
    tpr: np.ndarray
    auc: float | None  # None for a class without positives or negatives


def roc_curve(scores, truth, c: int) -> RocEntry:
    """One-vs-rest ROC for class ``c``; equal scores form a single step."""
    s = np.asarray(scores, dtype=np.float64)
    if s.ndim == 2:
        s = s[:, c]
    if not np.all(np.isfinite(s)):
        raise UsageError("scores must be finite")
    pos = np.asarray(truth) == c
    P, N = int(pos.sum()), int((~pos).sum())
    if P == 0 or N == 0:
        raise DegenerateClass(f"class {c} has {P} positives and {N} negatives")
    thr = np.unique(s)[::-1]
    tp = np.array([np.sum(pos & (s >= t)) for t in thr], dtype=np.float64)
    fp = np.array([np.sum(~pos & (s >= t)) for t in thr], dtype=np.float64)
    tpr = np.concatenate([[0.0], tp / P])
    fpr = np.concatenate([[0.0], fp / N])
    thresholds = np.concatenate([[np.inf], thr])
    auc = float(np.sum(np.diff(fpr) * (tpr[1:] + tpr[:-1]) / 2.0))
    return RocEntry(c, thresholds, fpr, tpr, auc)


def roc_series(scores, truth, C: int) -> list:
    out = []
    for c in range(C):
        try:
            out.append(roc_curve(scores, truth, c))
        except DegenerateClass:
            out.append(RocEntry(c, np.empty(0), np.empty(0), np.empty(0), None))
    return out


def macro_auc(series) -> float | None:
    aucs = [e.auc for e in series if e.auc is not None]
    return float(np.mean(aucs)) if aucs else None


@dataclass
class FoldReport:
    """Per-fold metrics in percent plus mean and population std over the folds."""

    folds: list  # dicts with accuracy/precision/recall/f1
    confusion: list
    roc: list
    masks: list = field(default_factory=list)  # per-fold selected column indices, or []
    degenerate: list = field(default_factory=list)

    COLUMNS = ("accuracy", "precision", "recall", "f1")

    @property
    def mean(self) -> dict:
        return {c: float(np.mean([f[c] for f in self.folds])) for c in self.COLUMNS}

    @property
    def std(self) -> dict:
        return {c: float(np.std([f[c] for f in self.folds])) for c in self.COLUMNS}

    @property
    def rows(self) -> list:
        """k fold rows plus the mean/std row, as in a results table."""
        out = [(f"Fold {i + 1}", f) for i, f in enumerate(self.folds)]
        out.append(("Mean & STD", {c: (self.mean[c], self.std[c]) for c in self.COLUMNS}))
        return out

    def table(self) -> str:
        head = f"{'Fold:':<12}" + "".join(f"{h:>18}" for h in ("Accuracy", "Precision", "Recall", "F1 Score"))
        lines = [head, "-" * len(head)]
        for name, vals in self.rows:
            if name == "Mean & STD":
                cells = "".join(f"{f'{m:.2f}% ±{s:.2f}':>18}" for m, s in (vals[c] for c in self.COLUMNS))
            else:
                cells = "".join(f"{vals[c]:>18.2f}" for c in self.COLUMNS)
            lines.append(f"{name:<12}{cells}")
        return "\n".join(lines)

    def to_dict(self) -> dict:
        return {
            "folds": [{c: f[c] for c in self.COLUMNS} for f in self.folds],
            "mean": self.mean,
            "std": self.std,
            "confusion": [np.asarray(m).tolist() for m in self.confusion],
            "masks": self.masks,
            "degenerate_classes": self.degenerate,
            "auc": {str(e.class_id): e.auc for e in self.roc},
            "macro_auc": macro_auc(self.roc),
        }


def _fold_seed(seed: int, fold: int) -> int:
    return int(np.random.SeedSequence([seed, fold]).generate_state(1)[0])


def cross_validate(data: Dataset, classifier: ClassifierConfig | None = None, k: int = 5,
                   seed: int = 0, mask=None, selector=None) -> FoldReport:
    """k-fold evaluation with everything fitted on the training split only.

    ``mask`` fixes the feature columns for every fold. ``selector`` is a
    callable ``(train_dataset, seed) -> FeatureMask`` run per fold on the
    standardized training rows; it never sees held-out rows.
    """
    classifier = classifier or ClassifierConfig()
    plan = stratified_kfold(data.labels, k, seed)
    C = data.class_count
    folds, mats, masks = [], [], []
    all_scores = np.zeros((len(data.labels), C))
    degenerate = set()
    for f in range(k):
        tr, te = plan.split(f)
        fseed = _fold_seed(seed, f)
        std = standardize_fit(data.subset(tr))
        train = std.apply(data.subset(tr))
        test = std.apply(data.subset(te))
        cols = None
        if selector is not None:
            cols = np.asarray(selector(train, fseed).bits, dtype=bool)
        elif mask is not None:
            cols = np.asarray(mask, dtype=bool)
        if cols is not None:
            train, test = train.columns(cols), test.columns(cols)
            masks.append(np.flatnonzero(cols).tolist())
        model = fit_classifier(classifier, train, fseed)
        pred, scores = model.predict(test.rows)
        all_scores[te] = scores
        cm = confusion_matrix(test.labels, pred, C)
        met = metrics(cm)
        degenerate.update(met.degenerate)
        folds.append({
            "accuracy": 100.0 * met.accuracy,
            "precision": 100.0 * met.macro_precision,
            "recall": 100.0 * met.macro_recall,
            "f1": 100.0 * met.macro_f1,
        })
        mats.append(cm)
    return FoldReport(folds, mats, roc_series(all_scores, data.labels, C), masks, sorted(degenerate))

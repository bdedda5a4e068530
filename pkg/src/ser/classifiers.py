"""KNN and a small ReLU/softmax MLP, both plain numpy."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import DataError, NonFiniteGradient, UsageError


@dataclass
class Dataset:
    rows: np.ndarray  # (M, D)
    labels: np.ndarray  # (M,) ints in [0, class_count)
    class_count: int

    def __post_init__(self):
        self.rows = np.asarray(self.rows, dtype=np.float64)
        self.labels = np.asarray(self.labels, dtype=np.int64)
        if self.rows.ndim != 2 or len(self.rows) != len(self.labels):
            raise DataError("rows must be (M, D) with one label per row")
        if len(self.labels) == 0:
            raise DataError("empty dataset")
        if self.labels.min() < 0 or self.labels.max() >= self.class_count:
            raise DataError("label outside [0, class_count)")
        if not np.all(np.isfinite(self.rows)):
            raise DataError("dataset contains NaN or Inf")

    def subset(self, idx) -> "Dataset":
        return Dataset(self.rows[idx], self.labels[idx], self.class_count)

    def columns(self, mask) -> "Dataset":
        return Dataset(self.rows[:, np.asarray(mask, dtype=bool)], self.labels, self.class_count)


@dataclass(frozen=True)
class Standardizer:
    means: np.ndarray
    stds: np.ndarray

    def apply(self, data):
        rows = data.rows if isinstance(data, Dataset) else np.asarray(data, dtype=np.float64)
        z = (rows - self.means) / self.stds
        if isinstance(data, Dataset):
            return Dataset(z, data.labels, data.class_count)
        return z


def standardize_fit(data: Dataset) -> Standardizer:
    means = data.rows.mean(axis=0)
    stds = data.rows.std(axis=0)
    stds = np.where(stds > 0, stds, 1.0)
    return Standardizer(means, stds)


def standardize_apply(s: Standardizer, data):
    return s.apply(data)


# --- KNN -------------------------------------------------------------------


@dataclass
class KnnModel:
    train: Dataset
    k: int = 5

    def __post_init__(self):
        if not 1 <= self.k <= len(self.train.labels):
            raise UsageError(f"k={self.k} must lie in [1, {len(self.train.labels)}]")


def pairwise_sq_dist(Q, X) -> np.ndarray:
    d = (Q * Q).sum(1)[:, None] - 2.0 * Q @ X.T + (X * X).sum(1)[None, :]
    return np.maximum(d, 0.0)


def knn_vote(dist, train_labels, k: int, C: int):
    """Majority vote over the ``k`` nearest columns of a (Q, M) distance matrix.

    Neighbors are ordered by (distance, label) so the result does not depend
    on training row order. Vote ties go to the class whose nearest member is
    closest, then to the lowest class id. Returns (labels, scores).
    """
    Q, M = dist.shape
    # lexsort on (label, distance): primary key is the last one
    order = np.lexsort((np.broadcast_to(train_labels, (Q, M)), dist), axis=1)[:, :k]
    nl = train_labels[order]  # (Q, k)
    nd = np.take_along_axis(dist, order, axis=1)
    counts = np.zeros((Q, C))
    np.add.at(counts, (np.repeat(np.arange(Q), k), nl.ravel()), 1.0)
    scores = counts / k
    nearest = np.full((Q, C), np.inf)
    np.minimum.at(nearest, (np.repeat(np.arange(Q), k), nl.ravel()), nd.ravel())
    # most votes, then the closest nearest member, then the lowest class id
    top = counts == counts.max(axis=1, keepdims=True)
    near = np.where(top, nearest, np.inf)
    cand = top & (near == near.min(axis=1, keepdims=True))
    preds = cand.argmax(axis=1)
    return preds, scores


def knn_predict_batch(model: KnnModel, queries):
    Q = np.atleast_2d(np.asarray(queries, dtype=np.float64))
    dist = pairwise_sq_dist(Q, model.train.rows)
    return knn_vote(dist, model.train.labels, model.k, model.train.class_count)


def knn_predict(model: KnnModel, query):
    preds, scores = knn_predict_batch(model, query)
    return int(preds[0]), scores[0]


# --- MLP -------------------------------------------------------------------


@dataclass
class MlpModel:
    layer_sizes: list
    weights: list  # weights[l] has shape (fan_in, fan_out)
    biases: list
    learning_rate: float = 0.01
    seed: int = 0

    def copy(self) -> "MlpModel":
        return MlpModel(
            list(self.layer_sizes),
            [w.copy() for w in self.weights],
            [b.copy() for b in self.biases],
            self.learning_rate,
            self.seed,
        )

    def to_json(self) -> str:
        return json.dumps(
            {
                "layer_sizes": list(map(int, self.layer_sizes)),
                "activation": {"hidden": "relu", "output": "softmax"},
                "learning_rate": self.learning_rate,
                "seed": self.seed,
                "weights": [w.ravel().tolist() for w in self.weights],
                "biases": [b.tolist() for b in self.biases],
            }
        )

    @classmethod
    def from_json(cls, text: str) -> "MlpModel":
        d = json.loads(text)
        sizes = d["layer_sizes"]
        ws = [np.array(w).reshape(a, b) for w, a, b in zip(d["weights"], sizes[:-1], sizes[1:])]
        bs = [np.array(b) for b in d["biases"]]
        return cls(sizes, ws, bs, d["learning_rate"], d["seed"])


def mlp_init(layer_sizes, seed: int = 0, learning_rate: float = 0.01) -> MlpModel:
    """Glorot-uniform weights, zero biases."""
    rng = np.random.default_rng(seed)
    ws, bs = [], []
    for fan_in, fan_out in zip(layer_sizes[:-1], layer_sizes[1:]):
        lim = np.sqrt(6.0 / (fan_in + fan_out))
        ws.append(rng.uniform(-lim, lim, size=(fan_in, fan_out)))
        bs.append(np.zeros(fan_out))
    return MlpModel(list(layer_sizes), ws, bs, learning_rate, seed)


def softmax(z):
    z = z - z.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def _forward(model: MlpModel, X):
    acts = [X]
    pre = []
    h = X
    last = len(model.weights) - 1
    for i, (W, b) in enumerate(zip(model.weights, model.biases)):
        v = h @ W + b
        pre.append(v)
        h = softmax(v) if i == last else np.maximum(v, 0.0)
        acts.append(h)
    return pre, acts


def mlp_forward(model: MlpModel, x) -> np.ndarray:
    X = np.asarray(x, dtype=np.float64)
    _, acts = _forward(model, np.atleast_2d(X))
    return acts[-1][0] if X.ndim == 1 else acts[-1]


def cross_entropy(probs, labels) -> float:
    p = probs[np.arange(len(labels)), labels]
    return float(-np.mean(np.log(np.maximum(p, 1e-300))))


def mlp_loss(model: MlpModel, X, y) -> float:
    return cross_entropy(mlp_forward(model, np.atleast_2d(X)), np.asarray(y))


def mlp_gradients(model: MlpModel, X, y):
    """Mean cross-entropy loss and its gradients w.r.t. every weight and bias."""
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    y = np.asarray(y)
    n = len(y)
    pre, acts = _forward(model, X)
    loss = cross_entropy(acts[-1], y)
    # output delta: softmax + cross-entropy collapse to (p - onehot)
    delta = acts[-1].copy()
    delta[np.arange(n), y] -= 1.0
    delta /= n
    gw = [None] * len(model.weights)
    gb = [None] * len(model.biases)
    for layer in range(len(model.weights) - 1, -1, -1):
        gw[layer] = acts[layer].T @ delta
        gb[layer] = delta.sum(axis=0)
        if layer:
            delta = (delta @ model.weights[layer].T) * (pre[layer - 1] > 0)
    return loss, gw, gb


def mlp_backprop_step(model: MlpModel, X, y, lr=None):
    """One gradient-descent step on a batch; returns (new model, batch loss before the step)."""
    lr = model.learning_rate if lr is None else lr
    loss, gw, gb = mlp_gradients(model, X, y)
    if not all(np.all(np.isfinite(g)) for g in gw + gb):
        raise NonFiniteGradient("gradient contains NaN or Inf")
    out = model.copy()
    for i in range(len(out.weights)):
        out.weights[i] -= lr * gw[i]
        out.biases[i] -= lr * gb[i]
    return out, loss


def mlp_train(model: MlpModel, data: Dataset, epochs: int = 300, batch_size: int = 16, lr=None, seed: int = 0):
    """Shuffled mini-batch gradient descent; returns (model, per-epoch mean loss)."""
    rng = np.random.default_rng(seed)
    history = []
    M = len(data.labels)
    for _ in range(epochs):
        perm = rng.permutation(M)
        total = 0.0
        for start in range(0, M, batch_size):
            idx = perm[start : start + batch_size]
            model, loss = mlp_backprop_step(model, data.rows[idx], data.labels[idx], lr)
            total += loss * len(idx)
        history.append(total / M)
    return model, history


# --- uniform front end used by evaluation / selection -----------------------


@dataclass(frozen=True)
class ClassifierConfig:
    kind: str = "knn"  # knn | mlp
    k: int = 5
    hidden: tuple = (5, 5)
    lr: float = 0.01
    epochs: int = 300
    batch: int = 16

    def __post_init__(self):
        if self.kind not in ("knn", "mlp"):
            raise UsageError(f"unknown classifier {self.kind!r}")


@dataclass
class FittedClassifier:
    cfg: ClassifierConfig
    model: object
    history: list = field(default_factory=list)

    def predict(self, rows):
        """Predicted labels and per-class scores (vote fractions or softmax)."""
        rows = np.atleast_2d(rows)
        if self.cfg.kind == "knn":
            return knn_predict_batch(self.model, rows)
        probs = mlp_forward(self.model, rows)
        return probs.argmax(axis=1), probs


def fit_classifier(cfg: ClassifierConfig, train: Dataset, seed: int = 0) -> FittedClassifier:
    if cfg.kind == "knn":
        return FittedClassifier(cfg, KnnModel(train, min(cfg.k, len(train.labels))))
    sizes = [train.rows.shape[1], *cfg.hidden, train.class_count]
    model = mlp_init(sizes, seed=seed, learning_rate=cfg.lr)
    model, hist = mlp_train(model, train, cfg.epochs, cfg.batch, cfg.lr, seed)
    return FittedClassifier(cfg, model, hist)

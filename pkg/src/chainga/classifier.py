"""KNN wrapper classifier, classification metrics, and the fitness function."""

from __future__ import annotations

import threading
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial.distance import cdist

from .data import Dataset


def knn_predict(train_X: np.ndarray, train_y: np.ndarray, query_X: np.ndarray, k: int) -> np.ndarray:
    """Euclidean k-nearest-neighbour prediction with deterministic ties.

    Distance ties prefer the lower training-row index; vote ties among
    classes prefer the class whose nearest member ranks first.
    """
    if train_X.shape[0] == 0:
        raise ValueError("empty training set")
    if train_X.ndim != 2 or train_X.shape[1] == 0:
        raise ValueError("training matrix must select at least one feature")
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")

    k = min(k, train_X.shape[0])
    dists = cdist(query_X, train_X)
    # stable argsort keeps lower training-row index first on equal distance
    order = np.argsort(dists, axis=1, kind="stable")[:, :k]
    labels = train_y[order]  # (n_query, k) in distance order

    n_query = labels.shape[0]
    n_classes = int(train_y.max()) + 1
    rows = np.repeat(np.arange(n_query), k)
    cols = labels.ravel()
    votes = np.zeros((n_query, n_classes), dtype=np.int64)
    np.add.at(votes, (rows, cols), 1)
    first_rank = np.full((n_query, n_classes), k, dtype=np.int64)
    np.minimum.at(first_rank, (rows, cols), np.tile(np.arange(k), n_query))

    tied = votes == votes.max(axis=1, keepdims=True)
    rank_among_tied = np.where(tied, first_rank, k + 1)
    return np.argmin(rank_among_tied, axis=1)


@dataclass
class MetricBundle:
    """Weighted-average classification metrics plus per-class counts."""

    accuracy: float
    precision: float
    recall: float
    f1: float
    support: np.ndarray
    tp: np.ndarray
    fp: np.ndarray
    fn: np.ndarray
    per_class_precision: np.ndarray
    per_class_recall: np.ndarray
    per_class_f1: np.ndarray


def evaluate_metrics(y_true, y_pred, n_classes: int | None = None) -> MetricBundle:
    """Per-class one-vs-rest counts aggregated by class-support weights.

    Per-class precision/recall default to 0 when undefined, and F1 is 0
    when precision + recall is 0.
    """
    y_true = np.asarray(y_true)
    y_pred = np.asarray(y_pred)
    if y_true.size != y_pred.size:
        raise ValueError(f"length mismatch: {y_true.size} vs {y_pred.size}")
    if y_true.size == 0:
        raise ValueError("cannot score empty label vectors")
    if n_classes is None:
        n_classes = int(max(y_true.max(), y_pred.max())) + 1

    classes = np.arange(n_classes)
    tp = np.array([np.sum((y_true == c) & (y_pred == c)) for c in classes])
    fp = np.array([np.sum((y_true != c) & (y_pred == c)) for c in classes])
    fn = np.array([np.sum((y_true == c) & (y_pred != c)) for c in classes])
    support = tp + fn

    with np.errstate(invalid="ignore", divide="ignore"):
        prec = np.where(tp + fp > 0, tp / np.maximum(tp + fp, 1), 0.0)
        rec = np.where(support > 0, tp / np.maximum(support, 1), 0.0)
        f1 = np.where(prec + rec > 0, 2 * prec * rec / np.maximum(prec + rec, 1e-300), 0.0)

    weights = support / y_true.size
    return MetricBundle(
        accuracy=float(tp.sum() / y_true.size),
        precision=float((weights * prec).sum()),
        recall=float((weights * rec).sum()),
        f1=float((weights * f1).sum()),
        support=support,
        tp=tp,
        fp=fp,
        fn=fn,
        per_class_precision=prec,
        per_class_recall=rec,
        per_class_f1=f1,
    )


def combine_fitness(acc: float, n_selected: int, n_features: int, alpha: float) -> float:
    """Trade accuracy against subset size: (1-alpha)*acc + alpha*(1 - n_s/n_f)."""
    return (1.0 - alpha) * acc + alpha * (1.0 - n_selected / n_features)


@dataclass
class FitnessRecord:
    fitness: float
    acc: float
    n_selected: int
    mask_key: bytes


def mask_key(mask: np.ndarray) -> bytes:
    return np.packbits(np.asarray(mask, dtype=bool)).tobytes()


class FitnessCache:
    """Mask-keyed fitness memo safe for concurrent lookups and inserts."""

    def __init__(self):
        self._data: dict[bytes, FitnessRecord] = {}
        self._lock = threading.Lock()
        self.hits = 0
        self.misses = 0

    def get(self, key: bytes) -> FitnessRecord | None:
        with self._lock:
            record = self._data.get(key)
            if record is None:
                self.misses += 1
            else:
                self.hits += 1
            return record

    def put(self, key: bytes, record: FitnessRecord) -> None:
        with self._lock:
            self._data[key] = record

    def __len__(self) -> int:
        return len(self._data)


@dataclass
class FitnessEvaluator:
    """Wrapper fitness: train KNN on the training partition, measure
    accuracy on the validation partition, combine with the compression
    reward. Results are cached by mask digest, so re-evaluating a mask
    never re-runs the classifier.
    """

    dataset: Dataset
    alpha: float = 0.01
    k: int = 5
    cache: FitnessCache = field(default_factory=FitnessCache)

    def __post_init__(self):
        ds = self.dataset
        self._train_X = ds.X_cont[ds.train_idx]
        self._train_y = ds.y[ds.train_idx]
        self._val_X = ds.X_cont[ds.val_idx]
        self._val_y = ds.y[ds.val_idx]

    def evaluate(self, mask: np.ndarray) -> FitnessRecord:
        mask = np.asarray(mask, dtype=bool)
        key = mask_key(mask)
        record = self.cache.get(key)
        if record is not None:
            return record
        n_selected = int(mask.sum())
        if n_selected == 0:
            # sentinel: never wins a comparison against a real subset
            record = FitnessRecord(0.0, 0.0, 0, key)
        else:
            pred = knn_predict(self._train_X[:, mask], self._train_y, self._val_X[:, mask], self.k)
            acc = float(np.mean(pred == self._val_y))
            record = FitnessRecord(
                combine_fitness(acc, n_selected, self.dataset.d, self.alpha),
                acc,
                n_selected,
                key,
            )
        self.cache.put(key, record)
        return record

    def test_metrics(self, mask: np.ndarray, include_val: bool = False) -> MetricBundle:
        """Final report: retrain on train (optionally train+val) and score
        the held-out test partition."""
        mask = np.asarray(mask, dtype=bool)
        if not mask.any():
            raise ValueError("cannot score an empty feature subset")
        ds = self.dataset
        fit_idx = ds.train_idx
        if include_val:
            fit_idx = np.sort(np.concatenate([fit_idx, ds.val_idx]))
        pred = knn_predict(
            ds.X_cont[np.ix_(fit_idx, np.flatnonzero(mask))],
            ds.y[fit_idx],
            ds.X_cont[np.ix_(ds.test_idx, np.flatnonzero(mask))],
            self.k,
        )
        return evaluate_metrics(ds.y[ds.test_idx], pred, ds.n_classes)

"""Dataset loading, encoding, normalization, discretization and splitting."""

from __future__ import annotations

import csv
import hashlib
import itertools
import warnings
from dataclasses import dataclass, field

import numpy as np

TRAIN, VAL, TEST = 0, 1, 2

MISSING_TOKENS = {"", "?", "na", "n/a", "nan", "null"}


class DataError(Exception):
    """Raised for malformed or unusable input tables."""


@dataclass
class RawTable:
    """Column-typed table as parsed from a CSV file.

    Numeric columns are float64 arrays, categorical columns are object
    arrays of strings. ``imputed`` records how many missing entries were
    filled per column (median for numeric, mode for categorical).
    """

    names: list[str]
    columns: list[np.ndarray]
    is_numeric: list[bool]
    label_column: str
    imputed: dict[str, int] = field(default_factory=dict)

    @property
    def n_rows(self) -> int:
        return len(self.columns[0]) if self.columns else 0

    @property
    def feature_names(self) -> list[str]:
        return [n for n in self.names if n != self.label_column]

    def label_values(self) -> np.ndarray:
        return self.columns[self.names.index(self.label_column)]


@dataclass
class Dataset:
    """Prepared dataset with a continuous view (for KNN distance) and a
    discretized view (for entropy), plus a train/val/test partition.

    X_cont is min-max scaled to [0, 1] with statistics fit on the training
    rows only; X_disc holds small non-negative bin indices per column.
    """

    X_cont: np.ndarray
    X_disc: np.ndarray
    y: np.ndarray
    split: np.ndarray
    feature_names: list[str]
    class_names: list[str]
    bins: int

    def __post_init__(self):
        for arr in (self.X_cont, self.X_disc, self.y, self.split):
            arr.setflags(write=False)

    @property
    def d(self) -> int:
        return self.X_cont.shape[1]

    @property
    def n_rows(self) -> int:
        return self.X_cont.shape[0]

    @property
    def n_classes(self) -> int:
        return len(self.class_names)

    def indices(self, part: int) -> np.ndarray:
        return np.flatnonzero(self.split == part)

    @property
    def train_idx(self) -> np.ndarray:
        return self.indices(TRAIN)

    @property
    def val_idx(self) -> np.ndarray:
        return self.indices(VAL)

    @property
    def test_idx(self) -> np.ndarray:
        return self.indices(TEST)

    def digest(self) -> str:
        """Content hash keying derived caches (gain-ratio matrix, results)."""
        h = hashlib.sha256()
        h.update(np.ascontiguousarray(self.X_disc).tobytes())
        h.update(np.ascontiguousarray(self.y).tobytes())
        h.update(np.ascontiguousarray(self.split).tobytes())
        h.update(str(self.bins).encode())
        return h.hexdigest()


@dataclass
class SyntheticSpec:
    """Recipe for a small synthetic classification table.

    Informative features carry class-separated means, redundant features
    are noisy copies of informative ones, noise features are independent
    of the label.
    """

    n_rows: int
    n_informative: int
    n_redundant: int
    n_noise: int
    n_classes: int = 2
    seed: int = 0

    def __post_init__(self):
        if self.n_informative < 1:
            raise DataError("synthetic spec needs at least one informative feature")
        if self.n_rows < 3 * self.n_classes:
            raise DataError("synthetic spec needs at least 3 rows per class")
        if min(self.n_redundant, self.n_noise) < 0 or self.n_classes < 2:
            raise DataError("invalid synthetic spec")

    @property
    def n_features(self) -> int:
        return self.n_informative + self.n_redundant + self.n_noise


def _parse_number(token: str) -> float | None:
    try:
        return float(token)
    except ValueError:
        return None


def load_csv(path, label_column: str, header: bool = True) -> RawTable:
    """Load a comma-separated table, typing each column numeric when every
    present entry parses as a number and categorical otherwise.

    Missing entries ("", "?", "NA", ...) are imputed with the column median
    (numeric) or mode (categorical) and counted in ``RawTable.imputed``.
    """
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            rows = [row for row in csv.reader(fh) if row]
    except FileNotFoundError as exc:
        raise DataError(f"dataset file not found: {path}") from exc

    if not rows:
        raise DataError(f"empty table: {path}")

    if header:
        names = [c.strip() for c in rows[0]]
        body = rows[1:]
    else:
        names = [f"f{i}" for i in range(len(rows[0]))]
        body = rows
    if not body:
        raise DataError(f"table has a header but no data rows: {path}")

    width = len(names)
    for i, row in enumerate(body):
        if len(row) != width:
            raise DataError(
                f"ragged row {i + (2 if header else 1)} in {path}: "
                f"expected {width} fields, got {len(row)}"
            )
    if label_column not in names:
        raise DataError(f"label column {label_column!r} not present in {path}")

    cells = [[row[j].strip() for row in body] for j in range(width)]
    columns: list[np.ndarray] = []
    is_numeric: list[bool] = []
    imputed: dict[str, int] = {}
    for name, col in zip(names, cells):
        present = [v for v in col if v.lower() not in MISSING_TOKENS]
        n_missing = len(col) - len(present)
        numeric = bool(present) and all(_parse_number(v) is not None for v in present)
        if numeric:
            values = np.array(
                [_parse_number(v) if v.lower() not in MISSING_TOKENS else np.nan for v in col],
                dtype=np.float64,
            )
            if n_missing:
                values[np.isnan(values)] = float(np.median(values[~np.isnan(values)]))
        else:
            if not present:
                raise DataError(f"column {name!r} in {path} is entirely missing")
            uniq, counts = np.unique(np.array(present, dtype=object), return_counts=True)
            mode = uniq[np.argmax(counts)]
            values = np.array(
                [v if v.lower() not in MISSING_TOKENS else mode for v in col], dtype=object
            )
        if n_missing:
            imputed[name] = n_missing
        columns.append(values)
        is_numeric.append(numeric)

    label_values = columns[names.index(label_column)]
    if len(np.unique(label_values.astype(str))) < 2:
        raise DataError(f"label column {label_column!r} has fewer than 2 distinct values")

    return RawTable(names, columns, is_numeric, label_column, imputed)


def _allocate_811(count: int) -> tuple[int, int, int]:
    """Largest-remainder 8:1:1 allocation of ``count`` rows."""
    targets = (0.8 * count, 0.1 * count, 0.1 * count)
    base = [int(t) for t in targets]
    rem = [t - b for t, b in zip(targets, base)]
    for _ in range(count - sum(base)):
        k = int(np.argmax(rem))
        base[k] += 1
        rem[k] = -1.0
    return base[0], base[1], base[2]


def _stratified_split(y: np.ndarray, n_classes: int, seed) -> np.ndarray:
    """8:1:1 split stratified by class; classes with ≥3 samples are
    guaranteed one row in each partition, smaller classes are pooled and
    split without stratification (with a warning)."""
    rng = np.random.default_rng(seed)
    split = np.full(len(y), TRAIN, dtype=np.int8)
    pooled: list[np.ndarray] = []
    for c in range(n_classes):
        idx = np.flatnonzero(y == c)
        if len(idx) < 3:
            pooled.append(idx)
            continue
        idx = rng.permutation(idx)
        n_val = max(1, int(0.1 * len(idx) + 0.5))
        n_test = max(1, int(0.1 * len(idx) + 0.5))
        split[idx[:n_val]] = VAL
        split[idx[n_val : n_val + n_test]] = TEST
    if pooled:
        warnings.warn(
            "classes with fewer than 3 samples cannot be stratified 8:1:1; "
            "falling back to a pooled non-stratified split for those rows",
            stacklevel=3,
        )
        idx = rng.permutation(np.concatenate(pooled))
        _, n_val, n_test = _allocate_811(len(idx))
        split[idx[:n_val]] = VAL
        split[idx[n_val : n_val + n_test]] = TEST
    return split


def prepare(raw: RawTable, bins: int = 10, split_seed=0) -> Dataset:
    """Turn a RawTable into a prepared Dataset.

    Categorical features are integer-encoded and kept as-is in the
    discretized view; numeric features are min-max scaled to [0, 1]
    (training-partition statistics, val/test clamped) and equal-width
    binned into ``bins`` bins with a right-closed top bin. Labels map to
    0..C-1 in sorted order; the split is stratified 8:1:1.
    """
    if bins < 2:
        raise DataError(f"bins must be >= 2, got {bins}")

    label_raw = raw.label_values()
    class_names = sorted(str(v) for v in np.unique(label_raw.astype(str)))
    class_code = {name: i for i, name in enumerate(class_names)}
    y = np.array([class_code[str(v)] for v in label_raw], dtype=np.int64)

    split = _stratified_split(y, len(class_names), split_seed)
    train = split == TRAIN

    feat_cols = [
        (name, col, num)
        for name, col, num in zip(raw.names, raw.columns, raw.is_numeric)
        if name != raw.label_column
    ]
    n, d = raw.n_rows, len(feat_cols)
    X_cont = np.zeros((n, d), dtype=np.float64)
    X_disc = np.zeros((n, d), dtype=np.int64)

    for j, (_, col, numeric) in enumerate(feat_cols):
        if numeric:
            values = col.astype(np.float64)
        else:
            cats = sorted(str(v) for v in np.unique(col.astype(str)))
            code = {c: i for i, c in enumerate(cats)}
            values = np.array([code[str(v)] for v in col], dtype=np.float64)
            X_disc[:, j] = values.astype(np.int64)

        ref = values[train] if train.any() else values
        lo, hi = float(ref.min()), float(ref.max())
        span = hi - lo
        if span > 0:
            X_cont[:, j] = np.clip((values - lo) / span, 0.0, 1.0)
            if numeric:
                idx = np.floor((values - lo) / (span / bins)).astype(np.int64)
                X_disc[:, j] = np.clip(idx, 0, bins - 1)
        # constant training column: both views stay 0

    return Dataset(X_cont, X_disc, y, split, [f[0] for f in feat_cols], class_names, bins)


def generate_synthetic(spec: SyntheticSpec, bins: int = 10) -> Dataset:
    """Deterministically generate a Dataset from a SyntheticSpec.

    Class labels are balanced; informative features get class-conditional
    means two units apart, redundant features are jittered copies of
    informative ones.
    """
    rng = np.random.default_rng(spec.seed)
    n, c = spec.n_rows, spec.n_classes
    y = rng.permutation(np.arange(n) % c)

    blocks = []
    informative = y[:, None] * 2.0 + rng.normal(0.0, 1.0, size=(n, spec.n_informative))
    blocks.append(informative)
    if spec.n_redundant:
        src = informative[:, np.arange(spec.n_redundant) % spec.n_informative]
        blocks.append(src + rng.normal(0.0, 0.3, size=(n, spec.n_redundant)))
    if spec.n_noise:
        blocks.append(rng.normal(0.0, 1.0, size=(n, spec.n_noise)))
    X = np.hstack(blocks)

    names = (
        [f"inf{i}" for i in range(spec.n_informative)]
        + [f"red{i}" for i in range(spec.n_redundant)]
        + [f"noise{i}" for i in range(spec.n_noise)]
    )
    columns = [X[:, j].copy() for j in range(X.shape[1])]
    columns.append(np.array([f"c{v}" for v in y], dtype=object))
    raw = RawTable(names + ["class"], columns, [True] * len(names) + [False], "class")
    return prepare(raw, bins=bins, split_seed=spec.seed)


def subsample_raw(raw: RawTable, cap: int, seed) -> RawTable:
    """Stratified row subsample keeping exactly ``cap`` rows: per-class
    proportional largest-remainder allocation, at least one row per class."""
    if cap >= raw.n_rows:
        return raw
    rng = np.random.default_rng(seed)
    labels = raw.label_values().astype(str)
    classes, counts = np.unique(labels, return_counts=True)
    if cap < len(classes):
        raise DataError(f"subsample cap {cap} is below the class count {len(classes)}")
    targets = cap * counts / raw.n_rows
    take = np.maximum(np.floor(targets).astype(int), 1)
    remainders = targets - np.floor(targets)
    order = np.argsort(-remainders, kind="stable")
    for k in itertools.cycle(order):
        if take.sum() >= cap:
            break
        if take[k] < counts[k]:
            take[k] += 1
    while take.sum() > cap:  # the >=1 floor can overshoot on tiny classes
        excess = np.where(take > 1, take - targets, -np.inf)
        take[int(np.argmax(excess))] -= 1
    keep = [
        rng.permutation(np.flatnonzero(labels == cls))[:n]
        for cls, n in zip(classes, take)
    ]
    sel = np.sort(np.concatenate(keep))
    columns = [col[sel] for col in raw.columns]
    return RawTable(raw.names, columns, raw.is_numeric, raw.label_column, dict(raw.imputed))

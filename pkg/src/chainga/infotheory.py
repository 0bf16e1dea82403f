"""Entropy, information gain, and the precomputed gain-ratio matrix."""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .data import Dataset


def _codes(values) -> tuple[np.ndarray, int]:
    _, inverse = np.unique(np.asarray(values), return_inverse=True)
    return inverse, int(inverse.max()) + 1


def _entropy_from_counts(counts: np.ndarray) -> float:
    p = counts[counts > 0] / counts.sum()
    return float(-(p * np.log2(p)).sum())


def entropy(values) -> float:
    """Shannon entropy in bits of the empirical symbol distribution."""
    values = np.asarray(values)
    if values.size == 0:
        raise ValueError("entropy of an empty vector is undefined")
    _, counts = np.unique(values, return_counts=True)
    return _entropy_from_counts(counts)


def information_gain(target, feature) -> float:
    """Information gain IG(target, feature) = H(target) - H(target | feature).

    Symmetric in its arguments (both equal the mutual information).
    """
    target = np.asarray(target)
    feature = np.asarray(feature)
    if target.size != feature.size:
        raise ValueError(f"length mismatch: {target.size} vs {feature.size}")
    if target.size == 0:
        raise ValueError("information gain of empty vectors is undefined")
    t, kt = _codes(target)
    f, kf = _codes(feature)
    h_t = _entropy_from_counts(np.bincount(t, minlength=kt))
    h_f = _entropy_from_counts(np.bincount(f, minlength=kf))
    h_tf = _entropy_from_counts(np.bincount(t * kf + f, minlength=kt * kf))
    return max(0.0, h_t + h_f - h_tf)


@dataclass
class GainRatioMatrix:
    """Precomputed gain-ratio tables driving the subset criterion.

    fc[i] is the feature-to-class gain ratio IG(y, F_i)/H(F_i); ff[i, j] is
    the feature-to-feature gain ratio IG(F_j, F_i)/H(F_i) normalized by the
    row feature's entropy (asymmetric), with a zero diagonal. Features with
    zero entropy get all-zero entries by convention.
    """

    fc: np.ndarray
    ff: np.ndarray

    def __post_init__(self):
        self.fc.setflags(write=False)
        self.ff.setflags(write=False)

    @property
    def d(self) -> int:
        return len(self.fc)


def build_omega(dataset: Dataset, rows: np.ndarray | None = None) -> GainRatioMatrix:
    """Compute the gain-ratio matrix over the discretized view.

    ``rows`` selects the rows to use (defaults to the training partition).
    Cost is quadratic in the feature count and linear in the row count.
    """
    if rows is None:
        rows = dataset.train_idx
    rows = np.asarray(rows)
    if rows.size < 2:
        raise ValueError("gain-ratio matrix needs at least 2 rows")

    X = dataset.X_disc[rows]
    d = X.shape[1]
    codes = []
    h = np.zeros(d)
    for i in range(d):
        c, k = _codes(X[:, i])
        codes.append((c, k))
        h[i] = _entropy_from_counts(np.bincount(c, minlength=k))

    yc, ky = _codes(dataset.y[rows])
    h_y = _entropy_from_counts(np.bincount(yc, minlength=ky))

    fc = np.zeros(d)
    ff = np.zeros((d, d))
    for i in range(d):
        ci, ki = codes[i]
        if h[i] <= 0.0:
            continue
        h_iy = _entropy_from_counts(np.bincount(ci * ky + yc, minlength=ki * ky))
        fc[i] = (h[i] + h_y - h_iy) / h[i]
    for i in range(d):
        ci, ki = codes[i]
        for j in range(i + 1, d):
            cj, kj = codes[j]
            h_ij = _entropy_from_counts(np.bincount(ci * kj + cj, minlength=ki * kj))
            mi = h[i] + h[j] - h_ij
            if h[i] > 0.0:
                ff[i, j] = mi / h[i]
            if h[j] > 0.0:
                ff[j, i] = mi / h[j]

    np.clip(fc, 0.0, 1.0, out=fc)
    np.clip(ff, 0.0, 1.0, out=ff)
    return GainRatioMatrix(fc, ff)


_DUMP_MAGIC = b"chainga-omega-1\n"


def save_omega(path, omega: GainRatioMatrix, key: str) -> None:
    """Dump the matrix keyed by its dataset digest.

    Flat little-endian layout (magic, JSON header, fc, ff) so identical
    matrices always produce identical bytes.
    """
    header = json.dumps({"key": key, "d": omega.d}).encode() + b"\n"
    with open(path, "wb") as fh:
        fh.write(_DUMP_MAGIC)
        fh.write(header)
        fh.write(np.ascontiguousarray(omega.fc, dtype="<f8").tobytes())
        fh.write(np.ascontiguousarray(omega.ff, dtype="<f8").tobytes())


def load_omega(path) -> tuple[GainRatioMatrix, str]:
    """Load a dumped matrix; callers compare the returned key against the
    current dataset digest before trusting it."""
    with open(path, "rb") as fh:
        if fh.read(len(_DUMP_MAGIC)) != _DUMP_MAGIC:
            raise ValueError(f"{path} is not a gain-ratio matrix dump")
        header = json.loads(fh.readline())
        d = int(header["d"])
        fc = np.frombuffer(fh.read(8 * d), dtype="<f8").copy()
        ff = np.frombuffer(fh.read(8 * d * d), dtype="<f8").copy().reshape(d, d)
    return GainRatioMatrix(fc, ff), str(header["key"])

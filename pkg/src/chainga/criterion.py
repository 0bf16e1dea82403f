"""Subset merit J(S) and fast sweeps over crossover points and bit flips.

The merit of a feature subset S combines average feature-class relevance
and average feature-feature redundancy:

    J(S) = sum_fc / sqrt(n_s + sum_ff)

where sum_fc is the sum of fc over S and sum_ff the sum of ff over ordered
pairs of distinct members. The sweeps evaluate J for every single-point
crossover cut (both children) or every single-bit flip using incremental
O(d) updates per candidate, then re-score near-ties from scratch so that
results match naive enumeration bit for bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .infotheory import GainRatioMatrix

# incremental and from-scratch sums agree far below this; used only to
# collect re-score candidates, never to decide the final argmax
_NEAR_TIE = 1e-9


@dataclass
class SubsetScore:
    j_value: float
    n_s: int
    sum_fc: float
    sum_ff: float


def _as_mask(mask, d: int) -> np.ndarray:
    m = np.asarray(mask)
    if m.size != d:
        raise ValueError(f"mask length {m.size} does not match feature count {d}")
    return m.astype(bool)


def score(mask, omega: GainRatioMatrix) -> SubsetScore:
    """Merit of the masked subset; the empty subset scores 0 by convention."""
    m = _as_mask(mask, omega.d)
    idx = np.flatnonzero(m)
    n_s = len(idx)
    if n_s == 0:
        return SubsetScore(0.0, 0, 0.0, 0.0)
    sum_fc = float(omega.fc[idx].sum())
    sum_ff = float(omega.ff[np.ix_(idx, idx)].sum())  # diagonal is zero
    return SubsetScore(sum_fc / math.sqrt(n_s + sum_ff), n_s, sum_fc, sum_ff)


class _RunningScore:
    """Subset score maintained under add/remove-one-feature updates."""

    __slots__ = ("fc", "ff", "ind", "n", "sum_fc", "sum_ff")

    def __init__(self, mask: np.ndarray, omega: GainRatioMatrix):
        base = score(mask, omega)
        self.fc = omega.fc
        self.ff = omega.ff
        self.ind = mask.astype(np.float64)
        self.n = base.n_s
        self.sum_fc = base.sum_fc
        self.sum_ff = base.sum_ff

    def set_bit(self, t: int, value: bool) -> None:
        if bool(self.ind[t]) == value:
            return
        # zero diagonal makes the pair delta safe to compute with t included
        delta = float(self.ff[t] @ self.ind + self.ff[:, t] @ self.ind)
        if value:
            self.n += 1
            self.sum_fc += self.fc[t]
            self.sum_ff += delta
            self.ind[t] = 1.0
        else:
            self.n -= 1
            self.sum_fc -= self.fc[t]
            self.sum_ff -= delta
            self.ind[t] = 0.0

    def j(self) -> float:
        if self.n == 0:
            return 0.0
        return self.sum_fc / math.sqrt(self.n + self.sum_ff)


def sweep_crossover(parent_a, parent_b, omega: GainRatioMatrix) -> tuple[int, float]:
    """Best single-point crossover cut for two parents.

    The cut k in [1, d-1] splits both parents into prefix a[:k] + suffix
    b[k:] (and vice versa); returns the smallest k maximizing the better
    child's merit, together with that merit.
    """
    d = omega.d
    if d < 2:
        raise ValueError("crossover sweep needs at least 2 features")
    a = _as_mask(parent_a, d)
    b = _as_mask(parent_b, d)
    if np.array_equal(a, b):
        return 1, score(a, omega).j_value

    # child1(k) = a[:k] + b[k:], child2(k) = b[:k] + a[k:]
    child1 = _RunningScore(b, omega)
    child2 = _RunningScore(a, omega)
    j1 = np.empty(d - 1)
    j2 = np.empty(d - 1)
    flips = np.empty(d - 1, dtype=np.int64)  # differing positions crossed so far
    crossed = 0
    for k in range(1, d):
        t = k - 1
        if a[t] != b[t]:
            child1.set_bit(t, bool(a[t]))
            child2.set_bit(t, bool(b[t]))
            crossed += 1
        j1[k - 1] = child1.j()
        j2[k - 1] = child2.j()
        flips[k - 1] = crossed

    best = float(np.maximum(j1, j2).max())
    exact: dict[tuple[int, int], float] = {}

    def exact_j(which: int, k: int) -> float:
        key = (which, flips[k - 1])
        if key not in exact:
            mask = np.concatenate([a[:k], b[k:]]) if which == 1 else np.concatenate([b[:k], a[k:]])
            exact[key] = score(mask, omega).j_value
        return exact[key]

    k_star, best_j = 1, -math.inf
    for k in range(1, d):
        approx = max(j1[k - 1], j2[k - 1])
        if approx < best - _NEAR_TIE:
            continue
        value = max(exact_j(1, k), exact_j(2, k))
        if value > best_j:
            k_star, best_j = k, value
    return k_star, best_j


def sweep_mutation(mask, omega: GainRatioMatrix) -> tuple[int, float]:
    """Best single-bit flip for a mask.

    Returns the smallest flip index maximizing the flipped mask's merit.
    A flip that would empty the mask is only considered when it is the sole
    candidate (d == 1); otherwise the best non-emptying flip wins.
    """
    d = omega.d
    m = _as_mask(mask, d)
    base = score(m, omega)
    n = base.n_s
    if d == 1:
        flipped = ~m
        return 0, score(flipped, omega).j_value

    ind = m.astype(np.float64)
    rowcol = omega.ff @ ind + omega.ff.T @ ind
    with np.errstate(invalid="ignore", divide="ignore"):
        j_add = (base.sum_fc + omega.fc) / np.sqrt(n + 1 + base.sum_ff + rowcol)
        if n > 1:
            j_rem = (base.sum_fc - omega.fc) / np.sqrt(
                np.maximum(n - 1 + base.sum_ff - rowcol, 0.0)
            )
        else:
            j_rem = np.zeros(d)
    cand = np.where(m, j_rem, j_add)
    if n == 1:
        cand[m] = -np.inf  # emptying flip excluded while alternatives exist

    best = float(cand.max())
    r_star, best_j = -1, -math.inf
    for r in range(d):
        if cand[r] < best - _NEAR_TIE:
            continue
        flipped = m.copy()
        flipped[r] = not flipped[r]
        value = score(flipped, omega).j_value
        if value > best_j:
            r_star, best_j = r, value
    return r_star, best_j

"""Pareto dominance, dominance counting and the cost landscape heights.

Minimization throughout: a dominates b iff a <= b componentwise and a != b.
Counting uses an O(n log n) sweep with a binary-indexed tree for k = 2 and a
blocked O(n^2) pairwise pass for k = 3; both return exactly the same counts
as the brute-force definition.
"""

from __future__ import annotations

import warnings

import numpy as np

from .fields import ObjectiveField, ScalarField

PAIRWISE_WARN_CELLS = 100_000


def dominates(a, b) -> bool:
    """True iff objective vector a dominates b."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError(f"objective vectors differ in length: {a.shape} vs {b.shape}")
    return bool(np.all(a <= b) and np.any(a < b))


class _Fenwick:
    """Binary-indexed tree over value ranks, counting inserted elements."""

    def __init__(self, n: int):
        self.n = n
        self.tree = np.zeros(n + 1, dtype=np.int64)

    def add(self, rank: int) -> None:
        i = rank + 1
        while i <= self.n:
            self.tree[i] += 1
            i += i & (-i)

    def count_le(self, rank: int) -> int:
        i = rank + 1
        total = 0
        while i > 0:
            total += self.tree[i]
            i -= i & (-i)
        return int(total)


def _counts_k2(values: np.ndarray) -> np.ndarray:
    """Sweep in ascending f1; equal-f1 groups are processed together so equal
    points never count as dominating (strictness rule)."""
    n = values.shape[0]
    counts = np.zeros(n, dtype=np.int64)
    f1, f2 = values[:, 0], values[:, 1]
    order = np.lexsort((f2, f1))
    uniq2, ranks2_all = np.unique(f2, return_inverse=True)
    fen = _Fenwick(len(uniq2))
    pos = 0
    while pos < n:
        end = pos
        while end < n and f1[order[end]] == f1[order[pos]]:
            end += 1
        group = order[pos:end]
        g2 = f2[group]  # ascending within the group by the lexsort
        for local, i in enumerate(group):
            before = fen.count_le(int(ranks2_all[i]))
            same = int(np.searchsorted(g2, f2[i], side="left"))
            counts[i] = before + same
        for i in group:
            fen.add(int(ranks2_all[i]))
        pos = end
    return counts


def _counts_pairwise(values: np.ndarray, block: int = 256) -> np.ndarray:
    n = values.shape[0]
    counts = np.empty(n, dtype=np.int64)
    for start in range(0, n, block):
        stop = min(start + block, n)
        chunk = values[start:stop]
        le = np.all(values[None, :, :] <= chunk[:, None, :], axis=2)
        lt = np.any(values[None, :, :] < chunk[:, None, :], axis=2)
        counts[start:stop] = np.logical_and(le, lt).sum(axis=1)
    return counts


def dominance_counts(objectives) -> np.ndarray:
    """Per-point count of the points dominating it.

    Accepts an ObjectiveField or a plain (n, k) array.
    """
    values = objectives.values if isinstance(objectives, ObjectiveField) else \
        np.asarray(objectives, dtype=np.float64)
    if values.ndim != 2:
        raise ValueError("expected an (n, k) array of objective vectors")
    n, k = values.shape
    if n == 0:
        return np.zeros(0, dtype=np.int64)
    if k == 2:
        return _counts_k2(values)
    if n > PAIRWISE_WARN_CELLS:
        warnings.warn(
            f"pairwise dominance counting over {n} points with k={k} is quadratic",
            RuntimeWarning, stacklevel=2)
    return _counts_pairwise(values)


def cost_landscape(objectives: ObjectiveField) -> ScalarField:
    """Height field: number of dominating grid points plus one."""
    counts = dominance_counts(objectives)
    return ScalarField(objectives.grid, counts.astype(np.float64) + 1.0)

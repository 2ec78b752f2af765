"""Gradient field heatmap: cumulated MOG lengths along discrete descent paths.

Every cell follows its descent direction (-MOG) from neighbor to neighbor
until it reaches a cell with near-zero MOG, leaves no feasible step, or
closes a cycle; the height of a cell is the sum of MOG lengths along its
path. Heights are memoized, and a cycle is anchored at its cell of smallest
linear index (height 0, flagged terminal) so that results are exactly
independent of the order in which start cells are traced -- including any
parallel tracing schedule.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .fields import Grid, ScalarField, VectorField

EPS_GRAD = 1e-6
_SIN_22_5 = math.sin(math.pi / 8.0)

# 8-neighbor offsets ordered by the linear index of the neighbor they reach
# (dy major, dx minor), so argmax ties resolve to the lowest neighbor index.
_OFFSETS_2D = np.array([(-1, -1), (0, -1), (1, -1),
                        (-1, 0), (1, 0),
                        (-1, 1), (0, 1), (1, 1)], dtype=np.int64)
_DIRS_2D = _OFFSETS_2D / np.linalg.norm(_OFFSETS_2D, axis=1, keepdims=True)


@dataclass(frozen=True)
class HeatmapResult:
    heights: ScalarField
    terminal: np.ndarray  # (n,) bool


def _successors_2d(grid: Grid, idx: np.ndarray, multi: np.ndarray,
                   vec: np.ndarray, length: np.ndarray,
                   eps_grad: float) -> np.ndarray:
    n1, n2 = grid.resolution
    scores = (-vec) @ _DIRS_2D.T  # (m, 8), proportional to the cosine per offset
    nb = multi[:, None, :] + _OFFSETS_2D[None, :, :]
    nb[:, :, 0] = np.clip(nb[:, :, 0], 0, n1 - 1)
    nb[:, :, 1] = np.clip(nb[:, :, 1], 0, n2 - 1)
    nb_lin = nb[:, :, 0] + n1 * nb[:, :, 1]
    best = scores.max(axis=1, keepdims=True)
    tied = scores == best
    succ = np.where(tied, nb_lin, np.iinfo(np.int64).max).min(axis=1)
    succ[succ == idx] = -1  # fully clamped against the box
    succ[length < eps_grad] = -1
    return succ


def _successors_3d(grid: Grid, idx: np.ndarray, multi: np.ndarray,
                   vec: np.ndarray, length: np.ndarray,
                   eps_grad: float) -> np.ndarray:
    safe = np.where(length < eps_grad, 1.0, length)
    ratio = -vec / safe[:, None]
    step = (ratio > _SIN_22_5).astype(np.int64) - (ratio < -_SIN_22_5).astype(np.int64)
    nb = multi + step
    for axis in range(3):
        nb[:, axis] = np.clip(nb[:, axis], 0, grid.resolution[axis] - 1)
    succ = grid.multi_to_linear(nb)
    succ[succ == idx] = -1
    succ[length < eps_grad] = -1
    return succ


def successor_field(mog_field: VectorField, eps_grad: float = EPS_GRAD,
                    chunk_size: int = 262_144) -> np.ndarray:
    """Per-cell descent successor (linear index), -1 where the path ends."""
    grid = mog_field.grid
    vectors = mog_field.values
    lengths = np.linalg.norm(vectors, axis=1)
    kernel = _successors_2d if grid.p == 2 else _successors_3d
    n = grid.n_cells
    succ = np.empty(n, dtype=np.int64)
    for start in range(0, n, chunk_size):
        idx = np.arange(start, min(start + chunk_size, n), dtype=np.int64)
        succ[start:start + len(idx)] = kernel(
            grid, idx, grid.linear_to_multi(idx), vectors[idx], lengths[idx], eps_grad)
    return succ


def descent_step_2d(grid: Grid, mog_vector, cell: int,
                    eps_grad: float = EPS_GRAD) -> int | None:
    """Neighbor the descent moves to from one cell, or None at a path end.

    Picks the 8-neighbor whose offset has the largest cosine with -mog; ties
    go to the lowest neighbor linear index; offsets are clamped per axis at
    the box, and a fully clamped step ends the path.
    """
    vec = np.asarray(mog_vector, dtype=np.float64).reshape(1, 2)
    idx = np.asarray([cell], dtype=np.int64)
    s = _successors_2d(grid, idx, grid.linear_to_multi(idx), vec,
                       np.linalg.norm(vec, axis=1), eps_grad)[0]
    return None if s < 0 else int(s)


def descent_step_3d(grid: Grid, mog_vector, cell: int,
                    eps_grad: float = EPS_GRAD) -> int | None:
    """Per-axis 22.5 degree rule: step along axis i iff the angle between the
    descent direction and the plane of the other two axes exceeds 22.5 deg."""
    vec = np.asarray(mog_vector, dtype=np.float64).reshape(1, 3)
    idx = np.asarray([cell], dtype=np.int64)
    s = _successors_3d(grid, idx, grid.linear_to_multi(idx), vec,
                       np.linalg.norm(vec, axis=1), eps_grad)[0]
    return None if s < 0 else int(s)


def _trace(start: int, succ: np.ndarray, lengths: np.ndarray,
           memo: np.ndarray, terminal: np.ndarray, eps_grad: float) -> None:
    path: list[int] = []
    on_path: dict[int, int] = {}
    c = start
    while True:
        m = memo[c]
        if not math.isnan(m):
            base = m
            break
        if c in on_path:
            # Cycle: anchor it at its smallest cell index (canonical choice,
            # independent of where the path entered), then unwind around it.
            kpos = on_path[c]
            cycle = path[kpos:]
            anchor_pos = kpos + int(np.argmin(cycle))
            memo[path[anchor_pos]] = 0.0
            terminal[path[anchor_pos]] = True
            base = 0.0
            for i in range(anchor_pos - 1, kpos - 1, -1):
                base = lengths[path[i]] + base
                memo[path[i]] = base
            base = memo[path[kpos]]
            for i in range(len(path) - 1, anchor_pos, -1):
                base = lengths[path[i]] + base
                memo[path[i]] = base
            base = memo[path[kpos]]
            path = path[:kpos]
            break
        on_path[c] = len(path)
        path.append(c)
        s = succ[c]
        if s < 0:
            memo[c] = 0.0 if lengths[c] < eps_grad else lengths[c]
            terminal[c] = True
            base = memo[c]
            path.pop()
            break
        c = s
    for i in range(len(path) - 1, -1, -1):
        base = lengths[path[i]] + base
        memo[path[i]] = base


def gradient_field_heatmap(mog_field: VectorField, eps_grad: float = EPS_GRAD,
                           parallel: bool = False, workers: int = 4,
                           start_order=None) -> HeatmapResult:
    """Integrate descent paths over the whole grid.

    Memo writes are only ever final values, so tracing may run from any start
    order or concurrently; the resulting heights are bitwise identical.
    """
    grid = mog_field.grid
    lengths = np.linalg.norm(mog_field.values, axis=1)
    succ = successor_field(mog_field, eps_grad)
    n = grid.n_cells
    memo = np.full(n, np.nan)
    terminal = np.zeros(n, dtype=bool)

    def run(cells) -> None:
        for start in cells:
            if math.isnan(memo[start]):
                _trace(int(start), succ, lengths, memo, terminal, eps_grad)

    if parallel:
        starts = np.array_split(np.arange(n), max(1, workers))
        with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
            list(pool.map(run, starts))
    else:
        run(range(n) if start_order is None else start_order)
    return HeatmapResult(ScalarField(grid, memo), terminal)

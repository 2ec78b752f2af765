"""Uniform grid discretization of the decision space and batch evaluation.

Cells are sampled at their centers, x_i(j) = l_i + (j + 0.5) (u_i - l_i)/n_i,
and addressed by the linear index j1 + n1*(j2 + n2*j3) (axis 1 fastest).
Field evaluation is pure per-cell work: any chunking or ordering produces
bitwise-identical arrays.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .mog import EPS_ZERO, mog_from_units, normalize_gradients_batch
from .problems import Problem

MAX_CELLS = 20_000_000
DEFAULT_RESOLUTION = {2: (1000, 1000), 3: (100, 100, 100)}


class ResolutionError(ValueError):
    """Grid resolution is out of the supported range."""


@dataclass(frozen=True)
class Grid:
    lower: np.ndarray
    upper: np.ndarray
    resolution: tuple

    @property
    def p(self) -> int:
        return len(self.resolution)

    @property
    def n_cells(self) -> int:
        n = 1
        for r in self.resolution:
            n *= r
        return n

    @property
    def widths(self) -> np.ndarray:
        return (self.upper - self.lower) / np.asarray(self.resolution, dtype=np.float64)

    def axis_centers(self, axis: int) -> np.ndarray:
        """Cell-center coordinates along one 0-based axis."""
        n = self.resolution[axis]
        j = np.arange(n, dtype=np.float64)
        return self.lower[axis] + (j + 0.5) * (self.upper[axis] - self.lower[axis]) / n

    def multi_to_linear(self, multi) -> np.ndarray:
        multi = np.asarray(multi)
        lin = np.asarray(multi[..., 0], dtype=np.int64).copy()
        stride = 1
        for axis in range(1, self.p):
            stride *= self.resolution[axis - 1]
            lin += multi[..., axis] * stride
        return lin

    def linear_to_multi(self, linear) -> np.ndarray:
        linear = np.asarray(linear, dtype=np.int64)
        multi = np.empty(linear.shape + (self.p,), dtype=np.int64)
        rem = linear
        for axis in range(self.p):
            multi[..., axis] = rem % self.resolution[axis]
            rem = rem // self.resolution[axis]
        return multi

    def centers(self, linear=None) -> np.ndarray:
        """Cell-center coordinates, all cells by default, shape (n, p)."""
        if linear is None:
            linear = np.arange(self.n_cells, dtype=np.int64)
        multi = self.linear_to_multi(linear)
        w = (self.upper - self.lower) / np.asarray(self.resolution, dtype=np.float64)
        return self.lower + (multi + 0.5) * w


def _field_values(grid: Grid, values: np.ndarray, ncomp: int | None) -> np.ndarray:
    values = np.asarray(values, dtype=np.float64)
    expected = (grid.n_cells,) if ncomp is None else (grid.n_cells, ncomp)
    if values.shape != expected:
        raise ValueError(f"field values have shape {values.shape}, expected {expected}")
    if not np.all(np.isfinite(values)):
        raise ValueError("field values must be finite")
    return values


@dataclass(frozen=True)
class ScalarField:
    grid: Grid
    values: np.ndarray  # (n,)

    def __post_init__(self):
        object.__setattr__(self, "values", _field_values(self.grid, self.values, None))


@dataclass(frozen=True)
class VectorField:
    grid: Grid
    values: np.ndarray  # (n, p)

    def __post_init__(self):
        object.__setattr__(self, "values", _field_values(self.grid, self.values, self.grid.p))


@dataclass(frozen=True)
class ObjectiveField:
    grid: Grid
    values: np.ndarray  # (n, k)

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 2 or values.shape[0] != self.grid.n_cells:
            raise ValueError(f"objective values have shape {values.shape}, "
                             f"expected ({self.grid.n_cells}, k)")
        if not np.all(np.isfinite(values)):
            raise ValueError("objective values must be finite")
        object.__setattr__(self, "values", values)

    @property
    def k(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True)
class FieldBundle:
    """Everything the downstream visualizations need, evaluated per cell."""

    grid: Grid
    objectives: ObjectiveField
    unit_gradients: np.ndarray  # (n, k, p)
    degenerate: np.ndarray      # (n,) bool
    mog: VectorField
    mog_length: ScalarField


def make_grid(problem: Problem, resolution=None, max_cells: int = MAX_CELLS) -> Grid:
    """Grid over the problem's box; defaults 1000x1000 (p=2), 100^3 (p=3)."""
    if resolution is None:
        resolution = DEFAULT_RESOLUTION[problem.p]
    resolution = tuple(int(r) for r in resolution)
    if len(resolution) != problem.p:
        raise ResolutionError(f"resolution {resolution} does not match p={problem.p}")
    if any(r < 2 for r in resolution):
        raise ResolutionError("each axis needs at least 2 cells")
    n = 1
    for r in resolution:
        n *= r
    if n > max_cells:
        raise ResolutionError(f"{n} cells exceed the configured maximum of {max_cells}")
    return Grid(problem.lower.copy(), problem.upper.copy(), resolution)


def evaluate_field(problem: Problem, grid: Grid,
                   chunk_size: int = 262_144) -> FieldBundle:
    """Evaluate objectives, normalized gradients and MOGs for every cell."""
    n = grid.n_cells
    k, p = problem.k, problem.p
    objectives = np.empty((n, k))
    units = np.empty((n, k, p))
    degenerate = np.empty(n, dtype=bool)
    vectors = np.empty((n, p))
    for start in range(0, n, chunk_size):
        stop = min(start + chunk_size, n)
        idx = np.arange(start, stop, dtype=np.int64)
        x = grid.centers(idx)
        try:
            objectives[start:stop] = problem.evaluate(x)
            grads = problem.gradients(x)
        except Exception as exc:
            raise type(exc)(f"evaluation failed in cells [{start}, {stop}): {exc}") from exc
        units[start:stop], degenerate[start:stop] = normalize_gradients_batch(grads, EPS_ZERO)
        vectors[start:stop] = mog_from_units(units[start:stop], degenerate[start:stop])
    lengths = np.linalg.norm(vectors, axis=1)
    return FieldBundle(
        grid=grid,
        objectives=ObjectiveField(grid, objectives),
        unit_gradients=units,
        degenerate=degenerate,
        mog=VectorField(grid, vectors),
        mog_length=ScalarField(grid, lengths),
    )

"""Views into 3D scalar fields: axis-aligned slices and onion-layer shells.

A slice extracts one plane of cell values exactly (no interpolation), like
stepping through an MRI scan. An onion shell is the voxel isosurface of the
height field at a threshold c: the cells of the region {h <= c} that touch
its boundary, which visually encapsulates the efficient sets.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .fields import Grid, ScalarField


@dataclass(frozen=True)
class SliceView:
    axis: int           # 1-based slicing axis
    index: int
    plane_coord: float  # cell-center coordinate of the plane along the axis
    field2d: ScalarField
    overlay_cells: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))
    overlay_positions: np.ndarray = field(default_factory=lambda: np.zeros((0, 3)))
    overlay_ranks: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))


@dataclass(frozen=True)
class OnionShell:
    threshold: float
    cells: np.ndarray  # linear indices, sorted


def _as_volume(field3d: ScalarField) -> np.ndarray:
    n1, n2, n3 = field3d.grid.resolution
    return field3d.values.reshape(n3, n2, n1)  # axis 1 varies fastest


def slice_indices(grid: Grid, axis: int, index: int) -> tuple[np.ndarray, Grid]:
    """Linear indices of the plane `axis = index` in 2D slice order, plus the
    2D grid of the remaining axes (ascending axis order)."""
    if grid.p != 3:
        raise ValueError("slicing requires a 3D field")
    if axis not in (1, 2, 3):
        raise ValueError(f"axis must be 1, 2 or 3, got {axis}")
    n = grid.resolution[axis - 1]
    if not 0 <= index < n:
        raise IndexError(f"slice index {index} out of range [0, {n})")
    n1, n2, n3 = grid.resolution
    lin = np.arange(grid.n_cells, dtype=np.int64).reshape(n3, n2, n1)
    if axis == 1:
        plane = lin[:, :, index]       # (n3, n2)
    elif axis == 2:
        plane = lin[:, index, :]       # (n3, n1)
    else:
        plane = lin[index, :, :]       # (n2, n1)
    keep = [a for a in range(3) if a != axis - 1]
    grid2d = Grid(grid.lower[keep], grid.upper[keep],
                  (grid.resolution[keep[0]], grid.resolution[keep[1]]))
    return plane.ravel(), grid2d


def slice_field(field3d: ScalarField, axis: int, index: int,
                overlay_cells=None, overlay_ranks=None) -> SliceView:
    """Extract the plane `axis = index` of a 3D field.

    Efficient cells passed as overlay are kept in full (with their 3D
    positions and ranks) regardless of the plane, so they stay visible while
    the plane moves.
    """
    grid = field3d.grid
    lin, grid2d = slice_indices(grid, axis, index)
    cells = np.zeros(0, dtype=np.int64) if overlay_cells is None \
        else np.asarray(overlay_cells, dtype=np.int64)
    ranks = np.zeros(len(cells), dtype=np.int64) if overlay_ranks is None \
        else np.asarray(overlay_ranks, dtype=np.int64)
    return SliceView(
        axis=axis,
        index=index,
        plane_coord=float(grid.axis_centers(axis - 1)[index]),
        field2d=ScalarField(grid2d, field3d.values[lin]),
        overlay_cells=cells,
        overlay_positions=grid.centers(cells) if len(cells) else np.zeros((0, 3)),
        overlay_ranks=ranks,
    )


def stack_slices(views: list[SliceView], grid: Grid) -> ScalarField:
    """Reassemble a 3D field from all slices along one axis (axis-order aware)."""
    axis = views[0].axis
    n = grid.resolution[axis - 1]
    if len(views) != n or any(v.axis != axis for v in views):
        raise ValueError("need every slice index of one axis")
    n1, n2, n3 = grid.resolution
    vol = np.empty((n3, n2, n1))
    for v in sorted(views, key=lambda s: s.index):
        plane = v.field2d.values.reshape(v.field2d.grid.resolution[::-1])
        if axis == 1:
            vol[:, :, v.index] = plane
        elif axis == 2:
            vol[:, v.index, :] = plane
        else:
            vol[v.index, :, :] = plane
    return ScalarField(grid, vol.ravel())


def onion_shell(field3d: ScalarField, threshold: float) -> OnionShell:
    """Voxel shell of the sublevel region {h <= threshold}.

    A cell belongs to the shell iff its height is <= threshold and either a
    6-neighbor exceeds the threshold or the cell lies on a box face.
    """
    grid = field3d.grid
    if grid.p != 3:
        raise ValueError("onion shells require a 3D field")
    vol = _as_volume(field3d)
    inside = vol <= threshold
    boundary = np.zeros_like(inside)
    boundary[0, :, :] = boundary[-1, :, :] = True
    boundary[:, 0, :] = boundary[:, -1, :] = True
    boundary[:, :, 0] = boundary[:, :, -1] = True
    exposed = boundary.copy()
    for axis in range(3):
        hi = np.roll(vol, -1, axis=axis) > threshold
        lo = np.roll(vol, 1, axis=axis) > threshold
        # roll wraps around; wrapped comparisons only affect boundary cells,
        # which are already exposed
        exposed |= hi | lo
    shell = inside & exposed
    return OnionShell(float(threshold), np.flatnonzero(shell.ravel()))


def threshold_range(field3d: ScalarField, q_low: float = 0.01,
                    q_high: float = 0.99) -> tuple[float, float]:
    """Default onion slider range: quantiles of the log-height distribution,
    mapped back to height units so the slider is meaningful across problems."""
    logs = np.log1p(field3d.values)
    lo, hi = np.quantile(logs, [q_low, q_high])
    return float(np.expm1(lo)), float(np.expm1(hi))

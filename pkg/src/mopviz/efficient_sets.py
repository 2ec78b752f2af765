"""Detection and dominance ranking of locally efficient cells.

First-order candidates come from simplex tests: every grid square is split
into two triangles by the fixed lower-left to upper-right diagonal (every
cube into the six Kuhn tetrahedra); a simplex is critical when the origin
lies in the interior of the convex hull of the normalized single-objective
gradients collected at its corner cells, and then all its cells are marked.
A second-order filter keeps only cells where the descent vector field is
stable (non-positive real parts of the Jacobian eigenvalues, checked through
matrix invariants), and a final pruning step drops marked cells that are
dominated by one of their direct grid neighbors -- such cells cannot be
locally efficient at grid resolution by definition.

The per-simplex hull predicate is evaluated with closed-form separating
direction tests (angular gaps in 2D, pairwise cross products in 3D), which
decide exactly the same question as the linear program in
``origin_in_hull`` but vectorize over hundreds of thousands of simplices.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linprog

from .dominance import dominance_counts
from .fields import FieldBundle, ObjectiveField, ScalarField, VectorField
from .heatmap import HeatmapResult
from .mog import DELTA_HULL


@dataclass(frozen=True)
class PlotData:
    """Grayscale heatmap background plus ranked locally efficient cells."""

    background: ScalarField
    efficient_cells: np.ndarray  # (e,) linear indices, sorted
    ranks: np.ndarray            # (e,) dominance count + 1 among efficient cells


def origin_in_hull(vectors, delta: float = DELTA_HULL) -> bool:
    """True iff the origin is interior to the convex hull of the vectors.

    Linear feasibility formulation: maximize t subject to sum(l_i v_i) = 0,
    sum(l_i) = 1, l_i >= t. A positive optimal margin t, together with the
    vectors spanning the full space, certifies an interior point.
    """
    v = np.asarray(vectors, dtype=np.float64)
    m, p = v.shape
    if m < p + 1:
        return False
    if np.linalg.matrix_rank(v, tol=1e-12) < p:
        return False
    c = np.zeros(m + 1)
    c[-1] = -1.0
    a_eq = np.zeros((p + 1, m + 1))
    a_eq[:p, :m] = v.T
    a_eq[p, :m] = 1.0
    b_eq = np.zeros(p + 1)
    b_eq[p] = 1.0
    a_ub = np.zeros((m, m + 1))
    a_ub[np.arange(m), np.arange(m)] = -1.0
    a_ub[:, -1] = 1.0
    res = linprog(c, A_ub=a_ub, b_ub=np.zeros(m), A_eq=a_eq, b_eq=b_eq,
                  bounds=[(None, None)] * (m + 1), method="highs")
    return bool(res.success and -res.fun > delta)


def _hull_interior_2d(units: np.ndarray, delta: float) -> np.ndarray:
    """Batched interior test for (s, m, 2) unit vectors: the origin is interior
    iff the largest circular gap between direction angles is below pi."""
    ang = np.arctan2(units[:, :, 1], units[:, :, 0])
    ang.sort(axis=1)
    gaps = np.diff(ang, axis=1)
    wrap = ang[:, 0] + 2.0 * np.pi - ang[:, -1]
    max_gap = np.maximum(gaps.max(axis=1), wrap)
    return max_gap < np.pi - delta


def _hull_interior_3d(units: np.ndarray, delta: float) -> np.ndarray:
    """Batched interior test for (s, m, 3) unit vectors.

    The origin is not interior iff some direction d has v.d <= 0 for all v;
    any such cone of directions, if nontrivial, contains an extreme ray with
    two active constraints, i.e. d parallel to a pairwise cross product.
    """
    s, m, _ = units.shape
    pairs = np.array(list(itertools.combinations(range(m), 2)))
    cross = np.cross(units[:, pairs[:, 0]], units[:, pairs[:, 1]])  # (s, np, 3)
    norm = np.linalg.norm(cross, axis=2)
    valid = norm > 1e-12
    dots = np.einsum("spc,smc->spm", cross, units)
    tol = delta * norm + 1e-15
    separating = valid & ((dots.max(axis=2) <= tol) | (dots.min(axis=2) >= -tol))
    all_parallel = ~valid.any(axis=1)  # rank-deficient vector set, empty interior
    return ~separating.any(axis=1) & ~all_parallel


def _square_triangles(resolution):
    """Corner cell indices of the 2 triangles of every grid square: (s, 3)."""
    n1, n2 = resolution
    i1 = np.arange(n1 - 1)
    i2 = np.arange(n2 - 1)
    base = (i1[None, :] + n1 * i2[:, None]).ravel()
    c00, c10, c01, c11 = base, base + 1, base + n1, base + n1 + 1
    t1 = np.stack([c00, c10, c11], axis=1)
    t2 = np.stack([c00, c11, c01], axis=1)
    return np.concatenate([t1, t2], axis=0)


def _cube_tetrahedra(resolution):
    """Corner cell indices of the 6 Kuhn tetrahedra of every grid cube: (s, 4).

    Each tetrahedron walks from corner (0,0,0) to (1,1,1) along one axis
    permutation, which tiles the cube deterministically.
    """
    n1, n2, n3 = resolution
    i1 = np.arange(n1 - 1)
    i2 = np.arange(n2 - 1)
    i3 = np.arange(n3 - 1)
    base = (i1[None, None, :] + n1 * i2[None, :, None]
            + n1 * n2 * i3[:, None, None]).ravel()
    stride = np.array([1, n1, n1 * n2], dtype=np.int64)
    tets = []
    for perm in itertools.permutations(range(3)):
        offsets = [0]
        pos = np.zeros(3, dtype=np.int64)
        for axis in perm[:2]:
            pos[axis] = 1
            offsets.append(int(pos @ stride))
        offsets.append(int(stride.sum()))
        tets.append(base[:, None] + np.asarray(offsets, dtype=np.int64)[None, :])
    return np.concatenate(tets, axis=0)


def first_order_cells(bundle: FieldBundle, delta: float = DELTA_HULL,
                      chunk_size: int = 16_384) -> np.ndarray:
    """Cells belonging to at least one first-order critical simplex.

    Cells with a vanishing single-objective gradient are single-objective
    optima: they are critical by definition and bypass the hull test, and
    simplices touching them are skipped.
    """
    grid = bundle.grid
    units = bundle.unit_gradients
    n, k, p = units.shape
    simplices = _square_triangles(grid.resolution) if p == 2 \
        else _cube_tetrahedra(grid.resolution)
    interior_test = _hull_interior_2d if p == 2 else _hull_interior_3d
    marked = np.zeros(n, dtype=bool)
    marked[bundle.degenerate] = True
    for start in range(0, simplices.shape[0], chunk_size):
        chunk = simplices[start:start + chunk_size]
        vs = units[chunk]  # (s, corners, k, p)
        vs = vs.reshape(vs.shape[0], -1, p)
        ok = ~bundle.degenerate[chunk].any(axis=1)
        inside = interior_test(vs, delta) & ok
        marked[chunk[inside].ravel()] = True
    return np.flatnonzero(marked)


def _face_normal_ok(normal: np.ndarray, side: int, delta: float) -> np.ndarray:
    """Sign condition of the combined gradient against the face's normal cone:
    at a lower bound it must not point out of the box (component >= 0), at an
    upper bound the reverse."""
    return normal >= -delta if side == 0 else normal <= delta


def _face_test_k2_1d(tang: np.ndarray, norm: np.ndarray, side: int, delta: float):
    """Two gradients over a 1D face tangent: the unique convex combination
    with zero tangential part must satisfy the normal-cone sign."""
    t1, t2 = tang[:, 0], tang[:, 1]
    n1, n2 = norm[:, 0], norm[:, 1]
    both_zero = (np.abs(t1) < 1e-12) & (np.abs(t2) < 1e-12)
    straddle = (t1 * t2 <= 0) & ~both_zero
    span = np.where(straddle, t2 - t1, 1.0)
    lam = np.where(straddle, t2 / span, 0.0)
    combo = lam * n1 + (1 - lam) * n2
    ok = straddle & _face_normal_ok(combo, side, delta)
    extreme = np.maximum(n1, n2) if side == 0 else np.minimum(n1, n2)
    ok |= both_zero & _face_normal_ok(extreme, side, delta)
    return ok


def _face_test_k3_2d(tang: np.ndarray, norm: np.ndarray, side: int, delta: float):
    """Three gradients over a 2D face tangent: barycentric weights of the
    zero tangential combination, then the normal-cone sign."""
    a = tang[:, 0] - tang[:, 2]
    b = tang[:, 1] - tang[:, 2]
    det = a[:, 0] * b[:, 1] - a[:, 1] * b[:, 0]
    okdet = np.abs(det) > 1e-300
    safe = np.where(okdet, det, 1.0)
    rhs = -tang[:, 2]
    l1 = (rhs[:, 0] * b[:, 1] - rhs[:, 1] * b[:, 0]) / safe
    l2 = (a[:, 0] * rhs[:, 1] - a[:, 1] * rhs[:, 0]) / safe
    inside = okdet & (l1 >= -delta) & (l2 >= -delta) & (l1 + l2 <= 1 + delta)
    combo = l1 * norm[:, 0] + l2 * norm[:, 1] + (1 - l1 - l2) * norm[:, 2]
    return inside & _face_normal_ok(combo, side, delta)


def _face_test_k3_1d(tang: np.ndarray, norm: np.ndarray, side: int, delta: float):
    """Three gradients over a 1D face tangent: any pair suffices."""
    ok = np.zeros(tang.shape[0], dtype=bool)
    for i, j in ((0, 1), (0, 2), (1, 2)):
        ok |= _face_test_k2_1d(tang[:, (i, j)], norm[:, (i, j)], side, delta)
    return ok


def _face_test_k2_2d(tang: np.ndarray, norm: np.ndarray, side: int, delta: float):
    """Two gradients over a 2D face tangent: tangential parts must oppose."""
    t1, t2 = tang[:, 0], tang[:, 1]
    cross = t1[:, 0] * t2[:, 1] - t1[:, 1] * t2[:, 0]
    dot = np.einsum("np,np->n", t1, t2)
    m1 = np.linalg.norm(t1, axis=1)
    m2 = np.linalg.norm(t2, axis=1)
    anti = (np.abs(cross) <= 1e-9 * np.maximum(m1 * m2, 1e-12)) & (dot <= 0)
    lam = m2 / np.maximum(m1 + m2, 1e-300)
    combo = lam * norm[:, 0] + (1 - lam) * norm[:, 1]
    return anti & _face_normal_ok(combo, side, delta)


def face_critical_cells(bundle: FieldBundle, delta: float = DELTA_HULL) -> np.ndarray:
    """First-order critical cells of the outermost layers of the box.

    Interior simplex tests cannot fire when the efficient set lies on a box
    face (e.g. problems whose Pareto set sits at an active bound): there the
    condition is that some convex combination of the gradients is tangentially
    zero and points into the bound, which has a closed form per cell.
    """
    grid = bundle.grid
    units = bundle.unit_gradients
    n, k, p = units.shape
    marked = []
    all_multi = grid.linear_to_multi(np.arange(n, dtype=np.int64))
    for axis in range(p):
        tangent_axes = [a for a in range(p) if a != axis]
        for side in (0, 1):
            layer = grid.resolution[axis] - 1 if side else 0
            cells = np.flatnonzero(all_multi[:, axis] == layer)
            u = units[cells]
            tang = u[:, :, tangent_axes]
            norm = u[:, :, axis]
            if k == 2 and p == 2:
                ok = _face_test_k2_1d(tang[:, :, 0], norm, side, delta)
            elif k == 3 and p == 3:
                ok = _face_test_k3_2d(tang, norm, side, delta)
            elif k == 3 and p == 2:
                ok = _face_test_k3_1d(tang[:, :, 0], norm, side, delta)
            else:
                ok = _face_test_k2_2d(tang, norm, side, delta)
            ok &= ~bundle.degenerate[cells]
            marked.append(cells[ok])
    return np.unique(np.concatenate(marked)) if marked else np.zeros(0, dtype=np.int64)


def mog_jacobian(mog_field: VectorField, cell: int) -> np.ndarray:
    """Jacobian of the descent field (-MOG) at one cell, finite differences."""
    return _jacobians(mog_field, np.asarray([cell], dtype=np.int64))[0]


def _jacobians(mog_field: VectorField, cells: np.ndarray) -> np.ndarray:
    grid = mog_field.grid
    p = grid.p
    widths = grid.widths
    descent = -mog_field.values
    multi = grid.linear_to_multi(cells)
    jac = np.empty((len(cells), p, p))
    for axis in range(p):
        up = multi.copy()
        up[:, axis] = np.minimum(up[:, axis] + 1, grid.resolution[axis] - 1)
        dn = multi.copy()
        dn[:, axis] = np.maximum(dn[:, axis] - 1, 0)
        span = (up[:, axis] - dn[:, axis]).astype(np.float64) * widths[axis]
        delta = descent[grid.multi_to_linear(up)] - descent[grid.multi_to_linear(dn)]
        jac[:, :, axis] = delta / span[:, None]
    return jac


def stability_tau(mog_field: VectorField) -> float:
    """Default slack for the invariant tests: finite-difference Jacobians of a
    degenerate field are noisy, so allow 1e-3 of the field's natural scale."""
    max_len = float(np.linalg.norm(mog_field.values, axis=1).max(initial=0.0))
    return 1e-3 * max_len / float(np.mean(mog_field.grid.widths))


def stability_mask(jacobians: np.ndarray, tau: float) -> np.ndarray:
    """Stability of descent-field Jacobians via matrix invariants.

    2D: divergence (trace) <= tau. 3D: one eigenvalue is structurally zero,
    so the remaining pair has non-positive real parts iff trace(J) <= tau and
    the second invariant (sum of principal 2x2 minors) >= -tau.
    """
    jac = np.asarray(jacobians, dtype=np.float64)
    trace = np.trace(jac, axis1=1, axis2=2)
    if jac.shape[1] == 2:
        return trace <= tau
    q = (jac[:, 0, 0] * jac[:, 1, 1] - jac[:, 0, 1] * jac[:, 1, 0]
         + jac[:, 0, 0] * jac[:, 2, 2] - jac[:, 0, 2] * jac[:, 2, 0]
         + jac[:, 1, 1] * jac[:, 2, 2] - jac[:, 1, 2] * jac[:, 2, 1])
    return (trace <= tau) & (q >= -tau)


def second_order_filter(cells: np.ndarray, mog_field: VectorField,
                        tau: float | None = None) -> np.ndarray:
    """Keep first-order cells whose descent field is stable."""
    cells = np.asarray(cells, dtype=np.int64)
    if len(cells) == 0:
        return cells
    if tau is None:
        tau = stability_tau(mog_field)
    return cells[stability_mask(_jacobians(mog_field, cells), tau)]


def prune_neighbor_dominated(cells: np.ndarray,
                             objectives: ObjectiveField) -> np.ndarray:
    """Drop cells dominated by a directly adjacent cell.

    A point dominated inside every neighborhood of itself is not locally
    efficient, so a marked cell whose image is dominated by one of its
    Chebyshev-1 neighbors is a discretization artifact (it appears next to
    single-objective optima, where simplex tests fire on whole squares).
    """
    cells = np.asarray(cells, dtype=np.int64)
    if len(cells) == 0:
        return cells
    grid = objectives.grid
    values = objectives.values
    multi = grid.linear_to_multi(cells)
    f_cell = values[cells]
    dominated = np.zeros(len(cells), dtype=bool)
    for offset in itertools.product((-1, 0, 1), repeat=grid.p):
        if all(o == 0 for o in offset):
            continue
        nb = multi + np.asarray(offset, dtype=np.int64)
        ok = np.ones(len(cells), dtype=bool)
        for axis in range(grid.p):
            ok &= (nb[:, axis] >= 0) & (nb[:, axis] < grid.resolution[axis])
        if not ok.any():
            continue
        f_nb = values[grid.multi_to_linear(nb[ok])]
        fc = f_cell[ok]
        dom = np.all(f_nb <= fc, axis=1) & np.any(f_nb < fc, axis=1)
        dominated[np.flatnonzero(ok)[dom]] = True
    return cells[~dominated]


def efficient_cells(bundle: FieldBundle, tau: float | None = None,
                    delta: float = DELTA_HULL) -> np.ndarray:
    """Full detection pipeline: first-order (interior simplices plus box
    faces), stability filter, neighbor-dominance pruning."""
    first = np.union1d(first_order_cells(bundle, delta),
                       face_critical_cells(bundle, delta))
    stable = second_order_filter(first, bundle.mog, tau)
    return prune_neighbor_dominated(stable, bundle.objectives)


def plot_data(heatmap: HeatmapResult, efficient: np.ndarray,
              objectives: ObjectiveField) -> PlotData:
    """Rank efficient cells by dominance among their own objective images."""
    efficient = np.sort(np.asarray(efficient, dtype=np.int64))
    if heatmap.heights.grid.n_cells != objectives.grid.n_cells:
        raise ValueError("heatmap and objectives must share one grid")
    ranks = dominance_counts(objectives.values[efficient]) + 1
    return PlotData(heatmap.heights, efficient, ranks)

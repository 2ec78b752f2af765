"""Multi-objective gradients for two or three objectives in 2D/3D.

The multi-objective gradient (MOG) is the minimum-norm point of the convex
hull of the normalized single-objective gradients. It vanishes exactly at
first-order locally efficient points. Closed forms used here:

  k = 2        (u1 + u2) / 2, which is the min-norm point of the segment
               between two unit vectors.
  k = 3, p = 2 zero if the origin lies in the hull, otherwise the midpoint
               of the pair with the largest angle (equivalently the smallest
               pairwise dot product: for unit vectors the midpoint norm is
               cos(theta/2), so largest angle == shortest midpoint).
  k = 3, p = 3 the orthogonal projection of the origin onto the plane
               spanned by the three unit vectors when its barycentric
               coordinates are nonnegative, otherwise the shortest of the
               three pairwise midpoints.

All core routines are batched over cells; the scalar operations delegate to
the batch kernels with n = 1 so field evaluation and pointwise evaluation
agree bitwise. Inside each k = 3 kernel the unit vectors are first put into
lexicographic order, which makes the result exactly invariant under
reordering of objectives.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

EPS_ZERO = 1e-8   # single-objective gradient norms below this flag degeneracy
DELTA_HULL = 1e-9  # barycentric slack for hull-membership decisions


@dataclass(frozen=True)
class MOGResult:
    vector: np.ndarray
    length: float
    degenerate: bool


def _result(vector: np.ndarray, degenerate: bool = False) -> MOGResult:
    if degenerate:
        vector = np.zeros_like(vector)
    return MOGResult(vector, float(np.linalg.norm(vector)), degenerate)


def normalize_gradients_batch(grads: np.ndarray, eps_zero: float = EPS_ZERO):
    """Normalize a (n, k, p) gradient stack; rows with any tiny gradient are
    flagged degenerate and their unit vectors zeroed."""
    norms = np.linalg.norm(grads, axis=2)
    degenerate = np.any(norms < eps_zero, axis=1)
    safe = np.where(norms < eps_zero, 1.0, norms)
    units = grads / safe[:, :, None]
    units[norms < eps_zero] = 0.0
    return units, degenerate


def normalize_gradients(grads, eps_zero: float = EPS_ZERO):
    """Normalize k gradient vectors; returns (units (k, p), degenerate flag)."""
    units, deg = normalize_gradients_batch(np.asarray(grads, dtype=np.float64)[None], eps_zero)
    return units[0], bool(deg[0])


def _lexsorted(units: np.ndarray) -> np.ndarray:
    """Sort the k=3 unit vectors of every row lexicographically by components."""
    n, k, p = units.shape
    keys = tuple(units[:, :, i] for i in reversed(range(p)))
    order = np.lexsort(keys, axis=1)
    return np.take_along_axis(units, order[:, :, None], axis=1)


def _pairwise_midpoint_fallback(u: np.ndarray) -> np.ndarray:
    """Midpoint of the pair with the smallest dot product (largest angle).

    Ties pick the first pair in the order (0,1), (0,2), (1,2).
    """
    dots = np.stack([
        np.einsum("np,np->n", u[:, 0], u[:, 1]),
        np.einsum("np,np->n", u[:, 0], u[:, 2]),
        np.einsum("np,np->n", u[:, 1], u[:, 2]),
    ], axis=1)
    pick = np.argmin(dots, axis=1)
    first = np.where(pick == 2, 1, 0)
    second = np.where(pick == 0, 1, 2)
    rows = np.arange(u.shape[0])
    return 0.5 * (u[rows, first] + u[rows, second])


def _mog3_p2(u: np.ndarray, delta: float) -> np.ndarray:
    """k = 3 objectives in the plane."""
    u = _lexsorted(u)
    a = u[:, 0] - u[:, 2]
    b = u[:, 1] - u[:, 2]
    det = a[:, 0] * b[:, 1] - a[:, 1] * b[:, 0]
    ok = np.abs(det) > 1e-300
    safe_det = np.where(ok, det, 1.0)
    # solve [a b] @ (l1, l2) = -u3 by Cramer's rule
    rhs = -u[:, 2]
    l1 = (rhs[:, 0] * b[:, 1] - rhs[:, 1] * b[:, 0]) / safe_det
    l2 = (a[:, 0] * rhs[:, 1] - a[:, 1] * rhs[:, 0]) / safe_det
    inside = ok & (l1 >= -delta) & (l2 >= -delta) & (l1 + l2 <= 1.0 + delta)
    fallback = _pairwise_midpoint_fallback(u)
    out = np.where(inside[:, None], 0.0, fallback)
    return out


def _mog3_p3(u: np.ndarray, delta: float) -> np.ndarray:
    """k = 3 objectives in 3-space."""
    u = _lexsorted(u)
    a = u[:, 1] - u[:, 0]
    b = u[:, 2] - u[:, 0]
    aa = np.einsum("np,np->n", a, a)
    ab = np.einsum("np,np->n", a, b)
    bb = np.einsum("np,np->n", b, b)
    det = aa * bb - ab * ab
    ok = det > 1e-14
    safe_det = np.where(ok, det, 1.0)
    ra = -np.einsum("np,np->n", u[:, 0], a)
    rb = -np.einsum("np,np->n", u[:, 0], b)
    s = (ra * bb - rb * ab) / safe_det
    t = (aa * rb - ab * ra) / safe_det
    inside = ok & (s >= -delta) & (t >= -delta) & (1.0 - s - t >= -delta)
    proj = u[:, 0] + s[:, None] * a + t[:, None] * b
    fallback = _pairwise_midpoint_fallback(u)
    return np.where(inside[:, None], proj, fallback)


def mog_from_units(units: np.ndarray, degenerate: np.ndarray,
                   delta: float = DELTA_HULL) -> np.ndarray:
    """Batched MOG vectors from normalized gradients (n, k, p)."""
    n, k, p = units.shape
    if k == 2:
        out = 0.5 * (units[:, 0] + units[:, 1])
    elif k == 3 and p == 2:
        out = _mog3_p2(units, delta)
    elif k == 3 and p == 3:
        out = _mog3_p3(units, delta)
    else:
        raise ValueError(f"unsupported objective/dimension combination k={k}, p={p}")
    out = np.where(degenerate[:, None], 0.0, out)
    return out


def mog_2(u1, u2) -> MOGResult:
    """Bi-objective MOG of two unit vectors."""
    u = np.stack([np.asarray(u1, dtype=np.float64), np.asarray(u2, dtype=np.float64)])[None]
    vec = mog_from_units(u, np.zeros(1, dtype=bool))[0]
    return _result(vec)


def mog_3_2d(u1, u2, u3, delta: float = DELTA_HULL) -> MOGResult:
    """Tri-objective MOG for planar problems."""
    u = np.stack([np.asarray(v, dtype=np.float64) for v in (u1, u2, u3)])[None]
    vec = mog_from_units(u, np.zeros(1, dtype=bool), delta)[0]
    return _result(vec)


def mog_3_3d(u1, u2, u3, delta: float = DELTA_HULL) -> MOGResult:
    """Tri-objective MOG for three-dimensional problems."""
    u = np.stack([np.asarray(v, dtype=np.float64) for v in (u1, u2, u3)])[None]
    vec = mog_from_units(u, np.zeros(1, dtype=bool), delta)[0]
    return _result(vec)


def project_onto_box(vector: np.ndarray, x: np.ndarray,
                     lower: np.ndarray, upper: np.ndarray) -> np.ndarray:
    """Zero MOG components whose descent direction would leave an active bound.

    The descent direction is -MOG, so at an active lower bound a positive
    component is clipped, at an active upper bound a negative one.
    """
    out = np.array(vector, dtype=np.float64, copy=True)
    at_lower = x <= lower
    at_upper = x >= upper
    out[at_lower & (out > 0)] = 0.0
    out[at_upper & (out < 0)] = 0.0
    return out


def mog(problem, x, eps_zero: float = EPS_ZERO, delta: float = DELTA_HULL) -> MOGResult:
    """MOG of a problem at a feasible point, with box-boundary projection."""
    x = np.asarray(x, dtype=np.float64)
    grads = problem.gradients(x)
    units, degenerate = normalize_gradients(grads, eps_zero)
    vec = mog_from_units(units[None], np.array([degenerate]), delta)[0]
    if np.any(x <= problem.lower) or np.any(x >= problem.upper):
        vec = project_onto_box(vec, x, problem.lower, problem.upper)
    return _result(vec, bool(degenerate))

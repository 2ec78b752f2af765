"""Benchmark multi-objective problems with analytic objectives and gradients.

Every problem is box-constrained, minimizes k objectives over p decision
variables (p, k in {2, 3}), and is fully determined by a ProblemSpec: the
same spec always reproduces bitwise-identical evaluations. Evaluators are
vectorized: they accept a single point of shape (p,) or a batch (n, p).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

FAMILIES = ("bisphere", "dtlz2", "peaks", "trisphere", "zdt")


class DomainError(ValueError):
    """A point lies outside the feasible box."""


class UnknownProblemError(ValueError):
    """Requested problem id or family does not exist."""


class InvalidSpecError(ValueError):
    """Spec parameters are not valid for the requested family."""


@dataclass(frozen=True)
class Problem:
    """A concrete multi-objective problem over a feasible box [lower, upper].

    ``evaluate`` maps points to objective vectors of length k, ``gradients``
    to the k single-objective gradients (shape (k, p), batched (n, k, p)).
    Both raise DomainError for points outside the box. Instances are
    immutable and safe to share across threads.
    """

    id: str
    p: int
    k: int
    lower: np.ndarray
    upper: np.ndarray
    params: dict
    _evaluate: Callable[[np.ndarray], np.ndarray]
    _gradients: Callable[[np.ndarray], np.ndarray] | None = None

    def _check(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        if x.shape[-1] != self.p:
            raise DomainError(f"expected points with {self.p} coordinates, got shape {x.shape}")
        flat = x.reshape(-1, self.p)
        bad = np.any(flat < self.lower, axis=1) | np.any(flat > self.upper, axis=1)
        if np.any(bad):
            i = int(np.argmax(bad))
            raise DomainError(f"point {flat[i].tolist()} (index {i}) outside box "
                              f"[{self.lower.tolist()}, {self.upper.tolist()}]")
        return x

    def evaluate(self, x) -> np.ndarray:
        """Objective vector(s) at x: shape (k,) for a point, (n, k) for a batch."""
        x = self._check(x)
        single = x.ndim == 1
        values = self._evaluate(x.reshape(-1, self.p))
        return values[0] if single else values

    def gradients(self, x) -> np.ndarray:
        """Single-objective gradients at x: shape (k, p), batched (n, k, p).

        Analytic where the family defines them, otherwise central finite
        differences with per-axis step 1e-6 * (upper - lower), one-sided at
        the box boundary.
        """
        x = self._check(x)
        single = x.ndim == 1
        pts = x.reshape(-1, self.p)
        if self._gradients is not None:
            grads = self._gradients(pts)
        else:
            grads = _finite_difference_gradients(self, pts)
        return grads[0] if single else grads


@dataclass(frozen=True)
class ProblemSpec:
    """Serializable description that fully determines a Problem."""

    family: str
    p: int
    k: int
    params: dict = field(default_factory=dict)

    def canonical_json(self) -> str:
        """Canonical serialization: sorted keys, no whitespace. Used as cache key."""
        obj = {"family": self.family, "k": self.k, "p": self.p,
               "params": _plain(self.params)}
        return json.dumps(obj, sort_keys=True, separators=(",", ":"))

    @staticmethod
    def from_dict(obj: dict) -> "ProblemSpec":
        try:
            return ProblemSpec(family=str(obj["family"]), p=int(obj["p"]),
                               k=int(obj["k"]), params=dict(obj.get("params", {})))
        except (KeyError, TypeError, ValueError) as exc:
            raise InvalidSpecError(f"malformed problem spec: {exc}") from exc


def _plain(value):
    """Recursively convert numpy scalars/arrays to plain JSON-friendly types."""
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple, np.ndarray)):
        return [_plain(v) for v in np.asarray(value).tolist()] \
            if isinstance(value, np.ndarray) else [_plain(v) for v in value]
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.floating,)):
        return float(value)
    return value


def _finite_difference_gradients(problem: Problem, pts: np.ndarray) -> np.ndarray:
    """Central differences, one-sided where the stencil would leave the box."""
    n = pts.shape[0]
    grads = np.empty((n, problem.k, problem.p))
    h = 1e-6 * (problem.upper - problem.lower)
    for i in range(problem.p):
        hi = np.minimum(pts[:, i] + h[i], problem.upper[i])
        lo = np.maximum(pts[:, i] - h[i], problem.lower[i])
        up = pts.copy()
        up[:, i] = hi
        dn = pts.copy()
        dn[:, i] = lo
        df = problem._evaluate(up) - problem._evaluate(dn)
        grads[:, :, i] = df / (hi - lo)[:, None]
    return grads


# ---------------------------------------------------------------------------
# Seeded generator used by the "peaks" family.
# ---------------------------------------------------------------------------

_MASK64 = (1 << 64) - 1


def _splitmix64(seed: int):
    """SplitMix64 stream: a tiny, well-known, fully deterministic PRNG."""
    state = seed & _MASK64
    while True:
        state = (state + 0x9E3779B97F4A7C15) & _MASK64
        z = state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        yield z ^ (z >> 31)


def _uniform(stream, lo: float, hi: float) -> float:
    return lo + (hi - lo) * ((next(stream) >> 11) * 2.0**-53)


# ---------------------------------------------------------------------------
# Families
# ---------------------------------------------------------------------------

def _sphere_family(centers: np.ndarray):
    """k spheres: f_j(x) = ||x - c_j||^2, grad_j = 2 (x - c_j)."""

    def evaluate(x: np.ndarray) -> np.ndarray:
        d = x[:, None, :] - centers[None, :, :]
        return np.einsum("nkp,nkp->nk", d, d)

    def gradients(x: np.ndarray) -> np.ndarray:
        return 2.0 * (x[:, None, :] - centers[None, :, :])

    return evaluate, gradients


def _build_bisphere(spec: ProblemSpec) -> Problem:
    if spec.p != 2 or spec.k != 2:
        raise InvalidSpecError("bisphere requires p=2, k=2")
    params = {"a": [-1.0, 0.0], "b": [1.0, 0.0], **spec.params}
    a = np.asarray(params["a"], dtype=np.float64)
    b = np.asarray(params["b"], dtype=np.float64)
    if a.shape != (2,) or b.shape != (2,):
        raise InvalidSpecError("bisphere centers must be 2-vectors")
    lower = np.full(2, -2.0)
    upper = np.full(2, 2.0)
    for c in (a, b):
        if np.any(c < lower) or np.any(c > upper):
            raise InvalidSpecError("bisphere centers must lie inside the box [-2, 2]^2")
    evaluate, gradients = _sphere_family(np.stack([a, b]))
    return Problem("bisphere-2d", 2, 2, lower, upper,
                   {"a": a.tolist(), "b": b.tolist()}, evaluate, gradients)


def _build_trisphere(spec: ProblemSpec) -> Problem:
    if spec.p != 3 or spec.k != 3:
        raise InvalidSpecError("trisphere requires p=3, k=3")
    params = {"a": [-1.0, -1.0, 0.0], "b": [1.0, -1.0, 0.0], "c": [0.0, 1.0, 0.0],
              **spec.params}
    centers = np.stack([np.asarray(params[n], dtype=np.float64) for n in ("a", "b", "c")])
    if centers.shape != (3, 3):
        raise InvalidSpecError("trisphere centers must be 3-vectors")
    lower = np.full(3, -2.0)
    upper = np.full(3, 2.0)
    if np.any(centers < lower) or np.any(centers > upper):
        raise InvalidSpecError("trisphere centers must lie inside the box [-2, 2]^3")
    evaluate, gradients = _sphere_family(centers)
    return Problem("trisphere-3d", 3, 3, lower, upper,
                   {n: centers[i].tolist() for i, n in enumerate(("a", "b", "c"))},
                   evaluate, gradients)


def _build_peaks(spec: ProblemSpec) -> Problem:
    """Multimodal generator: each objective is the lower envelope of seeded
    anisotropic quadratic bowls, f_j(x) = min_m (x-c_m)^T D_m (x-c_m) / h_m.

    Peak centers, orientations, curvatures and scales are drawn from a
    SplitMix64 stream per objective, so a (seed, n_peaks) pair is fully
    reproducible. At an envelope switch, gradients use the active (smaller)
    branch; exact ties resolve to the lower peak index.
    """
    if spec.p != 2 or spec.k != 2:
        raise InvalidSpecError("peaks requires p=2, k=2")
    params = {"n_peaks": 3, "seeds": [4, 8], **spec.params}
    n_peaks = int(params["n_peaks"])
    seeds = [int(s) for s in params["seeds"]]
    if n_peaks < 1 or n_peaks > 16:
        raise InvalidSpecError("peaks requires 1 <= n_peaks <= 16")
    if len(seeds) != 2:
        raise InvalidSpecError("peaks requires one seed per objective")

    lower = np.zeros(2)
    upper = np.ones(2)
    centers = np.empty((2, n_peaks, 2))
    shapes = np.empty((2, n_peaks, 2, 2))
    scales = np.empty((2, n_peaks))
    for j, seed in enumerate(seeds):
        stream = _splitmix64(seed)
        for m in range(n_peaks):
            centers[j, m] = [_uniform(stream, 0.15, 0.85), _uniform(stream, 0.15, 0.85)]
            theta = _uniform(stream, 0.0, math.pi)
            e1 = _uniform(stream, 0.4, 4.0)
            e2 = _uniform(stream, 0.4, 4.0)
            rot = np.array([[math.cos(theta), -math.sin(theta)],
                            [math.sin(theta), math.cos(theta)]])
            shapes[j, m] = rot @ np.diag([e1, e2]) @ rot.T
            scales[j, m] = _uniform(stream, 0.5, 2.0)

    def evaluate(x: np.ndarray) -> np.ndarray:
        out = np.empty((x.shape[0], 2))
        for j in range(2):
            d = x[:, None, :] - centers[j][None, :, :]
            q = np.einsum("nmi,mij,nmj->nm", d, shapes[j], d) / scales[j][None, :]
            out[:, j] = q.min(axis=1)
        return out

    def gradients(x: np.ndarray) -> np.ndarray:
        out = np.empty((x.shape[0], 2, 2))
        for j in range(2):
            d = x[:, None, :] - centers[j][None, :, :]
            q = np.einsum("nmi,mij,nmj->nm", d, shapes[j], d) / scales[j][None, :]
            active = q.argmin(axis=1)
            da = np.take_along_axis(d, active[:, None, None], axis=1)[:, 0, :]
            ga = 2.0 * np.einsum("nij,nj->ni", shapes[j][active], da)
            out[:, j, :] = ga / scales[j][active][:, None]
        return out

    return Problem("peaks-2d", 2, 2, lower, upper,
                   {"n_peaks": n_peaks, "seeds": seeds}, evaluate, gradients)


def _build_zdt(spec: ProblemSpec) -> Problem:
    """ZDT1-3 restricted to p=2 so the landscape is drawable; g = 1 + 9 x2.

    The sqrt term of variants 1 and 3 has a singular df2/dx1 at x1 = 0; the
    gradient clamps x1 to 1e-12 there so it stays finite on the whole box.
    """
    if spec.p != 2 or spec.k != 2:
        raise InvalidSpecError("zdt requires p=2, k=2")
    params = {"variant": 1, **spec.params}
    variant = int(params["variant"])
    if variant not in (1, 2, 3):
        raise InvalidSpecError("zdt variant must be 1, 2 or 3")

    def evaluate(x: np.ndarray) -> np.ndarray:
        x1, x2 = x[:, 0], x[:, 1]
        g = 1.0 + 9.0 * x2
        if variant == 1:
            f2 = g - np.sqrt(x1 * g)
        elif variant == 2:
            f2 = g - x1**2 / g
        else:
            f2 = g - np.sqrt(x1 * g) - x1 * np.sin(10.0 * math.pi * x1)
        return np.stack([x1, f2], axis=1)

    def gradients(x: np.ndarray) -> np.ndarray:
        x1, x2 = x[:, 0], x[:, 1]
        g = 1.0 + 9.0 * x2
        x1s = np.maximum(x1, 1e-12)
        out = np.zeros((x.shape[0], 2, 2))
        out[:, 0, 0] = 1.0
        if variant == 1:
            out[:, 1, 0] = -np.sqrt(g) / (2.0 * np.sqrt(x1s))
            out[:, 1, 1] = 9.0 * (1.0 - 0.5 * np.sqrt(x1s / g))
        elif variant == 2:
            out[:, 1, 0] = -2.0 * x1 / g
            out[:, 1, 1] = 9.0 * (1.0 + (x1 / g) ** 2)
        else:
            w = 10.0 * math.pi * x1
            out[:, 1, 0] = (-np.sqrt(g) / (2.0 * np.sqrt(x1s))
                            - np.sin(w) - w * np.cos(w))
            out[:, 1, 1] = 9.0 * (1.0 - 0.5 * np.sqrt(x1s / g))
        return out

    return Problem(f"zdt{variant}-2d", 2, 2, np.zeros(2), np.ones(2),
                   {"variant": variant}, evaluate, gradients)


def _build_dtlz2(spec: ProblemSpec) -> Problem:
    """DTLZ2 with p=3, k=3: the efficient set is the x3 = 0.5 plane, a proper
    2-manifold in the 3D decision space."""
    if spec.p != 3 or spec.k != 3:
        raise InvalidSpecError("dtlz2 requires p=3, k=3")

    half_pi = math.pi / 2.0

    def evaluate(x: np.ndarray) -> np.ndarray:
        g = (x[:, 2] - 0.5) ** 2
        c1, s1 = np.cos(half_pi * x[:, 0]), np.sin(half_pi * x[:, 0])
        c2, s2 = np.cos(half_pi * x[:, 1]), np.sin(half_pi * x[:, 1])
        return np.stack([(1 + g) * c1 * c2, (1 + g) * c1 * s2, (1 + g) * s1], axis=1)

    def gradients(x: np.ndarray) -> np.ndarray:
        g = (x[:, 2] - 0.5) ** 2
        dg = 2.0 * (x[:, 2] - 0.5)
        c1, s1 = np.cos(half_pi * x[:, 0]), np.sin(half_pi * x[:, 0])
        c2, s2 = np.cos(half_pi * x[:, 1]), np.sin(half_pi * x[:, 1])
        out = np.empty((x.shape[0], 3, 3))
        out[:, 0, 0] = -(1 + g) * half_pi * s1 * c2
        out[:, 0, 1] = -(1 + g) * half_pi * c1 * s2
        out[:, 0, 2] = dg * c1 * c2
        out[:, 1, 0] = -(1 + g) * half_pi * s1 * s2
        out[:, 1, 1] = (1 + g) * half_pi * c1 * c2
        out[:, 1, 2] = dg * c1 * s2
        out[:, 2, 0] = (1 + g) * half_pi * c1
        out[:, 2, 1] = 0.0
        out[:, 2, 2] = dg * s1
        return out

    return Problem("dtlz2-3d", 3, 3, np.zeros(3), np.ones(3), {}, evaluate, gradients)


_BUILDERS = {
    "bisphere": _build_bisphere,
    "trisphere": _build_trisphere,
    "peaks": _build_peaks,
    "zdt": _build_zdt,
    "dtlz2": _build_dtlz2,
}


def instantiate(spec: ProblemSpec) -> Problem:
    """Build the Problem a spec describes; deterministic per spec."""
    builder = _BUILDERS.get(spec.family)
    if builder is None:
        raise UnknownProblemError(
            f"unknown family {spec.family!r}; valid: {sorted(_BUILDERS)}")
    return builder(spec)


# ---------------------------------------------------------------------------
# Catalog
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CatalogEntry:
    id: str
    family: str
    p: int
    k: int
    schema: tuple
    defaults: dict

    def spec(self, params: dict | None = None) -> ProblemSpec:
        merged = dict(self.defaults)
        merged.update(params or {})
        return ProblemSpec(self.family, self.p, self.k, merged)


def _vec(name, length, default, lo, hi, doc):
    return {"name": name, "type": "vector", "length": length,
            "default": list(default), "min": lo, "max": hi, "doc": doc}


def _num(name, default, lo, hi, doc, kind="int"):
    return {"name": name, "type": kind, "default": default,
            "min": lo, "max": hi, "doc": doc}


_CATALOG = [
    CatalogEntry("bisphere-2d", "bisphere", 2, 2,
                 (_vec("a", 2, (-1.0, 0.0), -2.0, 2.0, "center of objective 1"),
                  _vec("b", 2, (1.0, 0.0), -2.0, 2.0, "center of objective 2")),
                 {"a": [-1.0, 0.0], "b": [1.0, 0.0]}),
    CatalogEntry("dtlz2-3d", "dtlz2", 3, 3, (), {}),
    CatalogEntry("peaks-2d", "peaks", 2, 2,
                 (_num("n_peaks", 3, 1, 16, "quadratic bowls per objective"),
                  _vec("seeds", 2, (4, 8), 0, 2**32, "per-objective generator seeds")),
                 {"n_peaks": 3, "seeds": [4, 8]}),
    CatalogEntry("trisphere-3d", "trisphere", 3, 3,
                 (_vec("a", 3, (-1.0, -1.0, 0.0), -2.0, 2.0, "center of objective 1"),
                  _vec("b", 3, (1.0, -1.0, 0.0), -2.0, 2.0, "center of objective 2"),
                  _vec("c", 3, (0.0, 1.0, 0.0), -2.0, 2.0, "center of objective 3")),
                 {"a": [-1.0, -1.0, 0.0], "b": [1.0, -1.0, 0.0], "c": [0.0, 1.0, 0.0]}),
    CatalogEntry("zdt1-2d", "zdt", 2, 2,
                 (_num("variant", 1, 1, 3, "ZDT variant"),), {"variant": 1}),
    CatalogEntry("zdt2-2d", "zdt", 2, 2,
                 (_num("variant", 2, 1, 3, "ZDT variant"),), {"variant": 2}),
    CatalogEntry("zdt3-2d", "zdt", 2, 2,
                 (_num("variant", 3, 1, 3, "ZDT variant"),), {"variant": 3}),
]


def list_problems() -> list[CatalogEntry]:
    """Stable, id-sorted catalog of available problems."""
    return sorted(_CATALOG, key=lambda e: e.id)


def by_id(problem_id: str) -> CatalogEntry:
    for entry in _CATALOG:
        if entry.id == problem_id:
            return entry
    raise UnknownProblemError(
        f"unknown problem {problem_id!r}; valid ids: {[e.id for e in list_problems()]}")

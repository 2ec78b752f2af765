"""Color mapping, PPM image export, field serialization and objective views.

Field files are a small binary format:

    magic "MOPF" | version u8 (=1) | p u8 | k u8 | resolution p x u32 LE |
    bounds lower then upper, 2p x f64 LE | payload kind u8 | payload f64 LE

Payload kinds: 1 scalar (one value per cell), 2 vector (p values per cell),
3 objective (k values per cell); cells in linear-index order. The k header
byte is 0 for scalar and vector payloads. Round trips are bitwise exact.

Images are binary PPM (P6), written with the plot orientation: the top row
is the largest x2 coordinate.
"""

from __future__ import annotations

import enum
import struct

import numpy as np

from .efficient_sets import PlotData
from .fields import Grid, ObjectiveField, ScalarField, VectorField

_MAGIC = b"MOPF"
_VERSION = 1


class FieldFormatError(ValueError):
    """Field file is malformed: bad magic, version or truncated payload."""


class ColorScale(enum.Enum):
    HEAT = "heat"  # blue -> yellow -> red
    GRAY = "gray"  # black -> white


def normalize_log(heights: ScalarField | np.ndarray) -> np.ndarray:
    """Map heights to t in [0, 1] on a log scale; constant fields map to 0.

    Uses log(1 + h) so heatmap heights of exactly 0 stay finite; cost
    landscape heights (>= 1) keep their ordering unchanged.
    """
    h = heights.values if isinstance(heights, ScalarField) else np.asarray(heights)
    if np.any(h < 0):
        raise ValueError("heights must be nonnegative")
    lo = np.log1p(h.min())
    hi = np.log1p(h.max())
    if hi == lo:
        return np.zeros_like(h, dtype=np.float64)
    return (np.log1p(h) - lo) / (hi - lo)


def apply_colorscale(t, scale: ColorScale) -> np.ndarray:
    """Map t in [0, 1] (clamped) to RGB bytes; round-half-up per channel."""
    t = np.clip(np.asarray(t, dtype=np.float64), 0.0, 1.0)
    rgb = np.empty(t.shape + (3,), dtype=np.float64)
    if scale is ColorScale.GRAY:
        rgb[...] = (255.0 * t)[..., None]
    else:
        low = t <= 0.5
        s = np.where(low, 2.0 * t, 2.0 * (t - 0.5))
        rgb[..., 0] = np.where(low, 255.0 * s, 255.0)
        rgb[..., 1] = np.where(low, 255.0 * s, 255.0 * (1.0 - s))
        rgb[..., 2] = np.where(low, 255.0 * (1.0 - s), 0.0)
    return np.floor(rgb + 0.5).astype(np.uint8)


def rank_colors(ranks: np.ndarray) -> np.ndarray:
    """Heat colors for dominance ranks (rank 1 blue, worst red, log scale)."""
    ranks = np.asarray(ranks, dtype=np.float64)
    if len(ranks) == 0:
        return np.zeros((0, 3), dtype=np.uint8)
    return apply_colorscale(normalize_log(ranks - 1.0), ColorScale.HEAT)


def field_rgb(field2d: ScalarField, scale: ColorScale) -> np.ndarray:
    """Per-cell colors of a 2D scalar field, shape (n, 3)."""
    return apply_colorscale(normalize_log(field2d), scale)


def plot_rgb(plot: PlotData) -> np.ndarray:
    """Per-cell PLOT colors: gray background, efficient cells heat by rank."""
    rgb = field_rgb(plot.background, ColorScale.GRAY)
    rgb[plot.efficient_cells] = rank_colors(plot.ranks)
    return rgb


def _pixels(grid: Grid, rgb: np.ndarray) -> np.ndarray:
    n1, n2 = grid.resolution
    return rgb.reshape(n2, n1, 3)[::-1]  # top row = largest x2


def write_image(data, scale: ColorScale, path) -> None:
    """Write a 2D scalar field or PlotData view as a binary PPM (P6)."""
    if isinstance(data, PlotData):
        grid = data.background.grid
        rgb = plot_rgb(data)
    elif isinstance(data, ScalarField):
        grid = data.grid
        rgb = field_rgb(data, scale)
    else:
        raise TypeError(f"cannot render {type(data).__name__}")
    if grid.p != 2:
        raise ValueError("images are 2D; slice 3D fields first")
    n1, n2 = grid.resolution
    with open(path, "wb") as fh:
        fh.write(f"P6\n{n1} {n2}\n255\n".encode("ascii"))
        fh.write(_pixels(grid, rgb).tobytes())


_KINDS = {ScalarField: 1, VectorField: 2, ObjectiveField: 3}


def write_field(field, path) -> None:
    """Serialize a field in the MOPF binary format."""
    kind = _KINDS.get(type(field))
    if kind is None:
        raise TypeError(f"cannot serialize {type(field).__name__}")
    grid = field.grid
    k = field.k if isinstance(field, ObjectiveField) else 0
    header = _MAGIC + struct.pack("<BBB", _VERSION, grid.p, k)
    header += struct.pack(f"<{grid.p}I", *grid.resolution)
    header += struct.pack(f"<{2 * grid.p}d", *grid.lower.tolist(), *grid.upper.tolist())
    header += struct.pack("<B", kind)
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(field.values.astype("<f8", copy=False).tobytes())


def read_field(path):
    """Read a MOPF field file back into the matching field type."""
    with open(path, "rb") as fh:
        raw = fh.read()
    if len(raw) < 7 or raw[:4] != _MAGIC:
        raise FieldFormatError("not a MOPF field file (bad magic)")
    version, p, k = struct.unpack_from("<BBB", raw, 4)
    if version != _VERSION:
        raise FieldFormatError(f"unsupported field file version {version}")
    if p not in (2, 3):
        raise FieldFormatError(f"unsupported dimension {p}")
    off = 7
    if len(raw) < off + 4 * p + 16 * p + 1:
        raise FieldFormatError("truncated field file header")
    resolution = struct.unpack_from(f"<{p}I", raw, off)
    off += 4 * p
    bounds = struct.unpack_from(f"<{2 * p}d", raw, off)
    off += 16 * p
    kind = raw[off]
    off += 1
    grid = Grid(np.asarray(bounds[:p]), np.asarray(bounds[p:]), tuple(map(int, resolution)))
    per_cell = {1: 1, 2: p, 3: k}.get(kind)
    if per_cell is None or (kind == 3 and k < 2):
        raise FieldFormatError(f"unknown payload kind {kind}")
    expected = grid.n_cells * per_cell * 8
    if len(raw) - off != expected:
        raise FieldFormatError(
            f"truncated field file: payload has {len(raw) - off} bytes, expected {expected}")
    values = np.frombuffer(raw, dtype="<f8", offset=off).astype(np.float64)
    if kind == 1:
        return ScalarField(grid, values)
    if kind == 2:
        return VectorField(grid, values.reshape(-1, p))
    return ObjectiveField(grid, values.reshape(-1, k))


def objective_space_view(objectives: ObjectiveField, rgb: np.ndarray):
    """One colored point per cell in objective space: (values (n, k), rgb)."""
    rgb = np.asarray(rgb, dtype=np.uint8)
    if rgb.shape != (objectives.grid.n_cells, 3):
        raise ValueError("need one RGB triple per grid cell")
    return objectives.values, rgb


def plot_objective_view(objectives: ObjectiveField, plot: PlotData):
    """Objective-space PLOT: colors bijective with the decision-space view."""
    return objective_space_view(objectives, plot_rgb(plot))

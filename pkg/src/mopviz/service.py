"""HTTP API exposing the catalog and the compute pipeline to the dashboard.

Jobs are asynchronous: POST /api/compute returns a dataset id (the content
hash of the canonical request) immediately and computation runs on a worker
thread; the dashboard polls GET /api/jobs/{id}. Identical requests map to
the same id and are served from an in-memory LRU cache (optional disk spill
via the MOPLOT_CACHE_DIR environment variable, using the field file format).

Payload arrays travel as base64-encoded little-endian raw bytes (float64 for
values and positions, uint8 for RGB), so served bytes are exactly the
computed ones.
"""

from __future__ import annotations

import base64
import hashlib
import json
import logging
import os
import threading
from collections import OrderedDict
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from fastapi import FastAPI, HTTPException, Query, Response
from pydantic import BaseModel, Field

from . import export as ex
from .dominance import cost_landscape
from .efficient_sets import PlotData, efficient_cells, plot_data
from .fields import (DEFAULT_RESOLUTION, Grid, ObjectiveField,
                     ResolutionError, ScalarField, evaluate_field, make_grid)
from .heatmap import HeatmapResult, gradient_field_heatmap
from .problems import (InvalidSpecError, ProblemSpec, UnknownProblemError,
                       instantiate, list_problems)
from .volume import slice_field, slice_indices, threshold_range

logger = logging.getLogger(__name__)

METHODS = ("cost", "heatmap", "plot")
COST_GUARD_CELLS = 100_000
CACHE_CAP_BYTES = 2 << 30


class SpecModel(BaseModel):
    family: str
    p: int
    k: int
    params: dict = Field(default_factory=dict)


class ComputeRequest(BaseModel):
    spec: SpecModel
    resolution: list[int] | None = None
    methods: list[str] = Field(default_factory=lambda: ["heatmap", "plot"])
    force: bool = False


@dataclass
class Dataset:
    request_json: str
    problem: object
    grid: Grid
    objectives: ObjectiveField
    mog_lengths: ScalarField
    heatmap: HeatmapResult | None
    plot: PlotData | None
    cost: ScalarField | None
    methods: tuple

    @property
    def nbytes(self) -> int:
        total = self.objectives.values.nbytes + self.mog_lengths.values.nbytes
        if self.heatmap is not None:
            total += self.heatmap.heights.values.nbytes + self.heatmap.terminal.nbytes
        if self.plot is not None:
            total += self.plot.background.values.nbytes + self.plot.efficient_cells.nbytes
            total += self.plot.ranks.nbytes
        if self.cost is not None:
            total += self.cost.values.nbytes
        return total


@dataclass
class Job:
    dataset_id: str
    request: ComputeRequest
    status: str = "pending"  # pending | ready | failed
    error: str | None = None


def canonical_request(req: ComputeRequest, resolution: tuple) -> str:
    spec = ProblemSpec(req.spec.family, req.spec.p, req.spec.k, req.spec.params)
    obj = {
        "force": bool(req.force),
        "methods": sorted(set(req.methods)),
        "resolution": list(resolution),
        "spec": json.loads(spec.canonical_json()),
    }
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def dataset_id_for(request_json: str) -> str:
    return hashlib.sha256(request_json.encode("ascii")).hexdigest()[:32]


def compute_dataset(req: ComputeRequest, request_json: str) -> Dataset:
    spec = ProblemSpec(req.spec.family, req.spec.p, req.spec.k, req.spec.params)
    problem = instantiate(spec)
    resolution = req.resolution or DEFAULT_RESOLUTION[problem.p]
    grid = make_grid(problem, resolution)
    methods = tuple(sorted(set(req.methods)))
    bundle = evaluate_field(problem, grid)
    heatmap = None
    plot = None
    cost = None
    if "heatmap" in methods or "plot" in methods:
        heatmap = gradient_field_heatmap(bundle.mog)
    if "plot" in methods:
        plot = plot_data(heatmap, efficient_cells(bundle), bundle.objectives)
    if "cost" in methods:
        cost = cost_landscape(bundle.objectives)
    return Dataset(request_json, problem, grid, bundle.objectives,
                   bundle.mog_length, heatmap, plot, cost, methods)


class JobManager:
    """Deduplicating compute queue plus a byte-capped LRU result cache."""

    def __init__(self, workers: int = 2, cache_cap: int = CACHE_CAP_BYTES,
                 cache_dir: str | None = None):
        self._executor = ThreadPoolExecutor(max_workers=workers)
        self._lock = threading.Lock()
        self._jobs: dict[str, Job] = {}
        self._cache: OrderedDict[str, Dataset] = OrderedDict()
        self._cache_cap = cache_cap
        self._cache_dir = cache_dir or os.environ.get("MOPLOT_CACHE_DIR")
        self.compute_calls = 0  # observable for the cache contract

    # -- request intake ----------------------------------------------------

    def submit(self, req: ComputeRequest) -> Job:
        problem, resolution = self.validate(req)
        request_json = canonical_request(req, resolution)
        dataset_id = dataset_id_for(request_json)
        with self._lock:
            job = self._jobs.get(dataset_id)
            if job is not None and (job.status == "pending" or
                                    (job.status == "ready" and self._has_result(dataset_id))):
                return job
            job = Job(dataset_id, req)
            self._jobs[dataset_id] = job
        self._executor.submit(self._run, job, request_json)
        return job

    def validate(self, req: ComputeRequest):
        try:
            spec = ProblemSpec(req.spec.family, req.spec.p, req.spec.k, req.spec.params)
            problem = instantiate(spec)
        except (UnknownProblemError, InvalidSpecError, ValueError) as exc:
            raise HTTPException(400, f"invalid problem spec: {exc}") from exc
        bad = set(req.methods) - set(METHODS)
        if bad or not req.methods:
            raise HTTPException(400, f"methods must be a nonempty subset of {METHODS}")
        resolution = tuple(req.resolution or DEFAULT_RESOLUTION[problem.p])
        try:
            grid = make_grid(problem, resolution)
        except ResolutionError as exc:
            if "maximum" in str(exc):
                raise HTTPException(413, str(exc)) from exc
            raise HTTPException(400, str(exc)) from exc
        if ("cost" in req.methods and problem.k == 3
                and grid.n_cells > COST_GUARD_CELLS and not req.force):
            raise HTTPException(
                409, f"cost landscapes over {COST_GUARD_CELLS} cells with k=3 are "
                     "quadratic; repeat the request with force=true")
        return problem, resolution

    def _run(self, job: Job, request_json: str) -> None:
        try:
            with self._lock:
                self.compute_calls += 1
            dataset = compute_dataset(job.request, request_json)
            self._store(job.dataset_id, dataset)
            job.status = "ready"
        except Exception as exc:  # surfaced through the job status
            logger.exception("compute failed for %s", job.dataset_id)
            job.error = str(exc)
            job.status = "failed"

    # -- cache -------------------------------------------------------------

    def _has_result(self, dataset_id: str) -> bool:
        if dataset_id in self._cache:
            return True
        return self._disk_path(dataset_id) is not None

    def _store(self, dataset_id: str, dataset: Dataset) -> None:
        with self._lock:
            self._cache[dataset_id] = dataset
            self._cache.move_to_end(dataset_id)
            total = sum(d.nbytes for d in self._cache.values())
            while total > self._cache_cap and len(self._cache) > 1:
                evicted_id, evicted = self._cache.popitem(last=False)
                total -= evicted.nbytes
                logger.info("evicted dataset %s (%d bytes)", evicted_id, evicted.nbytes)
        self._spill(dataset_id, dataset)

    def job(self, dataset_id: str) -> Job:
        job = self._jobs.get(dataset_id)
        if job is None:
            raise HTTPException(404, f"unknown dataset {dataset_id}")
        return job

    def dataset(self, dataset_id: str) -> Dataset:
        job = self.job(dataset_id)
        if job.status == "failed":
            raise HTTPException(409, f"dataset {dataset_id} failed: {job.error}")
        if job.status != "ready":
            raise HTTPException(409, f"dataset {dataset_id} is not ready")
        with self._lock:
            dataset = self._cache.get(dataset_id)
            if dataset is not None:
                self._cache.move_to_end(dataset_id)
                return dataset
        dataset = self._load_spill(dataset_id)
        if dataset is not None:
            with self._lock:
                self._cache[dataset_id] = dataset
            return dataset
        # evicted with no disk copy: recompute transparently
        job.status = "pending"
        request_json = canonical_request(job.request, tuple(
            job.request.resolution or DEFAULT_RESOLUTION[job.request.spec.p]))
        self._executor.submit(self._run, job, request_json)
        raise HTTPException(409, f"dataset {dataset_id} is being recomputed")

    # -- disk spill ----------------------------------------------------------

    def _disk_path(self, dataset_id: str) -> Path | None:
        if not self._cache_dir:
            return None
        path = Path(self._cache_dir) / dataset_id
        return path if (path / "meta.json").exists() else None

    def _spill(self, dataset_id: str, dataset: Dataset) -> None:
        if not self._cache_dir:
            return
        path = Path(self._cache_dir) / dataset_id
        path.mkdir(parents=True, exist_ok=True)
        ex.write_field(dataset.objectives, path / "objectives.mopf")
        ex.write_field(dataset.mog_lengths, path / "mog-length.mopf")
        meta = {"request": json.loads(dataset.request_json), "methods": list(dataset.methods)}
        if dataset.heatmap is not None:
            ex.write_field(dataset.heatmap.heights, path / "heatmap.mopf")
            meta["terminal"] = np.flatnonzero(dataset.heatmap.terminal).tolist()
        if dataset.cost is not None:
            ex.write_field(dataset.cost, path / "cost.mopf")
        if dataset.plot is not None:
            meta["plot"] = {"cells": dataset.plot.efficient_cells.tolist(),
                            "ranks": dataset.plot.ranks.tolist()}
        (path / "meta.json").write_text(json.dumps(meta))

    def _load_spill(self, dataset_id: str) -> Dataset | None:
        path = self._disk_path(dataset_id)
        if path is None:
            return None
        meta = json.loads((path / "meta.json").read_text())
        req = ComputeRequest.model_validate(meta["request"])
        problem = instantiate(ProblemSpec(req.spec.family, req.spec.p,
                                          req.spec.k, req.spec.params))
        objectives = ex.read_field(path / "objectives.mopf")
        lengths = ex.read_field(path / "mog-length.mopf")
        grid = objectives.grid
        heatmap = None
        if (path / "heatmap.mopf").exists():
            terminal = np.zeros(grid.n_cells, dtype=bool)
            terminal[np.asarray(meta.get("terminal", []), dtype=np.int64)] = True
            heatmap = HeatmapResult(ex.read_field(path / "heatmap.mopf"), terminal)
        cost = ex.read_field(path / "cost.mopf") if (path / "cost.mopf").exists() else None
        plot = None
        if "plot" in meta and heatmap is not None:
            plot = PlotData(heatmap.heights,
                            np.asarray(meta["plot"]["cells"], dtype=np.int64),
                            np.asarray(meta["plot"]["ranks"], dtype=np.int64))
        return Dataset(json.dumps(meta["request"], sort_keys=True, separators=(",", ":")),
                       problem, grid, objectives, lengths, heatmap, plot, cost,
                       tuple(meta["methods"]))


# ---------------------------------------------------------------------------
# HTTP layer
# ---------------------------------------------------------------------------

def _b64(array: np.ndarray, dtype: str) -> str:
    return base64.b64encode(np.ascontiguousarray(array).astype(dtype).tobytes()).decode("ascii")


def _scalar_payload(dataset: Dataset, heights: ScalarField, scale: ex.ColorScale,
                    axis: int | None, index: int | None, plot: PlotData | None = None):
    """Normalized t-values plus RGB for a 2D field or a slice of a 3D one."""
    grid = heights.grid
    t_all = ex.normalize_log(heights)
    if plot is not None:
        rgb_all = ex.apply_colorscale(t_all, ex.ColorScale.GRAY)
        rgb_all[plot.efficient_cells] = ex.rank_colors(plot.ranks)
    else:
        rgb_all = ex.apply_colorscale(t_all, scale)
    if grid.p == 2:
        n1, n2 = grid.resolution
        return {"p": 2, "width": n1, "height": n2,
                "t_b64": _b64(t_all, "<f8"), "rgb_b64": _b64(rgb_all, "u1")}
    if axis is None or index is None:
        raise HTTPException(400, "3D fields need axis and index query parameters")
    try:
        lin, grid2d = slice_indices(grid, axis, index)
    except (ValueError, IndexError) as exc:
        raise HTTPException(400, str(exc)) from exc
    n1, n2 = grid2d.resolution
    return {"p": 3, "axis": axis, "index": index,
            "plane_coord": float(grid.axis_centers(axis - 1)[index]),
            "width": n1, "height": n2,
            "t_b64": _b64(t_all[lin], "<f8"), "rgb_b64": _b64(rgb_all[lin], "u1")}


def _efficient_payload(dataset: Dataset):
    plot = dataset.plot
    positions = dataset.grid.centers(plot.efficient_cells)
    return {
        "cells": plot.efficient_cells.tolist(),
        "ranks": plot.ranks.tolist(),
        "positions_b64": _b64(positions, "<f8"),
        "rgb_b64": _b64(ex.rank_colors(plot.ranks), "u1"),
    }


def default_frontend_dir() -> Path | None:
    """Locate the built dashboard (checkout layout or MOPVIZ_FRONTEND)."""
    env = os.environ.get("MOPVIZ_FRONTEND")
    candidates = [Path(env)] if env else []
    candidates.append(Path(__file__).resolve().parents[2] / "frontend")
    for candidate in candidates:
        if (candidate / "index.html").exists():
            return candidate
    return None


def create_app(manager: JobManager | None = None,
               frontend_dir: Path | None = None) -> FastAPI:
    app = FastAPI(title="mopviz", version="0.1.0")
    app.state.manager = manager or JobManager()
    mgr: JobManager = app.state.manager

    @app.get("/api/problems")
    def problems():
        return [{
            "id": entry.id, "family": entry.family, "p": entry.p, "k": entry.k,
            "params": list(entry.schema), "defaults": entry.defaults,
            "default_resolution": list(DEFAULT_RESOLUTION[entry.p]),
        } for entry in list_problems()]

    @app.post("/api/compute")
    def compute(req: ComputeRequest):
        job = mgr.submit(req)
        return {"id": job.dataset_id, "status": job.status}

    @app.get("/api/jobs/{dataset_id}")
    def job_status(dataset_id: str):
        job = mgr.job(dataset_id)
        return {"id": job.dataset_id, "status": job.status, "error": job.error}

    @app.get("/api/data/{dataset_id}")
    def meta(dataset_id: str):
        ds = mgr.dataset(dataset_id)
        grid = ds.grid
        info = {
            "id": dataset_id, "p": grid.p, "k": ds.problem.k,
            "resolution": list(grid.resolution),
            "lower": grid.lower.tolist(), "upper": grid.upper.tolist(),
            "methods": list(ds.methods),
        }
        if ds.plot is not None:
            info["efficient"] = _efficient_payload(ds)
        if grid.p == 3 and ds.heatmap is not None:
            lo, hi = threshold_range(ds.heatmap.heights)
            info["onion"] = {"low": lo, "high": hi,
                            "max": float(ds.heatmap.heights.values.max())}
        return info

    @app.get("/api/data/{dataset_id}/heatmap")
    def heatmap_view(dataset_id: str, axis: int | None = None, index: int | None = None):
        ds = mgr.dataset(dataset_id)
        if ds.heatmap is None or "heatmap" not in ds.methods:
            raise HTTPException(404, "heatmap was not computed for this dataset")
        return _scalar_payload(ds, ds.heatmap.heights, ex.ColorScale.HEAT, axis, index)

    @app.get("/api/data/{dataset_id}/plot")
    def plot_view(dataset_id: str, axis: int | None = None, index: int | None = None):
        ds = mgr.dataset(dataset_id)
        if ds.plot is None:
            raise HTTPException(404, "plot was not computed for this dataset")
        payload = _scalar_payload(ds, ds.plot.background, ex.ColorScale.GRAY,
                                  axis, index, plot=ds.plot if ds.grid.p == 2 else None)
        payload["efficient"] = _efficient_payload(ds)
        return payload

    @app.get("/api/data/{dataset_id}/cost")
    def cost_view(dataset_id: str, axis: int | None = None, index: int | None = None):
        ds = mgr.dataset(dataset_id)
        if ds.cost is None:
            raise HTTPException(404, "cost landscape was not computed for this dataset")
        return _scalar_payload(ds, ds.cost, ex.ColorScale.HEAT, axis, index)

    @app.get("/api/data/{dataset_id}/onion")
    def onion_view(dataset_id: str, threshold: float = Query(...)):
        from .volume import onion_shell

        ds = mgr.dataset(dataset_id)
        if ds.grid.p != 3:
            raise HTTPException(400, "onion layers need a 3D dataset")
        if ds.heatmap is None:
            raise HTTPException(404, "heatmap was not computed for this dataset")
        if not np.isfinite(threshold):
            raise HTTPException(400, "threshold must be finite")
        shell = onion_shell(ds.heatmap.heights, threshold)
        return {"threshold": shell.threshold,
                "cells": shell.cells.tolist(),
                "positions_b64": _b64(ds.grid.centers(shell.cells), "<f8")}

    @app.get("/api/data/{dataset_id}/objective-space")
    def objective_view(dataset_id: str, source: str = "plot"):
        ds = mgr.dataset(dataset_id)
        if source == "plot" and ds.plot is not None:
            points, rgb = ex.plot_objective_view(ds.objectives, ds.plot)
        elif source == "heatmap" and ds.heatmap is not None:
            rgb = ex.field_rgb(ds.heatmap.heights, ex.ColorScale.HEAT)
            points, rgb = ex.objective_space_view(ds.objectives, rgb)
        elif source == "cost" and ds.cost is not None:
            rgb = ex.field_rgb(ds.cost, ex.ColorScale.HEAT)
            points, rgb = ex.objective_space_view(ds.objectives, rgb)
        else:
            raise HTTPException(404, f"source {source!r} was not computed")
        return {"k": ds.problem.k, "count": len(points),
                "points_b64": _b64(points, "<f8"), "rgb_b64": _b64(rgb, "u1")}

    @app.get("/api/data/{dataset_id}/export/{name}")
    def export_payload(dataset_id: str, name: str,
                       axis: int | None = None, index: int | None = None):
        import tempfile

        ds = mgr.dataset(dataset_id)
        if name.endswith(".mopf"):
            which = name[:-5]
            fields = {"objectives": ds.objectives, "mog-length": ds.mog_lengths}
            if ds.heatmap is not None:
                fields["heatmap"] = ds.heatmap.heights
            if ds.cost is not None:
                fields["cost"] = ds.cost
            if which not in fields:
                raise HTTPException(404, f"no exportable field {which!r}")
            with tempfile.NamedTemporaryFile(suffix=".mopf") as tmp:
                ex.write_field(fields[which], tmp.name)
                tmp.seek(0)
                data = tmp.read()
            return Response(data, media_type="application/octet-stream")
        if name.endswith(".ppm"):
            which = name[:-4]
            if which == "plot" and ds.plot is not None and ds.grid.p == 2:
                target, scale = ds.plot, ex.ColorScale.GRAY
            elif which == "heatmap" and ds.heatmap is not None:
                target, scale = ds.heatmap.heights, ex.ColorScale.HEAT
            elif which == "cost" and ds.cost is not None:
                target, scale = ds.cost, ex.ColorScale.HEAT
            else:
                raise HTTPException(404, f"no exportable image {which!r}")
            if isinstance(target, ScalarField) and target.grid.p == 3:
                if axis is None or index is None:
                    raise HTTPException(400, "3D exports need axis and index")
                try:
                    target = slice_field(target, axis, index).field2d
                except (ValueError, IndexError) as exc:
                    raise HTTPException(400, str(exc)) from exc
            with tempfile.NamedTemporaryFile(suffix=".ppm") as tmp:
                ex.write_image(target, scale, tmp.name)
                tmp.seek(0)
                data = tmp.read()
            return Response(data, media_type="image/x-portable-pixmap")
        raise HTTPException(404, f"unknown export {name!r}")

    static_dir = frontend_dir or default_frontend_dir()
    if static_dir is not None:
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=static_dir, html=True), name="dashboard")
    return app


def serve(port: int = 8080, host: str = "127.0.0.1") -> None:
    import uvicorn

    uvicorn.run(create_app(), host=host, port=port, log_level="warning")

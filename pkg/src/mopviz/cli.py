"""Batch interface: compute visualizations and export images/fields.

Examples:
    mopviz --problem bisphere-2d --method plot --resolution 200,200 --out /tmp/x
    mopviz --problem trisphere-3d --method heatmap --resolution 40,40,40 \
           --slice 3,20 --onion 0.5 --out /tmp/y
    mopviz --import /tmp/x/heatmap.mopf --method heatmap --out /tmp/z
    mopviz --serve 8080

Exit codes: 0 success, 1 usage error, 2 compute error, 3 I/O error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mopviz", description=__doc__,
        formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--problem", help="catalog id, e.g. bisphere-2d")
    parser.add_argument("--param", action="append", default=[], metavar="NAME=VALUE",
                        help="problem parameter override (JSON value), repeatable")
    parser.add_argument("--resolution", help="grid resolution n1,n2[,n3]")
    parser.add_argument("--method", action="append", choices=["heatmap", "plot", "cost"],
                        help="visualization to compute (repeatable); default heatmap+plot")
    parser.add_argument("--out", help="output directory")
    parser.add_argument("--slice", metavar="AXIS,INDEX",
                        help="slice plane for 3D image export")
    parser.add_argument("--onion", type=float, metavar="THRESHOLD",
                        help="write the onion shell cells at a height threshold (3D)")
    parser.add_argument("--import", dest="import_path", metavar="FIELD_FILE",
                        help="render from a pre-computed field file instead of evaluating")
    parser.add_argument("--serve", type=int, metavar="PORT",
                        help="run the HTTP service instead of a batch job")
    return parser


def _parse_params(pairs: list[str]) -> dict:
    params = {}
    for pair in pairs:
        if "=" not in pair:
            raise ValueError(f"--param expects NAME=VALUE, got {pair!r}")
        name, raw = pair.split("=", 1)
        try:
            params[name] = json.loads(raw)
        except json.JSONDecodeError:
            params[name] = raw
    return params


def _render_scalar(field, name: str, out: Path, scale, slice_arg: str | None):
    from . import export as ex
    from .volume import slice_field

    if field.grid.p == 3:
        if slice_arg is None:
            return  # nothing to render without a plane
        axis, index = (int(v) for v in slice_arg.split(","))
        field = slice_field(field, axis, index).field2d
    ex.write_image(field, scale, out / f"{name}.ppm")


def run(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)

    if args.serve is not None:
        from .service import serve

        serve(port=args.serve)
        return 0

    from . import export as ex

    if not args.out:
        print("error: --out is required for batch runs", file=sys.stderr)
        return 1
    out = Path(args.out)
    methods = args.method or ["heatmap", "plot"]

    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        print(f"error: cannot create output directory: {exc}", file=sys.stderr)
        return 3

    if args.import_path:
        try:
            field = ex.read_field(args.import_path)
        except (OSError, ex.FieldFormatError) as exc:
            print(f"error: cannot read field file: {exc}", file=sys.stderr)
            return 3
        try:
            for method in methods:
                scale = ex.ColorScale.GRAY if method == "plot" else ex.ColorScale.HEAT
                _render_scalar(field, method, out, scale, args.slice)
        except (ValueError, IndexError) as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 2
        except OSError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 3
        return 0

    if not args.problem:
        print("error: --problem or --import is required", file=sys.stderr)
        return 1

    from .dominance import cost_landscape
    from .efficient_sets import efficient_cells, plot_data
    from .fields import evaluate_field, make_grid
    from .heatmap import gradient_field_heatmap
    from .problems import (InvalidSpecError, UnknownProblemError, by_id,
                           instantiate)

    try:
        entry = by_id(args.problem)
        problem = instantiate(entry.spec(_parse_params(args.param)))
    except (UnknownProblemError, InvalidSpecError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1

    resolution = None
    if args.resolution:
        try:
            resolution = tuple(int(v) for v in args.resolution.split(","))
        except ValueError:
            print(f"error: bad --resolution {args.resolution!r}", file=sys.stderr)
            return 1

    try:
        grid = make_grid(problem, resolution)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1

    try:
        bundle = evaluate_field(problem, grid)
        ex.write_field(bundle.objectives, out / "objectives.mopf")
        ex.write_field(bundle.mog, out / "mog.mopf")
        ex.write_field(bundle.mog_length, out / "mog-length.mopf")

        heatmap = None
        if "heatmap" in methods or "plot" in methods:
            heatmap = gradient_field_heatmap(bundle.mog)
        for method in methods:
            if method == "heatmap":
                ex.write_field(heatmap.heights, out / "heatmap.mopf")
                _render_scalar(heatmap.heights, "heatmap", out,
                               ex.ColorScale.HEAT, args.slice)
                rgb = ex.field_rgb(heatmap.heights, ex.ColorScale.HEAT)
                _write_objective_view(ex, bundle, rgb, out / "heatmap-objective")
            elif method == "plot":
                data = plot_data(heatmap, efficient_cells(bundle), bundle.objectives)
                ex.write_field(data.background, out / "plot-background.mopf")
                (out / "plot.json").write_text(json.dumps({
                    "cells": data.efficient_cells.tolist(),
                    "ranks": data.ranks.tolist(),
                    "positions": grid.centers(data.efficient_cells).tolist(),
                }))
                if grid.p == 2:
                    ex.write_image(data, ex.ColorScale.GRAY, out / "plot.ppm")
                elif args.slice:
                    _render_scalar(data.background, "plot", out,
                                   ex.ColorScale.GRAY, args.slice)
                _write_objective_view(ex, bundle, ex.plot_rgb(data),
                                      out / "plot-objective")
            elif method == "cost":
                cost = cost_landscape(bundle.objectives)
                ex.write_field(cost, out / "cost.mopf")
                _render_scalar(cost, "cost", out, ex.ColorScale.HEAT, args.slice)
                rgb = ex.field_rgb(cost, ex.ColorScale.HEAT)
                _write_objective_view(ex, bundle, rgb, out / "cost-objective")
        if args.onion is not None:
            if grid.p != 3 or heatmap is None:
                print("error: --onion needs a 3D problem with a heatmap",
                      file=sys.stderr)
                return 1
            from .volume import onion_shell

            shell = onion_shell(heatmap.heights, args.onion)
            (out / "onion.json").write_text(json.dumps({
                "threshold": shell.threshold,
                "cells": shell.cells.tolist(),
                "positions": grid.centers(shell.cells).tolist(),
            }))
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except Exception as exc:
        print(f"error: compute failed: {exc}", file=sys.stderr)
        return 2
    return 0


def _write_objective_view(ex, bundle, rgb, stem: Path) -> None:
    """Objective-space scatter rasterized onto a fixed 400x400 image."""
    points, colors = ex.objective_space_view(bundle.objectives, rgb)
    f1, f2 = points[:, 0], points[:, 1]
    n = 400
    lo1, hi1 = f1.min(), f1.max()
    lo2, hi2 = f2.min(), f2.max()
    span1 = hi1 - lo1 or 1.0
    span2 = hi2 - lo2 or 1.0
    ix = np.clip(((f1 - lo1) / span1 * (n - 1)).astype(np.int64), 0, n - 1)
    iy = np.clip(((f2 - lo2) / span2 * (n - 1)).astype(np.int64), 0, n - 1)
    img = np.full((n, n, 3), 255, dtype=np.uint8)
    img[n - 1 - iy, ix] = colors[:, :3]
    with open(f"{stem}.ppm", "wb") as fh:
        fh.write(f"P6\n{n} {n}\n255\n".encode("ascii"))
        fh.write(img.tobytes())


def main() -> int:
    return run()


if __name__ == "__main__":
    sys.exit(main())

#!/usr/bin/env python3
"""Render every catalog problem to PPM images under an output directory.

Usage: python3 scripts/render_gallery.py [outdir] [--resolution N]

2D problems get heatmap + PLOT + cost images; 3D problems are rendered as a
mid-plane slice of the heatmap. Handy for eyeballing the whole catalog after
a change.
"""

import sys
import time
from pathlib import Path

from mopviz.dominance import cost_landscape
from mopviz.efficient_sets import efficient_cells, plot_data
from mopviz.export import ColorScale, write_image
from mopviz.fields import evaluate_field, make_grid
from mopviz.heatmap import gradient_field_heatmap
from mopviz.problems import instantiate, list_problems
from mopviz.volume import slice_field


def main(argv):
    out = Path(argv[1]) if len(argv) > 1 else Path("gallery")
    res2d = 300
    if "--resolution" in argv:
        res2d = int(argv[argv.index("--resolution") + 1])
    out.mkdir(parents=True, exist_ok=True)
    for entry in list_problems():
        problem = instantiate(entry.spec())
        resolution = (res2d, res2d) if problem.p == 2 else (40, 40, 40)
        t0 = time.monotonic()
        grid = make_grid(problem, resolution)
        bundle = evaluate_field(problem, grid)
        hm = gradient_field_heatmap(bundle.mog)
        data = plot_data(hm, efficient_cells(bundle), bundle.objectives)
        if problem.p == 2:
            write_image(hm.heights, ColorScale.HEAT, out / f"{entry.id}-heatmap.ppm")
            write_image(data, ColorScale.GRAY, out / f"{entry.id}-plot.ppm")
            cost = cost_landscape(bundle.objectives)
            write_image(cost, ColorScale.HEAT, out / f"{entry.id}-cost.ppm")
        else:
            mid = grid.resolution[2] // 2
            view = slice_field(hm.heights, 3, mid)
            write_image(view.field2d, ColorScale.HEAT,
                        out / f"{entry.id}-heatmap-z{mid}.ppm")
        print(f"{entry.id}: {len(data.efficient_cells)} efficient cells, "
              f"ranks 1..{data.ranks.max() if len(data.ranks) else 0}, "
              f"{time.monotonic() - t0:.1f}s")
    return 0


if __name__ == "__main__":
    sys.exit(main(sys.argv))

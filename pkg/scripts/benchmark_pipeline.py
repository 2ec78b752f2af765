#!/usr/bin/env python3
"""Time the compute pipeline stages at increasing resolutions.

Usage: python3 scripts/benchmark_pipeline.py [problem-id]
"""

import sys
import time

from mopviz.dominance import cost_landscape
from mopviz.efficient_sets import efficient_cells
from mopviz.fields import evaluate_field, make_grid
from mopviz.heatmap import gradient_field_heatmap
from mopviz.problems import by_id, instantiate


def stage(label, fn):
    t0 = time.monotonic()
    value = fn()
    print(f"  {label:<16s} {time.monotonic() - t0:7.2f}s")
    return value


def main(argv):
    problem_id = argv[1] if len(argv) > 1 else "peaks-2d"
    problem = instantiate(by_id(problem_id).spec())
    sizes = [(200, 200), (500, 500), (1000, 1000)] if problem.p == 2 \
        else [(30,) * 3, (50,) * 3, (80,) * 3]
    for resolution in sizes:
        print(f"{problem_id} @ {'x'.join(map(str, resolution))}")
        grid = make_grid(problem, resolution)
        bundle = stage("evaluate", lambda: evaluate_field(problem, grid))
        stage("heatmap", lambda: gradient_field_heatmap(bundle.mog))
        stage("efficient", lambda: efficient_cells(bundle))
        if problem.k == 2:
            stage("cost", lambda: cost_landscape(bundle.objectives))
    return 0


if __name__ == "__main__":
    sys.exit(main(sys.argv))

import numpy as np
import pytest

from mopviz.fields import Grid, VectorField, evaluate_field, make_grid
from mopviz.heatmap import (EPS_GRAD, descent_step_2d, descent_step_3d,
                            gradient_field_heatmap, successor_field)
from mopviz.problems import ProblemSpec, instantiate


def grid2d(n1=8, n2=8):
    return Grid(np.zeros(2), np.ones(2), (n1, n2))


def grid3d(n=6):
    return Grid(np.zeros(3), np.ones(3), (n, n, n))


def test_descent_step_2d_directions():
    g = grid2d()
    center = g.multi_to_linear([4, 4])
    assert descent_step_2d(g, [-1.0, 0.0], center) == g.multi_to_linear([5, 4])
    s = 1 / np.sqrt(2)
    assert descent_step_2d(g, [-s, -s], center) == g.multi_to_linear([5, 5])
    assert descent_step_2d(g, [0.0, 1.0], center) == g.multi_to_linear([4, 3])


def test_descent_step_2d_tie_prefers_lower_index():
    g = grid2d()
    center = g.multi_to_linear([4, 4])
    # descent at exactly 22.5 degrees is equidistant from (+1,0) and (+1,+1);
    # the lower neighbor linear index wins
    d = np.array([np.cos(np.pi / 8), np.sin(np.pi / 8)])
    assert descent_step_2d(g, -d, center) == g.multi_to_linear([5, 4])


def test_descent_step_2d_boundary_and_eps():
    g = grid2d()
    corner = g.multi_to_linear([0, 0])
    # descent pushes straight out of the box: clamped to no step
    assert descent_step_2d(g, [1.0, 0.0], corner) is None
    # a diagonal towards the wall slides along it
    s = 1 / np.sqrt(2)
    assert descent_step_2d(g, [s, -s], corner) == g.multi_to_linear([0, 1])
    assert descent_step_2d(g, [1e-9, 0.0], g.multi_to_linear([4, 4])) is None


def test_descent_step_3d_angle_rule():
    g = grid3d()
    c = g.multi_to_linear([3, 3, 3])
    assert descent_step_3d(g, [-1.0, 0.0, 0.0], c) == g.multi_to_linear([4, 3, 3])
    v = -np.ones(3) / np.sqrt(3)  # arcsin(1/sqrt(3)) = 35.26 deg > 22.5 on all axes
    assert descent_step_3d(g, v, c) == g.multi_to_linear([4, 4, 4])
    v = -np.array([1.0, 0.2, 0.0]) / np.linalg.norm([1.0, 0.2, 0.0])
    assert descent_step_3d(g, v, c) == g.multi_to_linear([4, 3, 3])


def test_straight_line_field_telescopes():
    g = grid2d(10, 3)
    c = 0.25
    field = VectorField(g, np.tile([-c, 0.0], (g.n_cells, 1)))
    result = gradient_field_heatmap(field)
    heights = result.heights.values.reshape(3, 10)
    # paths run to the right wall; the wall cell is terminal with its own length
    for row in heights:
        np.testing.assert_allclose(np.diff(row), -c)
        assert row[-1] == c
    terminal = result.terminal.reshape(3, 10)
    assert terminal[:, -1].all() and not terminal[:, :-1].any()


def test_near_zero_mog_is_terminal_height_zero():
    g = grid2d(5, 5)
    vec = np.tile([-0.5, 0.0], (g.n_cells, 1))
    mid = g.multi_to_linear([2, 2])
    vec[mid] = [1e-9, 0.0]
    result = gradient_field_heatmap(VectorField(g, vec))
    assert result.heights.values[mid] == 0.0
    assert result.terminal[mid]


def test_two_cycle_anchoring_and_unwinding():
    g = grid2d(4, 1)
    # cells 0->1->2->1: cells 1 and 2 form a 2-cycle, cell 3 feeds left
    vec = np.array([[-1.0, 0.0], [-1.0, 0.0], [1.0, 0.0], [1.0, 0.0]])
    result = gradient_field_heatmap(VectorField(g, vec))
    succ = successor_field(VectorField(g, vec))
    np.testing.assert_array_equal(succ, [1, 2, 1, 2])
    h = result.heights.values
    assert result.terminal[1] and not result.terminal[2]
    assert h[1] == 0.0
    assert h[2] == 1.0  # own length + anchor
    assert h[0] == 1.0  # own length + height of cell 1
    assert h[3] == 2.0


def test_order_independence_exact():
    problem = instantiate(ProblemSpec("peaks", 2, 2))
    bundle = evaluate_field(problem, make_grid(problem, (40, 40)))
    base = gradient_field_heatmap(bundle.mog)
    rng = np.random.default_rng(0)
    for _ in range(3):
        order = rng.permutation(bundle.grid.n_cells)
        again = gradient_field_heatmap(bundle.mog, start_order=order)
        assert np.array_equal(base.heights.values, again.heights.values)
        assert np.array_equal(base.terminal, again.terminal)


def test_parallel_equals_sequential_bitwise():
    problem = instantiate(ProblemSpec("peaks", 2, 2))
    bundle = evaluate_field(problem, make_grid(problem, (50, 50)))
    seq = gradient_field_heatmap(bundle.mog, parallel=False)
    par = gradient_field_heatmap(bundle.mog, parallel=True, workers=4)
    assert np.array_equal(seq.heights.values, par.heights.values)
    assert np.array_equal(seq.terminal, par.terminal)


def test_telescoping_along_successors():
    problem = instantiate(ProblemSpec("peaks", 2, 2))
    bundle = evaluate_field(problem, make_grid(problem, (40, 40)))
    result = gradient_field_heatmap(bundle.mog)
    succ = successor_field(bundle.mog)
    lengths = np.linalg.norm(bundle.mog.values, axis=1)
    h = result.heights.values
    live = (succ >= 0) & ~result.terminal
    np.testing.assert_array_equal(h[live], lengths[live] + h[succ[live]])
    assert (h[live] >= h[succ[live]]).all()


def test_bisphere_terminals_near_segment():
    problem = instantiate(ProblemSpec("bisphere", 2, 2))
    grid = make_grid(problem, (100, 100))
    bundle = evaluate_field(problem, grid)
    result = gradient_field_heatmap(bundle.mog)
    centers = grid.centers()[result.terminal]
    assert len(centers) > 0
    seg_x = np.clip(centers[:, 0], -1.0, 1.0)
    dist = np.linalg.norm(centers - np.stack([seg_x, np.zeros(len(centers))], axis=1),
                          axis=1)
    assert dist.max() <= np.linalg.norm(grid.widths)


def test_heights_nonnegative_and_finite():
    problem = instantiate(ProblemSpec("zdt", 2, 2, {"variant": 3}))
    bundle = evaluate_field(problem, make_grid(problem, (30, 30)))
    result = gradient_field_heatmap(bundle.mog)
    assert np.isfinite(result.heights.values).all()
    assert result.heights.values.min() >= 0.0

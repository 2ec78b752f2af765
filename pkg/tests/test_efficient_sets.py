import numpy as np
import pytest

from mopviz.efficient_sets import (_hull_interior_2d, _hull_interior_3d,
                                   efficient_cells, face_critical_cells,
                                   first_order_cells, mog_jacobian,
                                   origin_in_hull, plot_data,
                                   prune_neighbor_dominated,
                                   second_order_filter, stability_mask)
from mopviz.fields import Grid, ScalarField, VectorField, evaluate_field, make_grid
from mopviz.heatmap import HeatmapResult, gradient_field_heatmap
from mopviz.problems import ProblemSpec, instantiate


def rejection_oracle(vectors, trials=40_000, seed=0):
    """Origin interior to the hull iff no sampled direction separates it."""
    vectors = np.asarray(vectors)
    rng = np.random.default_rng(seed)
    d = rng.normal(size=(trials, vectors.shape[1]))
    d /= np.linalg.norm(d, axis=1, keepdims=True)
    return bool((vectors @ d.T).max(axis=0).min() > 1e-7)


def linear_descent_field(grid, jac, x0=None):
    """VectorField whose descent field is v(x) = J (x - x0)."""
    x0 = grid.centers(np.array([grid.n_cells // 2]))[0] if x0 is None else x0
    v = (grid.centers() - x0) @ np.asarray(jac).T
    return VectorField(grid, -v)


def test_origin_in_hull_examples():
    assert origin_in_hull([(1, 0), (-1, 0), (0, 1), (0, -1)])
    s = np.sqrt(0.5)
    assert not origin_in_hull([(1, 0), (0, 1), (s, s)])
    assert not origin_in_hull([(1, 0), (0, 1)])  # fewer than p+1 vectors
    # flat (rank-deficient) sets have empty interior
    assert not origin_in_hull([(1, 0, 0), (-1, 0, 0), (0.5, 0, 0), (-0.5, 0, 0)])


@pytest.mark.parametrize("p", [2, 3])
def test_origin_in_hull_matches_rejection_oracle(p):
    rng = np.random.default_rng(p)
    agree = 0
    for trial in range(60):
        m = int(rng.integers(p + 1, 9))
        v = rng.normal(size=(m, p))
        v /= np.linalg.norm(v, axis=1, keepdims=True)
        assert origin_in_hull(v) == rejection_oracle(v, seed=trial)
        agree += 1
    assert agree == 60


@pytest.mark.parametrize("p", [2, 3])
def test_batched_hull_test_matches_linear_program(p):
    rng = np.random.default_rng(10 + p)
    batch = []
    for _ in range(200):
        v = rng.normal(size=(4 * p, p))
        v /= np.linalg.norm(v, axis=1, keepdims=True)
        batch.append(v)
    batch = np.stack(batch)
    kernel = _hull_interior_2d if p == 2 else _hull_interior_3d
    got = kernel(batch, 1e-9)
    want = np.array([origin_in_hull(v) for v in batch])
    np.testing.assert_array_equal(got, want)


def test_first_order_identical_gradients_not_marked():
    problem = instantiate(ProblemSpec("bisphere", 2, 2))
    grid = make_grid(problem, (12, 12))
    bundle = evaluate_field(problem, grid)
    # constant unit gradients everywhere: hull is a point in a half-plane
    units = np.tile(np.array([[[1.0, 0.0], [0.0, 1.0]]]), (grid.n_cells, 1, 1))
    from dataclasses import replace

    constant = replace(bundle, unit_gradients=units)
    assert len(first_order_cells(constant)) == 0


def test_first_order_bisphere_recovers_segment():
    problem = instantiate(ProblemSpec("bisphere", 2, 2))
    grid = make_grid(problem, (100, 100))
    bundle = evaluate_field(problem, grid)
    cells = first_order_cells(bundle)
    assert len(cells) > 0
    centers = grid.centers(cells)
    seg_x = np.clip(centers[:, 0], -1.0, 1.0)
    dist = np.linalg.norm(centers - np.stack([seg_x, np.zeros(len(cells))], axis=1), axis=1)
    assert dist.max() <= np.linalg.norm(grid.widths)
    # the whole segment is covered
    for t in np.linspace(-1, 1, 41):
        assert np.linalg.norm(centers - [t, 0.0], axis=1).min() <= np.linalg.norm(grid.widths)


def test_first_order_trisphere_recovers_triangle():
    problem = instantiate(ProblemSpec("trisphere", 3, 3))
    grid = make_grid(problem, (30, 30, 30))
    bundle = evaluate_field(problem, grid)
    cells = first_order_cells(bundle)
    assert len(cells) > 0
    centers = grid.centers(cells)
    a, b, c = (np.asarray(problem.params[n]) for n in ("a", "b", "c"))
    diag = np.linalg.norm(grid.widths)
    # marked cells lie near the triangle plane (z = 0) and inside-ish it
    assert np.abs(centers[:, 2]).max() <= diag
    # triangle interior points are all covered
    rng = np.random.default_rng(1)
    w = rng.dirichlet(np.ones(3), size=60)
    samples = w @ np.stack([a, b, c])
    for s in samples:
        assert np.linalg.norm(centers - s, axis=1).min() <= diag


def test_mog_jacobian_linear_and_constant():
    grid = Grid(np.zeros(2), np.ones(2), (9, 9))
    field = linear_descent_field(grid, -np.eye(2))
    mid = grid.n_cells // 2
    np.testing.assert_allclose(mog_jacobian(field, mid), -np.eye(2), atol=1e-12)
    constant = VectorField(grid, np.tile([0.3, -0.2], (grid.n_cells, 1)))
    np.testing.assert_allclose(mog_jacobian(constant, mid), np.zeros((2, 2)), atol=1e-15)


def test_mog_jacobian_quadratic_matches_analytic():
    grid = Grid(np.zeros(2), np.ones(2), (21, 21))
    x = grid.centers()
    v = np.stack([x[:, 0] ** 2 + 3 * x[:, 1] ** 2, x[:, 0] * x[:, 1]], axis=1)
    field = VectorField(grid, -v)
    for multi in ([5, 5], [10, 13], [15, 4]):
        cell = int(grid.multi_to_linear(np.asarray(multi)))
        cx, cy = grid.centers(np.array([cell]))[0]
        analytic = np.array([[2 * cx, 6 * cy], [cy, cx]])
        np.testing.assert_allclose(mog_jacobian(field, cell), analytic, atol=1e-9)


def test_second_order_sink_kept_source_rejected():
    grid = Grid(np.zeros(3), np.ones(3), (7, 7, 7))
    mid = np.array([grid.n_cells // 2], dtype=np.int64)
    sink = linear_descent_field(grid, -np.eye(3))
    assert len(second_order_filter(mid, sink, tau=1e-9)) == 1
    source = linear_descent_field(grid, np.eye(3))
    assert len(second_order_filter(mid, source, tau=1e-9)) == 0


def test_stability_mask_matches_eigenvalues_3d():
    rng = np.random.default_rng(42)
    tau = 1e-9
    for _ in range(500):
        lam = rng.uniform(-2, 2, size=2)
        basis = rng.normal(size=(3, 3))
        while abs(np.linalg.det(basis)) < 0.1:
            basis = rng.normal(size=(3, 3))
        jac = basis @ np.diag([lam[0], lam[1], 0.0]) @ np.linalg.inv(basis)
        got = stability_mask(jac[None], tau)[0]
        eig = np.linalg.eigvals(jac)
        nonzero = np.argsort(np.abs(eig))[1:]
        want = eig[nonzero].real.max() <= 0
        margin = min(abs(lam.sum()), abs(lam.prod()))
        if margin > 1e-6:
            assert got == want


def test_prune_drops_neighbor_dominated_cells():
    grid = Grid(np.zeros(2), np.ones(2), (4, 4))
    values = np.ones((grid.n_cells, 2))
    cell = int(grid.multi_to_linear(np.array([2, 2])))
    nb = int(grid.multi_to_linear(np.array([1, 2])))
    values[nb] = [0.5, 1.0]  # dominates its right neighbor
    from mopviz.fields import ObjectiveField

    objectives = ObjectiveField(grid, values)
    kept = prune_neighbor_dominated(np.array([cell, nb]), objectives)
    np.testing.assert_array_equal(kept, [nb])


def test_plot_data_bisphere_all_rank_one():
    problem = instantiate(ProblemSpec("bisphere", 2, 2))
    grid = make_grid(problem, (100, 100))
    bundle = evaluate_field(problem, grid)
    hm = gradient_field_heatmap(bundle.mog)
    eff = efficient_cells(bundle)
    data = plot_data(hm, eff, bundle.objectives)
    assert len(data.efficient_cells) > 0
    assert data.ranks.min() == 1
    assert (data.ranks == 1).all()


def test_plot_data_peaks_has_dominated_local_set():
    problem = instantiate(ProblemSpec("peaks", 2, 2, {"n_peaks": 3, "seeds": [4, 8]}))
    grid = make_grid(problem, (150, 150))
    bundle = evaluate_field(problem, grid)
    hm = gradient_field_heatmap(bundle.mog)
    eff = efficient_cells(bundle)
    data = plot_data(hm, eff, bundle.objectives)
    assert data.ranks.min() == 1
    assert data.ranks.max() > 1


def test_plot_data_empty_efficient_set():
    grid = Grid(np.zeros(2), np.ones(2), (3, 3))
    heights = ScalarField(grid, np.arange(9, dtype=float))
    hm = HeatmapResult(heights, np.zeros(9, dtype=bool))
    from mopviz.fields import ObjectiveField

    data = plot_data(hm, np.zeros(0, dtype=np.int64),
                     ObjectiveField(grid, np.ones((9, 2))))
    assert len(data.efficient_cells) == 0 and len(data.ranks) == 0


def test_pipeline_subset_chain():
    problem = instantiate(ProblemSpec("peaks", 2, 2))
    grid = make_grid(problem, (80, 80))
    bundle = evaluate_field(problem, grid)
    first = first_order_cells(bundle)
    stable = second_order_filter(first, bundle.mog)
    pruned = prune_neighbor_dominated(stable, bundle.objectives)
    assert set(stable) <= set(first)
    assert set(pruned) <= set(stable)
    np.testing.assert_array_equal(efficient_cells(bundle), np.sort(pruned))


def test_face_detection_finds_zdt_boundary_set():
    # the ZDT Pareto set sits on the x2 = 0 face, invisible to interior
    # simplex tests; the face test must recover the bottom row
    problem = instantiate(ProblemSpec("zdt", 2, 2, {"variant": 1}))
    grid = make_grid(problem, (80, 80))
    bundle = evaluate_field(problem, grid)
    assert len(first_order_cells(bundle)) == 0
    eff = efficient_cells(bundle)
    centers = grid.centers(eff)
    assert len(eff) == 80  # the full bottom row
    assert (centers[:, 1] == grid.axis_centers(1)[0]).all()
    hm = gradient_field_heatmap(bundle.mog)
    assert (plot_data(hm, eff, bundle.objectives).ranks == 1).all()


def test_face_detection_zdt3_dominated_stretches():
    # zdt3's oscillating second objective leaves locally efficient but
    # globally dominated stretches on the bottom face
    problem = instantiate(ProblemSpec("zdt", 2, 2, {"variant": 3}))
    grid = make_grid(problem, (150, 150))
    bundle = evaluate_field(problem, grid)
    eff = efficient_cells(bundle)
    hm = gradient_field_heatmap(bundle.mog)
    data = plot_data(hm, eff, bundle.objectives)
    assert data.ranks.min() == 1
    assert data.ranks.max() > 1


def test_face_detection_rejects_interior_optima_problems():
    # all sphere minima are interior, so no wall cell is critical: the
    # combined gradient at a wall never points into the bound
    for family, p, k in (("bisphere", 2, 2), ("trisphere", 3, 3)):
        problem = instantiate(ProblemSpec(family, p, k))
        grid = make_grid(problem, (20,) * p)
        bundle = evaluate_field(problem, grid)
        assert len(face_critical_cells(bundle)) == 0


def test_grid_refinement_halves_hausdorff():
    problem = instantiate(ProblemSpec("bisphere", 2, 2))

    def hausdorff(resolution):
        grid = make_grid(problem, resolution)
        bundle = evaluate_field(problem, grid)
        centers = grid.centers(efficient_cells(bundle))
        seg = np.stack([np.linspace(-1, 1, 400), np.zeros(400)], axis=1)
        d_ab = np.array([np.linalg.norm(centers - s, axis=1).min() for s in seg]).max()
        seg_x = np.clip(centers[:, 0], -1, 1)
        d_ba = np.linalg.norm(centers - np.stack([seg_x, np.zeros(len(centers))], axis=1),
                              axis=1).max()
        return max(d_ab, d_ba)

    ratio = hausdorff((200, 200)) / hausdorff((100, 100))
    assert 0.5 - 0.3 <= ratio <= 0.5 + 0.3

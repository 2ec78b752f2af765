"""Landscape analysis and visualization engine for box-constrained MOPs."""

from .dominance import cost_landscape, dominance_counts, dominates
from .efficient_sets import (PlotData, efficient_cells, first_order_cells,
                             mog_jacobian, origin_in_hull, plot_data,
                             prune_neighbor_dominated, second_order_filter)
from .export import (ColorScale, apply_colorscale, normalize_log,
                     objective_space_view, read_field, write_field, write_image)
from .fields import (FieldBundle, Grid, ObjectiveField, ScalarField,
                     VectorField, evaluate_field, make_grid)
from .heatmap import (HeatmapResult, descent_step_2d, descent_step_3d,
                      gradient_field_heatmap)
from .mog import (MOGResult, mog, mog_2, mog_3_2d, mog_3_3d,
                  normalize_gradients)
from .problems import (CatalogEntry, DomainError, Problem, ProblemSpec,
                       by_id, instantiate, list_problems)
from .volume import OnionShell, SliceView, onion_shell, slice_field, threshold_range

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"

"""Figure writers (matplotlib, Agg backend)."""

from .plots import (
    plot_objective_trace,
    plot_samples,
    plot_scar_map,
    plot_tmp_traces,
    plot_training_curve,
)

__all__ = [
    "plot_objective_trace",
    "plot_samples",
    "plot_scar_map",
    "plot_tmp_traces",
    "plot_training_curve",
]

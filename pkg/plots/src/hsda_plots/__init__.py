"""Figure rendering for solver convergence traces."""

from .reader import SchemaError, TraceSeries, parse_trace
from .render import PlotSpec, build_figure, load_series, render

__all__ = ["PlotSpec", "SchemaError", "TraceSeries", "build_figure",
           "load_series", "parse_trace", "render"]

"""Dual-axis convergence figures from trace series."""

from __future__ import annotations

from dataclasses import dataclass, field

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

from .reader import SchemaError, TraceSeries, parse_trace  # noqa: E402


@dataclass
class PlotSpec:
    """Inputs and styling switches for one figure."""

    inputs: list[str]
    output: str
    labels: list[str] = field(default_factory=list)
    log_left: bool = True
    log_right: bool = True

    def __post_init__(self):
        if not self.inputs:
            raise ValueError("a plot needs at least one input trace")


def load_series(spec: PlotSpec) -> list[TraceSeries]:
    series: list[TraceSeries] = []
    for i, path in enumerate(spec.inputs):
        for s in parse_trace(path):
            if i < len(spec.labels) and spec.labels[i]:
                s.label = (spec.labels[i] if not s.label
                           else f"{spec.labels[i]}:{s.label}")
            elif not s.label:
                stem = path.rsplit("/", 1)[-1]
                s.label = stem.rsplit(".", 1)[0]
            series.append(s)
    if not series:
        raise SchemaError("no series found in the given traces")
    return series


def build_figure(spec: PlotSpec):
    """Assemble the figure for ``spec``; returns (figure, left, right) axes.

    Left axis: optimality gap (skipped entirely when every trace leaves the
    gap column blank, in which case the left handle is None). Right axis:
    gradient norm. One colored pair of lines per series; iteration index on
    the horizontal axis.
    """
    series = load_series(spec)
    any_gap = any(s.has_values("f_gap") for s in series)

    fig, ax_right = plt.subplots(figsize=(7.0, 4.5))
    ax_left = None
    if any_gap:
        ax_left = ax_right
        ax_right = ax_left.twinx()

    colors = plt.rcParams["axes.prop_cycle"].by_key()["color"]
    for i, s in enumerate(series):
        color = colors[i % len(colors)]
        if any_gap:
            pts = [(t, v) for t, v in zip(s.t, s.columns["f_gap"])
                   if v is not None]
            if pts:
                ax_left.plot([p[0] for p in pts], [p[1] for p in pts],
                             color=color, linestyle="-",
                             label=f"{s.label} gap")
        pts = [(t, v) for t, v in zip(s.t, s.columns["grad_norm"])
               if v is not None]
        if pts:
            ax_right.plot([p[0] for p in pts], [p[1] for p in pts],
                          color=color, linestyle="--",
                          label=f"{s.label} grad")

    ax_right.set_xlabel("iteration")
    ax_right.set_ylabel("gradient norm")
    if spec.log_right:
        ax_right.set_yscale("log")
    if ax_left is not None:
        ax_left.set_ylabel("optimality gap")
        if spec.log_left:
            ax_left.set_yscale("log")
        handles_l, labels_l = ax_left.get_legend_handles_labels()
        handles_r, labels_r = ax_right.get_legend_handles_labels()
        ax_right.legend(handles_l + handles_r, labels_l + labels_r,
                        fontsize="small", loc="upper right")
    else:
        ax_right.legend(fontsize="small", loc="upper right")
    fig.tight_layout()
    return fig, ax_left, ax_right


def render(spec: PlotSpec) -> str:
    """Write the figure for ``spec`` as a raster image; returns its path."""
    fig, _, _ = build_figure(spec)
    fig.savefig(spec.output, dpi=130)
    plt.close(fig)
    return spec.output

"""Figure rendering: load/outage histograms, on-grid energy series, EE table.

Figures are deterministic: fixed style, fixed size, no timestamps in the
output, so re-rendering identical inputs with the same tool version is
byte-identical.
"""

import os
from dataclasses import dataclass, field

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from .schemas import EE_FIELDS, SchemaError, read_batch_runs, read_per_second, read_summary

KIND_LOAD_HISTOGRAM = "LoadHistogram"
KIND_OUTAGE_HISTOGRAM = "OutageHistogram"
KIND_ON_GRID_TIME_SERIES = "OnGridTimeSeries"
KIND_EE_TABLE = "EETable"
KINDS = (KIND_LOAD_HISTOGRAM, KIND_OUTAGE_HISTOGRAM, KIND_ON_GRID_TIME_SERIES, KIND_EE_TABLE)

PNG_METADATA = {"Software": "greenran-plots"}
ALGO_COLORS = {"proposed": "#2d6a4f", "reference": "#4361ee"}


@dataclass(frozen=True)
class FigureSpec:
    kind: str
    inputs: tuple
    output: str
    bins: int = 10
    window_s: int = 3600

    def validate(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown figure kind {self.kind!r}; choose from {KINDS}")
        if self.bins < 1:
            raise ValueError("bins must be >= 1")
        if self.window_s < 1:
            raise ValueError("window_s must be >= 1")
        if not self.inputs:
            raise ValueError("at least one input path is required")
        for path in self.inputs:
            if not os.path.exists(path):
                raise FileNotFoundError(path)


@dataclass
class RenderResult:
    output: str
    info: dict = field(default_factory=dict)


def _save(fig, output):
    fig.savefig(output, metadata=PNG_METADATA)
    plt.close(fig)


def _paired_histograms(spec: FigureSpec, column, x_label) -> RenderResult:
    if len(spec.inputs) != 1:
        raise ValueError("histogram figures take exactly one batch_runs.csv")
    by_algo = read_batch_runs(spec.inputs[0])
    algos = sorted(by_algo)
    values = {a: np.array(by_algo[a][column]) for a in algos}
    hi = max(float(v.max()) for v in values.values())
    hi = hi if hi > 0 else 1e-9
    fig, axes = plt.subplots(1, len(algos), figsize=(4.0 * len(algos), 3.2), dpi=120)
    axes = np.atleast_1d(axes)
    info = {"n_runs": {}, "counts": {}}
    for ax, algo in zip(axes, algos):
        counts, edges, _ = ax.hist(
            values[algo],
            bins=spec.bins,
            range=(0.0, hi),
            color=ALGO_COLORS.get(algo, "#888888"),
            edgecolor="black",
            linewidth=0.5,
        )
        ax.set_title(algo)
        ax.set_xlabel(x_label)
        ax.set_ylabel("runs")
        info["n_runs"][algo] = int(len(values[algo]))
        info["counts"][algo] = [int(c) for c in counts]
    fig.tight_layout()
    _save(fig, spec.output)
    return RenderResult(spec.output, info)


def _on_grid_series(spec: FigureSpec) -> RenderResult:
    fig, ax = plt.subplots(figsize=(6.4, 3.6), dpi=120)
    info = {"n_points": {}, "total_kwh": {}}
    for path in spec.inputs:
        data = read_per_second(path)
        ongrid_w = np.array(data["ongrid_w"][1:])  # row 0 is the t=0 snapshot
        n_windows = len(ongrid_w) // spec.window_s
        if n_windows == 0:
            raise SchemaError(f"{path}: shorter than one {spec.window_s} s window")
        kwh = (
            ongrid_w[: n_windows * spec.window_s].reshape(n_windows, spec.window_s).sum(axis=1)
            / 3.6e6
        )
        label = os.path.basename(os.path.dirname(os.path.abspath(path))) or path
        hours = (np.arange(n_windows) + 1) * (spec.window_s / 3600.0)
        ax.plot(hours, np.cumsum(kwh), label=label, color=ALGO_COLORS.get(label, None))
        info["n_points"][label] = int(n_windows)
        info["total_kwh"][label] = float(kwh.sum())
    ax.set_xlabel("time (h)")
    ax.set_ylabel("cumulative on-grid energy (kWh)")
    ax.legend()
    fig.tight_layout()
    _save(fig, spec.output)
    return RenderResult(spec.output, info)


def _ee_table(spec: FigureSpec) -> RenderResult:
    summaries = [read_summary(p) for p in spec.inputs]
    order = {"reference": 0, "proposed": 1}
    summaries.sort(key=lambda s: (order.get(s.get("algorithm", ""), 2), s.get("algorithm", "")))
    header = ("algorithm", "EE_SCBS", "EE_MBS", "EE_total")
    rows = [
        (s.get("algorithm", "?"), repr(s["ee_scbs"]), repr(s["ee_mbs"]), repr(s["ee_total"]))
        for s in summaries
    ]
    widths = [max(len(r[i]) for r in [header] + rows) for i in range(4)]
    lines = ["avg energy efficiency in MbpJ per second"]
    lines.append("  ".join(h.ljust(widths[i]) for i, h in enumerate(header)))
    for r in rows:
        lines.append("  ".join(r[i].ljust(widths[i]) for i in range(4)))
    with open(spec.output, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
    info = {
        "values": {
            s.get("algorithm", "?"): {f: s[f] for f in EE_FIELDS} for s in summaries
        }
    }
    return RenderResult(spec.output, info)


def render(spec: FigureSpec) -> RenderResult:
    """Render one figure; returns the output path plus auditable numbers."""
    spec.validate()
    if spec.kind == KIND_LOAD_HISTOGRAM:
        return _paired_histograms(spec, "mbs_load_share", "MBS load share")
    if spec.kind == KIND_OUTAGE_HISTOGRAM:
        return _paired_histograms(spec, "outage_share", "outage share")
    if spec.kind == KIND_ON_GRID_TIME_SERIES:
        return _on_grid_series(spec)
    return _ee_table(spec)

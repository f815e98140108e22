"""Grid heatmaps of one sweep metric, aggregated per (n, sigma) cell.

Reads the 15-column sweep CSV written by the solver package, averages one
metric over the trials of every cell, and renders the grid with n on the
x-axis, sigma / sqrt(n) on the y-axis and a reference line at
sigma = sqrt(n). Rendering is a pure function of the file contents; no
clock, locale or environment input enters the figure, so rerenders are
byte-identical under a fixed plotting backend version.

Aggregation uses complete cells only: a cell missing trials for any method
present in the file is dropped from the grid and reported, not silently
averaged over fewer runs. Rows whose metric value is NaN (solver error
rows) are excluded from the mean but count as present for completeness.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

KEY_COLUMNS = ("n", "sigma", "trial", "method", "status")
RATE_METRICS = frozenset({"cert_pass", "rtr_beats_eig", "eig_beats_signal"})
NON_METRIC_COLUMNS = frozenset({"n", "sigma", "trial", "seed", "method", "status"})

# grouping precision for sigma / sqrt(n): keeps one y row per grid level
# across n columns while separating genuinely distinct levels
_REL_DECIMALS = 9

_REFERENCE_COLOR = "#1f77b4"


class SweepDataError(ValueError):
    """Unusable input: empty file, missing column, malformed row."""


@dataclass(frozen=True)
class HeatmapData:
    metric: str
    n_values: tuple[int, ...]
    rel_values: tuple[float, ...]  # sigma / sqrt(n) levels, ascending
    grid: np.ndarray  # shape (len(rel_values), len(n_values)); NaN where empty
    vmin: float
    vmax: float
    partial_cells: tuple[tuple[int, float], ...]  # dropped (n, rel) cells


def _read_rows(csv_path: str, metric: str) -> list[dict]:
    with open(csv_path, "r", encoding="utf-8", newline="") as fh:
        lines = [ln for ln in fh if ln.strip() and not ln.lstrip().startswith("#")]
    if not lines:
        raise SweepDataError(f"{csv_path}: empty CSV")
    reader = csv.reader(lines)
    header = next(reader)
    for column in KEY_COLUMNS:
        if column not in header:
            raise SweepDataError(f"{csv_path}: column {column!r} missing from header")
    if metric not in header:
        raise SweepDataError(f"{csv_path}: column {metric!r} missing from header")
    if metric in NON_METRIC_COLUMNS:
        raise SweepDataError(f"{csv_path}: column {metric!r} is not a renderable metric")
    idx = {name: header.index(name) for name in (*KEY_COLUMNS, metric)}
    rows = []
    for lineno, fields in enumerate(reader, start=2):
        if len(fields) != len(header):
            raise SweepDataError(
                f"{csv_path}:{lineno}: expected {len(header)} fields, got {len(fields)}"
            )
        raw = fields[idx[metric]].strip()
        try:
            rows.append(
                {
                    "n": int(fields[idx["n"]]),
                    "sigma": float(fields[idx["sigma"]]),
                    "trial": int(fields[idx["trial"]]),
                    "method": fields[idx["method"]],
                    "value": float(raw) if raw else float("nan"),
                }
            )
        except ValueError as err:
            raise SweepDataError(f"{csv_path}:{lineno}: {err}") from None
    if not rows:
        raise SweepDataError(f"{csv_path}: no data rows")
    return rows


def build_heatmap_data(csv_path: str, metric: str) -> HeatmapData:
    """Aggregate `metric` as a mean over trials for every complete cell."""
    rows = _read_rows(csv_path, metric)
    all_trials = {row["trial"] for row in rows}
    all_methods = {row["method"] for row in rows}

    cells: dict[tuple[int, float], dict] = {}
    for row in rows:
        rel = round(row["sigma"] / math.sqrt(row["n"]), _REL_DECIMALS)
        cell = cells.setdefault((row["n"], rel), {"trials": {}, "values": []})
        cell["trials"].setdefault(row["method"], set()).add(row["trial"])
        if not math.isnan(row["value"]):
            cell["values"].append(row["value"])

    n_values = tuple(sorted({n for n, _ in cells}))
    rel_values = tuple(sorted({rel for _, rel in cells}))
    grid = np.full((len(rel_values), len(n_values)), np.nan)
    partial = []
    for (n, rel), cell in cells.items():
        complete = all(
            cell["trials"].get(method, set()) == all_trials for method in all_methods
        )
        if not complete:
            partial.append((n, rel))
            continue
        if cell["values"]:
            grid[rel_values.index(rel), n_values.index(n)] = float(np.mean(cell["values"]))

    if metric in RATE_METRICS:
        vmin, vmax = 0.0, 1.0
    else:
        finite = grid[np.isfinite(grid)]
        if finite.size:
            vmin = min(0.0, float(finite.min()))
            vmax = float(finite.max())
            if vmax <= vmin:
                vmax = vmin + 1.0
        else:
            vmin, vmax = 0.0, 1.0
    return HeatmapData(
        metric=metric,
        n_values=n_values,
        rel_values=rel_values,
        grid=grid,
        vmin=vmin,
        vmax=vmax,
        partial_cells=tuple(sorted(partial)),
    )


def build_figure(data: HeatmapData):
    """One colored cell per (n, sigma) pair plus the sigma = sqrt(n) line."""
    fig, ax = plt.subplots(figsize=(7.5, 5.5), dpi=120)
    cmap = matplotlib.colormaps["viridis"].copy()
    cmap.set_bad("#d0d0d0")
    image = ax.imshow(
        np.ma.masked_invalid(data.grid),
        origin="lower",
        aspect="auto",
        interpolation="nearest",
        cmap=cmap,
        vmin=data.vmin,
        vmax=data.vmax,
        extent=(-0.5, len(data.n_values) - 0.5, -0.5, len(data.rel_values) - 0.5),
    )
    ax.set_xticks(range(len(data.n_values)), [str(n) for n in data.n_values])
    ax.set_yticks(range(len(data.rel_values)), [f"{rel:g}" for rel in data.rel_values])
    ax.set_xlabel("n")
    ax.set_ylabel("sigma / sqrt(n)")
    ax.set_title(f"{data.metric} (mean over trials)")
    if data.rel_values and data.rel_values[0] <= 1.0 <= data.rel_values[-1]:
        position = float(np.interp(1.0, data.rel_values, range(len(data.rel_values))))
        ax.axhline(position, color=_REFERENCE_COLOR, linewidth=1.8, label="sigma = sqrt(n)")
        ax.legend(loc="upper left", framealpha=0.9)
    fig.colorbar(image, ax=ax)
    fig.tight_layout()
    return fig


def render(csv_path: str, metric: str, out_image: str) -> HeatmapData:
    """Write the heatmap image and return the aggregated grid behind it."""
    data = build_heatmap_data(csv_path, metric)
    fig = build_figure(data)
    try:
        if str(out_image).lower().endswith(".png"):
            # a fixed Software tag replaces the version-bearing default,
            # keeping rerenders byte-identical
            fig.savefig(out_image, metadata={"Software": "phasesync-plots"})
        else:
            fig.savefig(out_image)
    finally:
        plt.close(fig)
    return data

"""Heatmaps for sweep CSV artifacts."""

from .heatmap import (
    HeatmapData,
    SweepDataError,
    build_figure,
    build_heatmap_data,
    render,
)

__all__ = [
    "HeatmapData",
    "SweepDataError",
    "build_figure",
    "build_heatmap_data",
    "render",
]

#!/usr/bin/env python3
"""Render an exported accuracy grid (ASFGRID v1 text) as a heatmap image.

Usage:
    acc_plot.py --grid acc_S0.grid --vmin 0 --vmax 500 --title "S0" --out s0.png

Grids from several scenarios rendered with the same --vmin/--vmax share one
color scale, so equal accuracy values map to identical pixel colors across
images. NODATA (NA) cells render neutral gray. Output is deterministic for
fixed inputs.

This tool reads the grid file format directly and does not depend on the
simulator package that produced it.
"""

from __future__ import annotations

import argparse
import math
import sys
from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
from matplotlib import cm, colors  # noqa: E402

CMAP_NAME = "viridis"
NODATA_RGBA = (128, 128, 128, 255)

# Fixed layout so output images are pixel-predictable: an 800x600 canvas with
# the heatmap axes at [80, 60] size 576x492 and the colorbar to its right.
FIG_W_IN, FIG_H_IN, DPI = 8.0, 6.0, 100
AXES_RECT = (0.10, 0.10, 0.72, 0.82)
CBAR_RECT = (0.86, 0.10, 0.035, 0.82)


@dataclass(frozen=True)
class Grid:
    label: str
    origin_lat: float
    origin_lon: float
    d_lat: float
    d_lon: float
    values: np.ndarray  # (n_lat, n_lon), NaN for NA, row 0 southernmost
    units: str


@dataclass(frozen=True)
class PlotSpec:
    input_grid_path: Path
    vmin: float
    vmax: float
    title: str
    output_image_path: Path

    def __post_init__(self) -> None:
        if not self.vmin < self.vmax:
            raise ValueError(f"color scale needs vmin < vmax, got [{self.vmin}, {self.vmax}]")


def parse_grid(path: Path | str) -> Grid:
    """Minimal ASFGRID v1 reader: header line, optional # comments, data rows."""
    units = ""
    header = None
    rows: list[str] = []
    for line in Path(path).read_text().splitlines():
        stripped = line.strip()
        if not stripped:
            continue
        if stripped.startswith("#"):
            body = stripped.lstrip("#").strip()
            if body.startswith("units:"):
                units = body[len("units:"):].strip()
            continue
        if header is None:
            header = stripped
        else:
            rows.append(stripped)
    if header is None:
        raise ValueError(f"{path}: empty grid file")
    tok = header.split()
    if len(tok) != 9 or tok[0] != "ASFGRID" or tok[1] != "v1":
        raise ValueError(f"{path}: not an ASFGRID v1 header: {header!r}")
    n_lat, n_lon = int(tok[7]), int(tok[8])
    if len(rows) != n_lat:
        raise ValueError(f"{path}: expected {n_lat} rows, found {len(rows)}")
    values = np.empty((n_lat, n_lon))
    for i, row in enumerate(rows):
        cells = row.split()
        if len(cells) != n_lon:
            raise ValueError(f"{path}: row {i} has {len(cells)} values, expected {n_lon}")
        values[i] = [math.nan if c == "NA" else float(c) for c in cells]
    return Grid(tok[2], float(tok[3]), float(tok[4]), float(tok[5]), float(tok[6]),
                values, units)


def grid_to_rgba(values: np.ndarray, vmin: float, vmax: float) -> np.ndarray:
    """Map values to uint8 RGBA under a fixed shared scale; NaN -> gray.

    Equal values always map to equal colors, which is the whole contract of
    rendering scenario grids under one scale.
    """
    values = np.asarray(values, dtype=float)
    nan_mask = np.isnan(values)
    frac = (np.clip(values, vmin, vmax) - vmin) / (vmax - vmin)
    frac = np.where(nan_mask, 0.0, frac)
    rgba = plt.get_cmap(CMAP_NAME)(frac, bytes=True)
    rgba[nan_mask] = NODATA_RGBA
    return rgba


def cell_center_pixel(n_lat: int, n_lon: int, i: int, j: int) -> tuple[int, int]:
    """(row, col) pixel of cell (i, j)'s center in the saved image."""
    img_w, img_h = int(FIG_W_IN * DPI), int(FIG_H_IN * DPI)
    ax_x = AXES_RECT[0] * img_w
    ax_y = AXES_RECT[1] * img_h
    ax_w = AXES_RECT[2] * img_w
    ax_h = AXES_RECT[3] * img_h
    px = ax_x + (j + 0.5) / n_lon * ax_w
    py = ax_y + (i + 0.5) / n_lat * ax_h  # from the bottom edge
    return img_h - 1 - int(round(py)), int(round(px))


def render(spec: PlotSpec) -> None:
    grid = parse_grid(spec.input_grid_path)
    n_lat, n_lon = grid.values.shape
    rgba = grid_to_rgba(grid.values, spec.vmin, spec.vmax)

    fig = plt.figure(figsize=(FIG_W_IN, FIG_H_IN), dpi=DPI)
    ax = fig.add_axes(AXES_RECT)
    extent = (
        grid.origin_lon - grid.d_lon / 2,
        grid.origin_lon + (n_lon - 0.5) * grid.d_lon,
        grid.origin_lat - grid.d_lat / 2,
        grid.origin_lat + (n_lat - 0.5) * grid.d_lat,
    )
    ax.imshow(rgba, origin="lower", interpolation="nearest", aspect="auto", extent=extent)
    ax.set_xlabel("longitude (deg)")
    ax.set_ylabel("latitude (deg)")
    ax.set_title(spec.title)

    cax = fig.add_axes(CBAR_RECT)
    mappable = cm.ScalarMappable(norm=colors.Normalize(spec.vmin, spec.vmax),
                                 cmap=CMAP_NAME)
    fig.colorbar(mappable, cax=cax, label="ACC (m)")
    fig.savefig(spec.output_image_path, dpi=DPI)
    plt.close(fig)


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--grid", required=True, help="exported ASFGRID v1 grid file")
    parser.add_argument("--vmin", type=float, required=True, help="color scale minimum (m)")
    parser.add_argument("--vmax", type=float, required=True, help="color scale maximum (m)")
    parser.add_argument("--title", default="", help="figure title")
    parser.add_argument("--out", required=True, help="output image path (png)")
    args = parser.parse_args(argv)
    try:
        spec = PlotSpec(Path(args.grid), args.vmin, args.vmax, args.title, Path(args.out))
        render(spec)
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())

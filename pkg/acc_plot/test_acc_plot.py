"""Heatmap renderer checks; all inputs come from the simulator's synth/run CLI."""

import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest
import yaml
from PIL import Image

import acc_plot

REF_LAT, REF_LON = 37.449232, 126.593994

# Run lattice: node (8, 8) lands exactly on the ASF-map node nearest the
# reference point, and rows above lat 38.0 fall outside the map hull (NA).
GRID = {"lat_min": 37.05, "lat_max": 38.15, "lon_min": 126.2, "lon_max": 127.0,
        "step": 0.05}
REF_CELL = (8, 8)


def lorasf(*args):
    proc = subprocess.run(
        [sys.executable, "-m", "lorasf.cli", *args], capture_output=True, text=True
    )
    assert proc.returncode == 0, proc.stderr
    return proc


@pytest.fixture(scope="module")
def outputs(tmp_path_factory):
    """Synthesize maps, run all scenarios, return exported grid paths."""
    root = tmp_path_factory.mktemp("accplot")
    params = {
        "pohang": ("2.0", "0.4", "-0.2"),
        "gwangju": ("-1.5", "-0.15", "0.3"),
        "socheong": ("0.6", "0.1", "0.12"),
    }
    for sid, (base, glat, glon) in params.items():
        lorasf(
            "synth", "--kind", "gradient", "--station", sid,
            "--out", str(root / "maps" / f"{sid}.asf"),
            "--origin-lat", "36.8", "--origin-lon", "126.0",
            "--d-lat", "0.05", "--d-lon", "0.05", "--n-lat", "25", "--n-lon", "25",
            "--base", base, "--grad-lat", glat, "--grad-lon", glon,
            "--anchor-lat", str(REF_LAT), "--anchor-lon", str(REF_LON),
        )
    lorasf(
        "synth", "--kind", "constant", "--station", "flat", "--value", "0",
        "--out", str(root / "maps" / "flat.asf"),
        "--origin-lat", "36.8", "--origin-lon", "126.0",
        "--d-lat", "0.05", "--d-lon", "0.05", "--n-lat", "25", "--n-lon", "25",
    )
    config = {
        "network": [
            {"id": "pohang", "lat": 36.192, "lon": 129.343, "power_kw": 150.0,
             "jitter_m": 2.11, "asf_map": "maps/pohang.asf"},
            {"id": "gwangju", "lat": 35.07, "lon": 126.53, "power_kw": 50.0,
             "jitter_m": 3.21, "asf_map": "maps/gwangju.asf"},
            {"id": "socheong", "lat": 37.76, "lon": 124.743, "power_kw": 8.0,
             "jitter_m": 2.11, "asf_map": "maps/socheong.asf"},
        ],
        "grid": GRID,
        "scenarios": ["S0", "S1",
                      {"tag": "S2", "reference_lat": REF_LAT, "reference_lon": REF_LON}],
        "output_dir": str(root / "out"),
    }
    cfg = root / "run.cfg"
    cfg.write_text(yaml.safe_dump(config))
    lorasf("run", "--config", str(cfg))
    return {
        "root": root,
        "flat_map": root / "maps" / "flat.asf",
        **{t: root / "out" / f"acc_{t}.grid" for t in ("S0", "S1", "S2")},
    }


def render(grid_path, out_path, vmin=0.0, vmax=500.0, title="t"):
    spec = acc_plot.PlotSpec(Path(grid_path), vmin, vmax, title, Path(out_path))
    acc_plot.render(spec)
    return np.asarray(Image.open(out_path).convert("RGBA"))


def pixel(img, grid_shape, cell):
    row, col = acc_plot.cell_center_pixel(*grid_shape, *cell)
    return tuple(int(v) for v in img[row, col])


def test_grids_have_expected_structure(outputs):
    g1 = acc_plot.parse_grid(outputs["S1"])
    g2 = acc_plot.parse_grid(outputs["S2"])
    assert g1.units == "m" and g2.units == "m"
    assert g1.values.shape == (23, 17)
    # NA band above the map hull exists and matches across scenarios
    assert np.isnan(g1.values[-1]).all()
    assert np.array_equal(np.isnan(g1.values), np.isnan(g2.values))
    # reference node cell carries bit-identical ACC in S1 and S2
    assert g1.values[REF_CELL] == g2.values[REF_CELL]


def test_shared_scale_maps_equal_values_to_identical_colors(outputs, tmp_path):
    g1 = acc_plot.parse_grid(outputs["S1"])
    g2 = acc_plot.parse_grid(outputs["S2"])
    rgba1 = acc_plot.grid_to_rgba(g1.values, 0.0, 500.0)
    rgba2 = acc_plot.grid_to_rgba(g2.values, 0.0, 500.0)
    equal_vals = g1.values == g2.values
    assert equal_vals.any()
    assert (rgba1[equal_vals] == rgba2[equal_vals]).all()

    img1 = render(outputs["S1"], tmp_path / "s1.png")
    img2 = render(outputs["S2"], tmp_path / "s2.png")
    assert pixel(img1, g1.values.shape, REF_CELL) == pixel(img2, g2.values.shape, REF_CELL)


def test_na_cells_render_gray(outputs, tmp_path):
    g0 = acc_plot.parse_grid(outputs["S0"])
    rgba = acc_plot.grid_to_rgba(g0.values, 0.0, 500.0)
    nan_mask = np.isnan(g0.values)
    assert nan_mask.any() and not nan_mask.all()
    gray = np.array(acc_plot.NODATA_RGBA, dtype=np.uint8)
    assert (rgba[nan_mask] == gray).all()
    # exactly the NA cells are gray (the colormap itself never emits gray)
    gray_cells = (rgba == gray).all(axis=-1)
    assert np.array_equal(gray_cells, nan_mask)

    img = render(outputs["S0"], tmp_path / "s0.png")
    i, j = np.argwhere(nan_mask)[0]
    assert pixel(img, g0.values.shape, (int(i), int(j))) == acc_plot.NODATA_RGBA


def test_all_zero_grid_renders_uniform_lowest_color(outputs, tmp_path):
    flat = acc_plot.parse_grid(outputs["flat_map"])
    assert (flat.values == 0.0).all()
    rgba = acc_plot.grid_to_rgba(flat.values, 0.0, 10.0)
    lowest = acc_plot.grid_to_rgba(np.zeros((1, 1)), 0.0, 10.0)[0, 0]
    assert (rgba == lowest).all()
    img = render(outputs["flat_map"], tmp_path / "flat.png", vmin=0.0, vmax=10.0)
    for cell in ((0, 0), (12, 12), (24, 24)):
        assert pixel(img, flat.values.shape, cell) == tuple(int(v) for v in lowest)


def test_pixel_color_ordering_matches_value_ordering(outputs, tmp_path):
    """Higher ACC maps to a later colormap entry (checked via the lut index)."""
    g0 = acc_plot.parse_grid(outputs["S0"])
    vmin, vmax = 0.0, 500.0
    rgba = acc_plot.grid_to_rgba(g0.values, vmin, vmax)
    lut = acc_plot.plt.get_cmap(acc_plot.CMAP_NAME)(np.linspace(0, 1, 256), bytes=True)
    index_of = {tuple(c): k for k, c in enumerate(lut)}

    ok = ~np.isnan(g0.values)
    vals = np.clip(g0.values[ok], vmin, vmax)
    idx = np.array([index_of[tuple(c)] for c in rgba[ok]])
    order = np.argsort(vals, kind="stable")
    # colormap index must be non-decreasing when values increase
    assert (np.diff(idx[order]) >= 0).all()

    # and the same holds for actual image pixels at a sample of cells
    img = render(outputs["S0"], tmp_path / "ord.png")
    cells = [(1, 1), (5, 9), (10, 4), (15, 14), (20, 8)]
    sampled = [
        (g0.values[c], index_of[pixel(img, g0.values.shape, c)])
        for c in cells
        if not np.isnan(g0.values[c])
    ]
    sampled.sort()
    assert all(b[1] >= a[1] for a, b in zip(sampled, sampled[1:]))


def test_rendering_is_deterministic(outputs, tmp_path):
    a = tmp_path / "a.png"
    b = tmp_path / "b.png"
    render(outputs["S2"], a)
    render(outputs["S2"], b)
    assert a.read_bytes() == b.read_bytes()


def test_cli_renders_and_reports_errors(outputs, tmp_path):
    script = Path(acc_plot.__file__)
    out = tmp_path / "cli.png"
    proc = subprocess.run(
        [sys.executable, str(script), "--grid", str(outputs["S1"]),
         "--vmin", "0", "--vmax", "500", "--title", "S1", "--out", str(out)],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0 and out.exists()

    missing = subprocess.run(
        [sys.executable, str(script), "--grid", str(tmp_path / "nope.grid"),
         "--vmin", "0", "--vmax", "500", "--out", str(tmp_path / "x.png")],
        capture_output=True, text=True,
    )
    assert missing.returncode != 0 and "error" in missing.stderr

    bad_scale = subprocess.run(
        [sys.executable, str(script), "--grid", str(outputs["S1"]),
         "--vmin", "10", "--vmax", "10", "--out", str(tmp_path / "y.png")],
        capture_output=True, text=True,
    )
    assert bad_scale.returncode != 0 and "vmin < vmax" in bad_scale.stderr

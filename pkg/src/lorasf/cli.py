"""Command-line interface: run, validate, synth.

Exit codes: 0 success, 1 configuration or data error, 2 internal error.
"""

from __future__ import annotations

import argparse
import sys
import traceback
from pathlib import Path

import numpy as np

from .asfmap import AsfMap, FormatError, NoDataError, load_asf_map, write_asf_map
from .config import ConfigError, RunConfig, format_manifest, parse_config
from .engine import ScenarioResult, evaluate_grid, summary_compare
from .geo import GeoPoint
from .synth import bump_map, constant_map, gradient_map


class _Parser(argparse.ArgumentParser):
    # Usage mistakes are user errors, same exit code as config errors.
    def error(self, message: str):
        self.exit(1, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="lorasf", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="evaluate all configured scenarios and export grids")
    p_run.add_argument("--config", required=True, help="YAML run configuration")
    p_run.add_argument("--out", default=None, help="output directory (overrides config)")
    p_run.set_defaults(func=_cmd_run)

    p_val = sub.add_parser("validate", help="check a config and its ASF map files")
    p_val.add_argument("--config", required=True, help="YAML run configuration")
    p_val.set_defaults(func=_cmd_validate)

    p_syn = sub.add_parser("synth", help="generate a synthetic ASF map file")
    p_syn.add_argument("--kind", required=True, choices=["constant", "gradient", "bump"])
    p_syn.add_argument("--station", required=True, help="station id written to the header")
    p_syn.add_argument("--out", required=True, help="output map file")
    p_syn.add_argument("--origin-lat", type=float, default=33.0)
    p_syn.add_argument("--origin-lon", type=float, default=124.0)
    p_syn.add_argument("--d-lat", type=float, default=0.05)
    p_syn.add_argument("--d-lon", type=float, default=0.05)
    p_syn.add_argument("--n-lat", type=int, default=121)
    p_syn.add_argument("--n-lon", type=int, default=141)
    p_syn.add_argument("--value", type=float, help="constant: map value (us)")
    p_syn.add_argument("--base", type=float, default=0.0, help="gradient/bump: base level (us)")
    p_syn.add_argument("--grad-lat", type=float, default=0.0, help="gradient: us per degree lat")
    p_syn.add_argument("--grad-lon", type=float, default=0.0, help="gradient: us per degree lon")
    p_syn.add_argument("--anchor-lat", type=float, help="gradient: lat where value = base")
    p_syn.add_argument("--anchor-lon", type=float, help="gradient: lon where value = base")
    p_syn.add_argument("--amplitude", type=float, help="bump: peak height over base (us)")
    p_syn.add_argument("--center-lat", type=float, help="bump: center latitude")
    p_syn.add_argument("--center-lon", type=float, help="bump: center longitude")
    p_syn.add_argument("--width-lat", type=float, default=1.0, help="bump: 1-sigma width (deg)")
    p_syn.add_argument("--width-lon", type=float, default=1.0, help="bump: 1-sigma width (deg)")
    p_syn.set_defaults(func=_cmd_synth)
    return parser


def _load_network_maps(config: RunConfig) -> dict[str, AsfMap]:
    maps = {}
    for stn in config.network:
        path = config.asf_map_paths[stn.station_id]
        amap = load_asf_map(path)
        if amap.station_id != stn.station_id:
            raise ConfigError(
                f"{path}: map is for station {amap.station_id!r}, config says {stn.station_id!r}"
            )
        if amap.units != "us":
            raise ConfigError(f"{path}: ASF map units must be 'us', got {amap.units!r}")
        maps[stn.station_id] = amap
    return maps


def _stat(value: float | None) -> str:
    return "NA" if value is None else f"{value:.6f}"


def format_summary(results: list[ScenarioResult]) -> str:
    lines = ["scenario statistics (ACC in meters, over OK cells)"]
    lines.append(
        f"{'scenario':<10}{'mean':>16}{'median':>16}{'p95':>16}{'max':>16}"
        f"{'ok_cells':>10}{'nofix':>8}"
    )
    for res in results:
        st = res.stats
        lines.append(
            f"{res.scenario.tag:<10}{_stat(st.mean):>16}{_stat(st.median):>16}"
            f"{_stat(st.p95):>16}{_stat(st.max):>16}"
            f"{st.ok_cell_count:>10}{st.nofix_cell_count:>8}"
        )
    lines.append("")
    lines.append("pairwise mean-ACC reduction (baseline -> improved, over common OK cells)")
    for row in summary_compare(results):
        if row.reduction_m is None:
            lines.append(f"{row.baseline_tag} -> {row.improved_tag}: NA (no common OK cells)")
        else:
            lines.append(
                f"{row.baseline_tag} -> {row.improved_tag}: "
                f"{row.reduction_m:.6f} m ({row.reduction_pct:.4f}%)"
            )
    return "\n".join(lines) + "\n"


def _cmd_run(args: argparse.Namespace) -> int:
    config = parse_config(args.config)
    out_dir = Path(args.out) if args.out else config.output_dir
    maps = _load_network_maps(config)
    out_dir.mkdir(parents=True, exist_ok=True)
    params = config.sim_params()

    results = []
    for scn in config.scenarios:
        res = evaluate_grid(config.grid, scn, maps, config.network, params)
        results.append(res)
        export = AsfMap(
            station_id=f"ACC_{scn.tag}",
            origin=GeoPoint(config.grid.lat_min, config.grid.lon_min),
            d_lat=config.grid.step,
            d_lon=config.grid.step,
            values=np.where(res.ok_mask, res.acc, np.nan),
            units="m",
        )
        write_asf_map(export, out_dir / f"acc_{scn.tag}.grid")
        print(f"{scn.tag}: mean ACC {_stat(res.stats.mean)} m over {res.stats.ok_cell_count} cells")

    (out_dir / "summary.txt").write_text(format_summary(results), newline="\n")
    (out_dir / "run_manifest.txt").write_text(format_manifest(config), newline="\n")
    print(f"wrote {len(results)} grid(s) to {out_dir}")
    return 0


def _cmd_validate(args: argparse.Namespace) -> int:
    config = parse_config(args.config)
    _load_network_maps(config)
    print(
        f"OK: {len(config.network)} station(s), {len(config.scenarios)} scenario(s), "
        f"grid {config.grid.n_lat}x{config.grid.n_lon}"
    )
    return 0


def _require(args: argparse.Namespace, names: list[str]) -> None:
    missing = [n for n in names if getattr(args, n.replace("-", "_")) is None]
    if missing:
        raise ConfigError(f"synth --kind {args.kind} requires --" + ", --".join(missing))


def _cmd_synth(args: argparse.Namespace) -> int:
    origin = GeoPoint(args.origin_lat, args.origin_lon)
    common = (args.station, origin, args.d_lat, args.d_lon, args.n_lat, args.n_lon)
    if args.kind == "constant":
        _require(args, ["value"])
        amap = constant_map(*common, value_us=args.value)
    elif args.kind == "gradient":
        anchor = None
        if (args.anchor_lat is None) != (args.anchor_lon is None):
            raise ConfigError("synth gradient: give both --anchor-lat and --anchor-lon or neither")
        if args.anchor_lat is not None:
            anchor = GeoPoint(args.anchor_lat, args.anchor_lon)
        amap = gradient_map(
            *common,
            base_us=args.base,
            grad_lat_us_per_deg=args.grad_lat,
            grad_lon_us_per_deg=args.grad_lon,
            anchor=anchor,
        )
    else:
        _require(args, ["amplitude", "center-lat", "center-lon"])
        amap = bump_map(
            *common,
            base_us=args.base,
            amplitude_us=args.amplitude,
            center=GeoPoint(args.center_lat, args.center_lon),
            width_lat_deg=args.width_lat,
            width_lon_deg=args.width_lon,
        )
    out = Path(args.out)
    if out.parent and not out.parent.exists():
        out.parent.mkdir(parents=True, exist_ok=True)
    write_asf_map(amap, out)
    print(f"wrote {args.kind} map for {args.station}: {amap.n_lat}x{amap.n_lon} nodes -> {out}")
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, FormatError, NoDataError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception:
        traceback.print_exc()
        return 2


if __name__ == "__main__":
    sys.exit(main())

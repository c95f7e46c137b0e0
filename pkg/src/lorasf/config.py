"""Run configuration: YAML parsing with strict validation, manifest echo.

The config file is YAML. Unknown keys are rejected everywhere so typos fail
loudly instead of silently falling back to defaults. Relative ASF map paths
resolve against the config file's directory; ``output_dir`` resolves against
the working directory (and is overridable from the command line).
"""

from __future__ import annotations

import importlib.resources
from dataclasses import dataclass
from pathlib import Path
from typing import Any, IO

import yaml

from . import __version__
from .engine import DEFAULT_GRID, GridSpec, Scenario, SimParams
from .geo import EARTH_RADIUS_M, GeoPoint
from .signal_model import (
    DEFAULT_SIGMA0_M,
    DEFAULT_SNR_THRESHOLD_DB,
    NoiseModel,
    PropagationParams,
    TransmitterSpec,
)
from .wls import SPEED_OF_LIGHT_M_S


class ConfigError(Exception):
    """Invalid run configuration; the message carries the offending key path."""


@dataclass(frozen=True)
class RunConfig:
    network: tuple[TransmitterSpec, ...]
    asf_map_paths: dict[str, Path]
    noise: NoiseModel
    propagation: PropagationParams
    snr_threshold_db: float
    sigma0_m: float
    earth_radius_m: float
    grid: GridSpec
    scenarios: tuple[Scenario, ...]
    output_dir: Path

    def sim_params(self) -> SimParams:
        return SimParams(
            noise=self.noise,
            propagation=self.propagation,
            snr_threshold_db=self.snr_threshold_db,
            sigma0_m=self.sigma0_m,
            earth_radius_m=self.earth_radius_m,
        )


def paper_config_path() -> Path:
    """Path of the bundled configuration mirroring the published parameter table."""
    return Path(importlib.resources.files("lorasf") / "data" / "paper.cfg")


def _expect_mapping(value: Any, path: str) -> dict:
    if not isinstance(value, dict):
        raise ConfigError(f"{path}: expected a mapping, got {type(value).__name__}")
    return value


def _check_keys(mapping: dict, allowed: set[str], path: str) -> None:
    unknown = set(mapping) - allowed
    if unknown:
        raise ConfigError(f"{path}: unknown key(s) {sorted(unknown)}")


def _number(mapping: dict, key: str, path: str, default: float | None = None) -> float:
    if key not in mapping:
        if default is None:
            raise ConfigError(f"{path}.{key}: required")
        return default
    v = mapping[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"{path}.{key}: expected a number, got {v!r}")
    return float(v)


def _string(mapping: dict, key: str, path: str, default: str | None = None) -> str:
    if key not in mapping:
        if default is None:
            raise ConfigError(f"{path}.{key}: required")
        return default
    v = mapping[key]
    if not isinstance(v, str) or not v:
        raise ConfigError(f"{path}.{key}: expected a non-empty string, got {v!r}")
    return v


def _parse_network(
    raw: Any, base_dir: Path
) -> tuple[tuple[TransmitterSpec, ...], dict[str, Path]]:
    if not isinstance(raw, list) or not raw:
        raise ConfigError("network: expected a non-empty list of stations")
    stations = []
    map_paths: dict[str, Path] = {}
    for idx, entry in enumerate(raw):
        path = f"network[{idx}]"
        entry = _expect_mapping(entry, path)
        _check_keys(entry, {"id", "lat", "lon", "power_kw", "jitter_m", "asf_map"}, path)
        sid = _string(entry, "id", path)
        if sid in map_paths:
            raise ConfigError(f"{path}.id: duplicate station id {sid!r}")
        try:
            stn = TransmitterSpec(
                station_id=sid,
                location=GeoPoint(_number(entry, "lat", path), _number(entry, "lon", path)),
                power_kw=_number(entry, "power_kw", path),
                jitter_m=_number(entry, "jitter_m", path),
            )
        except ValueError as exc:
            raise ConfigError(f"{path}: {exc}") from None
        stations.append(stn)
        map_file = Path(_string(entry, "asf_map", path))
        if not map_file.is_absolute():
            map_file = base_dir / map_file
        map_paths[sid] = map_file
    return tuple(stations), map_paths


def _parse_scenarios(raw: Any) -> tuple[Scenario, ...]:
    if not isinstance(raw, list) or not raw:
        raise ConfigError("scenarios: expected a non-empty list")
    scenarios = []
    seen = set()
    for idx, entry in enumerate(raw):
        path = f"scenarios[{idx}]"
        if isinstance(entry, str):
            tag, ref = entry, None
        else:
            entry = _expect_mapping(entry, path)
            _check_keys(entry, {"tag", "reference_lat", "reference_lon"}, path)
            tag = _string(entry, "tag", path)
            if "reference_lat" in entry or "reference_lon" in entry:
                ref = GeoPoint(
                    _number(entry, "reference_lat", path),
                    _number(entry, "reference_lon", path),
                )
            else:
                ref = None
        if tag == "S2" and ref is None:
            raise ConfigError(f"{path}: S2 requires reference_lat and reference_lon")
        try:
            scn = Scenario(tag, ref)
        except ValueError as exc:
            raise ConfigError(f"{path}: {exc}") from None
        if tag in seen:
            raise ConfigError(f"{path}: duplicate scenario tag {tag!r}")
        seen.add(tag)
        scenarios.append(scn)
    return tuple(scenarios)


_TOP_KEYS = {
    "network",
    "noise",
    "propagation",
    "snr_threshold_db",
    "sigma0_m",
    "earth_radius_m",
    "grid",
    "scenarios",
    "output_dir",
}


def parse_config(source: str | Path | IO[str]) -> RunConfig:
    """Parse and validate a YAML run configuration.

    Raises ConfigError describing the first offending key. Map files are not
    opened here; ``validate``/``run`` do that.
    """
    if isinstance(source, (str, Path)):
        cfg_path = Path(source)
        try:
            text = cfg_path.read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config {cfg_path}: {exc}") from None
        base_dir = cfg_path.parent
    else:
        text = source.read()
        base_dir = Path.cwd()

    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"config is not valid YAML: {exc}") from None
    doc = _expect_mapping(doc, "top level")
    _check_keys(doc, _TOP_KEYS, "top level")
    if "network" not in doc:
        raise ConfigError("network: required")
    if "scenarios" not in doc:
        raise ConfigError("scenarios: required")

    network, map_paths = _parse_network(doc["network"], base_dir)
    scenarios = _parse_scenarios(doc["scenarios"])

    noise_raw = _expect_mapping(doc.get("noise", {}), "noise")
    _check_keys(noise_raw, {"field_strength_dbuv", "percentile", "season"}, "noise")
    noise = NoiseModel(
        noise_field_strength=_number(noise_raw, "field_strength_dbuv", "noise", 62.0),
        noise_percentile=_number(noise_raw, "percentile", "noise", 95.0),
        season_label=_string(noise_raw, "season", "noise", "Averaged"),
    )

    prop_raw = _expect_mapping(doc.get("propagation", {}), "propagation")
    _check_keys(prop_raw, {"e0_dbuv", "d0_m", "alpha_db_per_km"}, "propagation")
    try:
        propagation = PropagationParams(
            e0_dbuv=_number(prop_raw, "e0_dbuv", "propagation", 100.0),
            d0_m=_number(prop_raw, "d0_m", "propagation", 1_000.0),
            alpha_db_per_km=_number(prop_raw, "alpha_db_per_km", "propagation", 0.007),
        )
    except ValueError as exc:
        raise ConfigError(f"propagation: {exc}") from None

    grid_raw = _expect_mapping(doc.get("grid", {}), "grid")
    _check_keys(grid_raw, {"lat_min", "lat_max", "lon_min", "lon_max", "step"}, "grid")
    try:
        grid = GridSpec(
            lat_min=_number(grid_raw, "lat_min", "grid", DEFAULT_GRID.lat_min),
            lat_max=_number(grid_raw, "lat_max", "grid", DEFAULT_GRID.lat_max),
            lon_min=_number(grid_raw, "lon_min", "grid", DEFAULT_GRID.lon_min),
            lon_max=_number(grid_raw, "lon_max", "grid", DEFAULT_GRID.lon_max),
            step=_number(grid_raw, "step", "grid", DEFAULT_GRID.step),
        )
    except ValueError as exc:
        raise ConfigError(f"grid: {exc}") from None
    if grid.n_lat < 2 or grid.n_lon < 2:
        raise ConfigError(
            f"grid: lattice is {grid.n_lat}x{grid.n_lon}; exports need >= 2 nodes per axis"
        )

    sigma0 = _number(doc, "sigma0_m", "top level", DEFAULT_SIGMA0_M)
    if sigma0 <= 0.0:
        raise ConfigError(f"sigma0_m: must be > 0, got {sigma0}")
    radius = _number(doc, "earth_radius_m", "top level", EARTH_RADIUS_M)
    if radius <= 0.0:
        raise ConfigError(f"earth_radius_m: must be > 0, got {radius}")

    return RunConfig(
        network=network,
        asf_map_paths=map_paths,
        noise=noise,
        propagation=propagation,
        snr_threshold_db=_number(doc, "snr_threshold_db", "top level", DEFAULT_SNR_THRESHOLD_DB),
        sigma0_m=sigma0,
        earth_radius_m=radius,
        grid=grid,
        scenarios=scenarios,
        output_dir=Path(_string(doc, "output_dir", "top level", "out")),
    )


def config_to_mapping(config: RunConfig) -> dict:
    """Config as plain YAML-serializable data, paths resolved absolute."""
    scenarios: list[Any] = []
    for scn in config.scenarios:
        if scn.reference_point is None:
            scenarios.append(scn.tag)
        else:
            scenarios.append(
                {
                    "tag": scn.tag,
                    "reference_lat": scn.reference_point.lat,
                    "reference_lon": scn.reference_point.lon,
                }
            )
    return {
        "network": [
            {
                "id": stn.station_id,
                "lat": stn.location.lat,
                "lon": stn.location.lon,
                "power_kw": stn.power_kw,
                "jitter_m": stn.jitter_m,
                "asf_map": str(config.asf_map_paths[stn.station_id].resolve()),
            }
            for stn in config.network
        ],
        "noise": {
            "field_strength_dbuv": config.noise.noise_field_strength,
            "percentile": config.noise.noise_percentile,
            "season": config.noise.season_label,
        },
        "propagation": {
            "e0_dbuv": config.propagation.e0_dbuv,
            "d0_m": config.propagation.d0_m,
            "alpha_db_per_km": config.propagation.alpha_db_per_km,
        },
        "snr_threshold_db": config.snr_threshold_db,
        "sigma0_m": config.sigma0_m,
        "earth_radius_m": config.earth_radius_m,
        "grid": {
            "lat_min": config.grid.lat_min,
            "lat_max": config.grid.lat_max,
            "lon_min": config.grid.lon_min,
            "lon_max": config.grid.lon_max,
            "step": config.grid.step,
        },
        "scenarios": scenarios,
        "output_dir": str(config.output_dir.resolve()),
    }


def format_manifest(config: RunConfig) -> str:
    """Manifest text: constants header plus a replayable resolved config echo.

    The body is itself a valid config file, so a run can be reproduced with
    ``lorasf run --config run_manifest.txt``.
    """
    header = (
        f"# lorasf run manifest (version {__version__})\n"
        f"# speed_of_light_m_s: {SPEED_OF_LIGHT_M_S!r}\n"
    )
    body = yaml.safe_dump(config_to_mapping(config), sort_keys=True, default_flow_style=False)
    return header + body

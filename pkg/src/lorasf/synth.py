"""Synthetic ASF maps so runs and tests need no surveyed data.

Three shapes: a constant field, a linear gradient, and a Gaussian bump.
Values are microseconds and must respect the map sanity bound; the AsfMap
constructor enforces it.
"""

from __future__ import annotations

import numpy as np

from .asfmap import AsfMap
from .geo import GeoPoint


def _lattice(origin: GeoPoint, d_lat: float, d_lon: float, n_lat: int, n_lon: int):
    lats = origin.lat + np.arange(n_lat) * d_lat
    lons = origin.lon + np.arange(n_lon) * d_lon
    return np.meshgrid(lats, lons, indexing="ij")


def constant_map(
    station_id: str,
    origin: GeoPoint,
    d_lat: float,
    d_lon: float,
    n_lat: int,
    n_lon: int,
    value_us: float,
) -> AsfMap:
    values = np.full((n_lat, n_lon), float(value_us))
    return AsfMap(station_id, origin, d_lat, d_lon, values)


def gradient_map(
    station_id: str,
    origin: GeoPoint,
    d_lat: float,
    d_lon: float,
    n_lat: int,
    n_lon: int,
    base_us: float,
    grad_lat_us_per_deg: float,
    grad_lon_us_per_deg: float,
    anchor: GeoPoint | None = None,
) -> AsfMap:
    """Linear field: base + g_lat*(lat - anchor.lat) + g_lon*(lon - anchor.lon).

    ``anchor`` is where the field equals ``base_us`` (defaults to the origin);
    anchoring at a reference station makes the base the exact broadcast value.
    """
    if anchor is None:
        anchor = origin
    lat, lon = _lattice(origin, d_lat, d_lon, n_lat, n_lon)
    values = (
        base_us
        + grad_lat_us_per_deg * (lat - anchor.lat)
        + grad_lon_us_per_deg * (lon - anchor.lon)
    )
    return AsfMap(station_id, origin, d_lat, d_lon, values)


def bump_map(
    station_id: str,
    origin: GeoPoint,
    d_lat: float,
    d_lon: float,
    n_lat: int,
    n_lon: int,
    base_us: float,
    amplitude_us: float,
    center: GeoPoint,
    width_lat_deg: float,
    width_lon_deg: float,
) -> AsfMap:
    """Gaussian bump: base + amp * exp(-((dlat/w_lat)^2 + (dlon/w_lon)^2) / 2)."""
    if not (width_lat_deg > 0.0 and width_lon_deg > 0.0):
        raise ValueError("bump widths must be positive")
    lat, lon = _lattice(origin, d_lat, d_lon, n_lat, n_lon)
    z = ((lat - center.lat) / width_lat_deg) ** 2 + ((lon - center.lon) / width_lon_deg) ** 2
    values = base_us + amplitude_us * np.exp(-0.5 * z)
    return AsfMap(station_id, origin, d_lat, d_lon, values)

"""Spherical-earth geodesy and construction of the positioning geometry matrix.

All angles are degrees at the API boundary and radians internally. Distances
are meters on a sphere of radius ``EARTH_RADIUS_M`` (overridable per call for
sensitivity studies). Bearings are radians clockwise from true north in
``[0, 2*pi)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

# Mean earth radius. Positioning errors studied here are 1-1000 m, so
# ellipsoidal corrections (<0.6% in range) are irrelevant.
EARTH_RADIUS_M = 6_371_000.0

# Stations closer than this to the receiver have undefined bearing at grid
# resolution; treat the geometry as degenerate.
STATION_MIN_RANGE_M = 1.0


class GeodesyError(Exception):
    pass


class StationTooClose(GeodesyError):
    """A station lies within ``STATION_MIN_RANGE_M`` of the receiver."""


class InsufficientStations(GeodesyError):
    """Fewer than three stations were supplied for a position geometry."""


@dataclass(frozen=True)
class GeoPoint:
    """Geographic point; lat in [-90, 90], lon in [-180, 180) degrees."""

    lat: float
    lon: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.lat) and math.isfinite(self.lon)):
            raise ValueError(f"non-finite coordinates ({self.lat}, {self.lon})")
        if not -90.0 <= self.lat <= 90.0:
            raise ValueError(f"latitude {self.lat} outside [-90, 90]")
        if not -180.0 <= self.lon < 180.0:
            raise ValueError(f"longitude {self.lon} outside [-180, 180)")


def geodesic_range_bearing(
    a: GeoPoint, b: GeoPoint, radius: float = EARTH_RADIUS_M
) -> tuple[float, float]:
    """Great-circle range (m) and initial bearing (rad from north, clockwise)
    from ``a`` to ``b``.

    Haversine for the arc, spherical forward azimuth for the bearing.
    Identical points return (0.0, 0.0); at a pole the azimuth formula's
    atan2(0, 0) = 0 convention applies.
    """
    if a.lat == b.lat and a.lon == b.lon:
        return 0.0, 0.0
    lat1 = math.radians(a.lat)
    lat2 = math.radians(b.lat)
    dlat = math.radians(b.lat - a.lat)
    dlon = math.radians(b.lon - a.lon)

    h = math.sin(dlat / 2.0) ** 2 + math.cos(lat1) * math.cos(lat2) * math.sin(dlon / 2.0) ** 2
    h = min(1.0, h)
    rng = 2.0 * radius * math.asin(math.sqrt(h))

    y = math.sin(dlon) * math.cos(lat2)
    x = math.cos(lat1) * math.sin(lat2) - math.sin(lat1) * math.cos(lat2) * math.cos(dlon)
    bearing = math.atan2(y, x) % (2.0 * math.pi)
    if bearing >= 2.0 * math.pi:
        # a tiny negative azimuth wraps to exactly 2*pi in float modulo
        bearing = 0.0
    return rng, bearing


def build_geometry_matrix(
    rx: GeoPoint, stations: list[GeoPoint], radius: float = EARTH_RADIUS_M
) -> np.ndarray:
    """Linearized observation matrix for a receiver and its stations.

    Row i is [-sin(theta_i), -cos(theta_i), 1] where theta_i is the bearing
    from ``rx`` to station i: the negated east/north unit vector toward the
    station plus a ones column for receiver clock bias. Row order follows
    the input station order.

    Raises:
        InsufficientStations: fewer than 3 stations.
        StationTooClose: a station within ``STATION_MIN_RANGE_M`` of rx.
    """
    if len(stations) < 3:
        raise InsufficientStations(f"need >= 3 stations, got {len(stations)}")
    rows = np.empty((len(stations), 3), dtype=float)
    for i, stn in enumerate(stations):
        rng, theta = geodesic_range_bearing(rx, stn, radius=radius)
        if rng < STATION_MIN_RANGE_M:
            raise StationTooClose(
                f"station {i} is {rng:.3g} m from receiver (< {STATION_MIN_RANGE_M} m)"
            )
        rows[i, 0] = -math.sin(theta)
        rows[i, 1] = -math.cos(theta)
        rows[i, 2] = 1.0
    return rows

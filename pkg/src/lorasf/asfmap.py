"""Per-station spatial-ASF rasters: file I/O, bilinear sampling, reference lookup.

Grid file format (``ASFGRID v1``, plain text)::

    ASFGRID v1 <station_id> <origin_lat> <origin_lon> <d_lat> <d_lon> <n_lat> <n_lon>
    # units: us
    <n_lat rows of n_lon whitespace-separated values>

Rows run south to north, values within a row west to east, so the header
origin is the (min-lat, min-lon) node. ``NA`` marks NODATA cells. Decimal
values use ``.`` and scientific notation is accepted. Lines starting with
``#`` are comments; the writer emits exactly one declaring the value units
(``us`` for ASF delay maps, ``m`` for exported accuracy grids, which reuse
this format).

ASF values are stored in microseconds; the one conversion to meters happens
in the solver. Maps are immutable after load and safe for concurrent reads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import IO

import numpy as np

from .geo import GeoPoint, geodesic_range_bearing

NODATA_TOKEN = "NA"

# Sanity bound for ASF delay maps (microseconds). Real spatial ASF is a few
# microseconds; anything larger is a corrupt or misdeclared file. Grids in
# other units (exported accuracy, meters) are exempt.
ASF_BOUND_US = 100.0

# Tolerance, in fractional cell units, for treating a sample point as lying
# exactly on a grid node or on the raster boundary.
_SNAP = 1e-9


class FormatError(Exception):
    """Malformed ASFGRID stream (bad header, row count, or token)."""


class NoDataError(Exception):
    """Operation requires at least one non-NODATA node."""


@dataclass(frozen=True)
class AsfSample:
    """Interpolation result; ``value`` is meaningless when ``valid`` is False."""

    value: float
    valid: bool

    @staticmethod
    def invalid() -> "AsfSample":
        return AsfSample(float("nan"), False)


@dataclass(frozen=True, eq=False)
class AsfMap:
    """Raster of ASF delay (microseconds) on a regular lat/lon grid.

    ``values`` has shape (n_lat, n_lon) with row 0 at the southern edge;
    NODATA cells are NaN.
    """

    station_id: str
    origin: GeoPoint
    d_lat: float
    d_lon: float
    values: np.ndarray
    units: str = "us"

    def __post_init__(self) -> None:
        if not self.station_id or any(c.isspace() for c in self.station_id):
            raise ValueError(f"invalid station_id {self.station_id!r}")
        if not (self.d_lat > 0.0 and self.d_lon > 0.0):
            raise ValueError(f"cell size must be positive, got ({self.d_lat}, {self.d_lon})")
        vals = np.asarray(self.values, dtype=float)
        if vals.ndim != 2 or vals.shape[0] < 2 or vals.shape[1] < 2:
            raise ValueError(f"grid must be at least 2x2 nodes, got shape {vals.shape}")
        finite_ok = np.isfinite(vals) | np.isnan(vals)
        if not finite_ok.all():
            raise ValueError("grid contains non-finite values")
        if self.units == "us":
            data = vals[np.isfinite(vals)]
            if data.size and (np.abs(data) > ASF_BOUND_US).any():
                raise ValueError(f"ASF value outside +-{ASF_BOUND_US} us sanity bound")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @property
    def n_lat(self) -> int:
        return self.values.shape[0]

    @property
    def n_lon(self) -> int:
        return self.values.shape[1]

    def lat_at(self, i: int) -> float:
        return self.origin.lat + i * self.d_lat

    def lon_at(self, j: int) -> float:
        return self.origin.lon + j * self.d_lon

    def node_point(self, i: int, j: int) -> GeoPoint:
        return GeoPoint(self.lat_at(i), self.lon_at(j))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, AsfMap):
            return NotImplemented
        return (
            self.station_id == other.station_id
            and self.origin == other.origin
            and self.d_lat == other.d_lat
            and self.d_lon == other.d_lon
            and self.units == other.units
            and self.values.shape == other.values.shape
            and np.array_equal(self.values, other.values, equal_nan=True)
        )


def _fmt(x: float) -> str:
    if math.isnan(x):
        return NODATA_TOKEN
    return repr(float(x))


def format_asf_map(amap: AsfMap) -> str:
    """Canonical text serialization (the writer side of the round trip)."""
    lines = [
        "ASFGRID v1 {} {} {} {} {} {} {}".format(
            amap.station_id,
            repr(float(amap.origin.lat)),
            repr(float(amap.origin.lon)),
            repr(float(amap.d_lat)),
            repr(float(amap.d_lon)),
            amap.n_lat,
            amap.n_lon,
        ),
        f"# units: {amap.units}",
    ]
    for row in amap.values:
        lines.append(" ".join(_fmt(v) for v in row))
    return "\n".join(lines) + "\n"


def write_asf_map(amap: AsfMap, dest: IO[str] | str | Path) -> None:
    text = format_asf_map(amap)
    if isinstance(dest, (str, Path)):
        with open(dest, "w", newline="\n") as fh:
            fh.write(text)
    else:
        dest.write(text)


def _parse_float(token: str, where: str) -> float:
    try:
        return float(token)
    except ValueError:
        raise FormatError(f"{where}: cannot parse {token!r} as a number") from None


def _parse_int(token: str, where: str) -> int:
    try:
        return int(token)
    except ValueError:
        raise FormatError(f"{where}: cannot parse {token!r} as an integer") from None


def load_asf_map(source: IO[str] | IO[bytes] | str | Path) -> AsfMap:
    """Parse an ASFGRID v1 stream (or file path) into an :class:`AsfMap`.

    Raises:
        FormatError: malformed header, wrong row/column counts, bad tokens.
        ValueError: values that parse but violate map invariants
            (non-finite, or outside the sanity bound for ``us`` grids).
    """
    if isinstance(source, (str, Path)):
        with open(source, "r") as fh:
            return load_asf_map(fh)
    raw = source.read()
    if isinstance(raw, bytes):
        try:
            raw = raw.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise FormatError(f"stream is not valid UTF-8: {exc}") from None
    return _parse_text(raw)


def _parse_text(text: str) -> AsfMap:
    units = "us"
    header: str | None = None
    data_lines: list[str] = []
    for line in text.splitlines():
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
            data_lines.append(stripped)

    if header is None:
        raise FormatError("empty stream")
    tokens = header.split()
    if len(tokens) != 9 or tokens[0] != "ASFGRID" or tokens[1] != "v1":
        raise FormatError(f"bad header (expected 'ASFGRID v1' and 7 fields): {header!r}")
    station_id = tokens[2]
    origin_lat = _parse_float(tokens[3], "header origin_lat")
    origin_lon = _parse_float(tokens[4], "header origin_lon")
    d_lat = _parse_float(tokens[5], "header d_lat")
    d_lon = _parse_float(tokens[6], "header d_lon")
    n_lat = _parse_int(tokens[7], "header n_lat")
    n_lon = _parse_int(tokens[8], "header n_lon")
    if n_lat < 2 or n_lon < 2:
        raise FormatError(f"grid must be at least 2x2, header declares {n_lat}x{n_lon}")
    if not (d_lat > 0.0 and d_lon > 0.0):
        raise FormatError(f"cell size must be positive, header declares ({d_lat}, {d_lon})")

    if len(data_lines) != n_lat:
        raise FormatError(f"expected {n_lat} data rows, found {len(data_lines)}")
    values = np.empty((n_lat, n_lon), dtype=float)
    for i, line in enumerate(data_lines):
        tokens = line.split()
        if len(tokens) != n_lon:
            raise FormatError(f"row {i}: expected {n_lon} values, found {len(tokens)}")
        for j, tok in enumerate(tokens):
            if tok == NODATA_TOKEN:
                values[i, j] = math.nan
                continue
            v = _parse_float(tok, f"row {i}")
            if not math.isfinite(v):
                # only the NA token may mark missing data
                raise ValueError(f"row {i}: non-finite value {tok!r}")
            values[i, j] = v

    try:
        origin = GeoPoint(origin_lat, origin_lon)
    except ValueError as exc:
        raise FormatError(f"header origin: {exc}") from None
    return AsfMap(station_id, origin, d_lat, d_lon, values, units=units)


def interpolate_asf(amap: AsfMap, p: GeoPoint) -> AsfSample:
    """Bilinear sample of the map at ``p``.

    Points outside the raster hull are invalid. A point that falls exactly on
    a grid node returns that node's value (and validity) directly; genuine
    interpolation is invalid if any corner of the enclosing cell is NODATA,
    so no value is ever fabricated over unmeasured terrain.
    """
    fi = (p.lat - amap.origin.lat) / amap.d_lat
    fj = (p.lon - amap.origin.lon) / amap.d_lon
    if not (-_SNAP <= fi <= amap.n_lat - 1 + _SNAP and -_SNAP <= fj <= amap.n_lon - 1 + _SNAP):
        return AsfSample.invalid()

    i0 = min(max(int(math.floor(fi)), 0), amap.n_lat - 2)
    j0 = min(max(int(math.floor(fj)), 0), amap.n_lon - 2)
    t = fi - i0
    s = fj - j0
    if t < _SNAP:
        t = 0.0
    elif t > 1.0 - _SNAP:
        t = 1.0
    if s < _SNAP:
        s = 0.0
    elif s > 1.0 - _SNAP:
        s = 1.0

    if (t == 0.0 or t == 1.0) and (s == 0.0 or s == 1.0):
        v = float(amap.values[i0 + int(t), j0 + int(s)])
        return AsfSample(v, True) if math.isfinite(v) else AsfSample.invalid()

    c00 = amap.values[i0, j0]
    c01 = amap.values[i0, j0 + 1]
    c10 = amap.values[i0 + 1, j0]
    c11 = amap.values[i0 + 1, j0 + 1]
    if math.isnan(c00) or math.isnan(c01) or math.isnan(c10) or math.isnan(c11):
        return AsfSample.invalid()
    v = (1.0 - t) * ((1.0 - s) * c00 + s * c01) + t * ((1.0 - s) * c10 + s * c11)
    return AsfSample(float(v), True)


def interpolate_asf_many(
    amap: AsfMap, lat: np.ndarray, lon: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized :func:`interpolate_asf` over coordinate arrays.

    Returns ``(values, valid)``; invalid entries are NaN. Mirrors the scalar
    sampling rules exactly (same snap tolerance, node passthrough, and
    corner-NODATA handling), which the test suite checks pointwise.
    """
    lat = np.asarray(lat, dtype=float)
    lon = np.asarray(lon, dtype=float)
    fi = (lat - amap.origin.lat) / amap.d_lat
    fj = (lon - amap.origin.lon) / amap.d_lon
    inside = (
        (fi >= -_SNAP)
        & (fi <= amap.n_lat - 1 + _SNAP)
        & (fj >= -_SNAP)
        & (fj <= amap.n_lon - 1 + _SNAP)
    )

    i0 = np.clip(np.floor(fi), 0, amap.n_lat - 2).astype(np.intp)
    j0 = np.clip(np.floor(fj), 0, amap.n_lon - 2).astype(np.intp)
    t = fi - i0
    s = fj - j0
    t = np.where(t < _SNAP, 0.0, t)
    t = np.where(t > 1.0 - _SNAP, 1.0, t)
    s = np.where(s < _SNAP, 0.0, s)
    s = np.where(s > 1.0 - _SNAP, 1.0, s)

    on_node = ((t == 0.0) | (t == 1.0)) & ((s == 0.0) | (s == 1.0))
    node_val = amap.values[i0 + (t == 1.0), j0 + (s == 1.0)]

    c00 = amap.values[i0, j0]
    c01 = amap.values[i0, j0 + 1]
    c10 = amap.values[i0 + 1, j0]
    c11 = amap.values[i0 + 1, j0 + 1]
    corners_ok = np.isfinite(c00) & np.isfinite(c01) & np.isfinite(c10) & np.isfinite(c11)
    bil = (1.0 - t) * ((1.0 - s) * c00 + s * c01) + t * ((1.0 - s) * c10 + s * c11)

    values = np.where(on_node, node_val, bil)
    valid = inside & np.where(on_node, np.isfinite(node_val), corners_ok)
    return np.where(valid, values, np.nan), valid


def reference_asf(amap: AsfMap, ref_point: GeoPoint) -> float:
    """Value at the non-NODATA node nearest to ``ref_point`` (great circle).

    Ties break to the lower latitude index, then the lower longitude index.
    The reference is deliberately a node value, not an interpolation: the
    wide-area scenario broadcasts what was measured at the survey node.

    Raises:
        NoDataError: every node is NODATA.
    """
    best: float | None = None
    best_dist = math.inf
    for i in range(amap.n_lat):
        for j in range(amap.n_lon):
            v = amap.values[i, j]
            if math.isnan(v):
                continue
            dist, _ = geodesic_range_bearing(amap.node_point(i, j), ref_point)
            if dist < best_dist:
                best_dist = dist
                best = float(v)
    if best is None:
        raise NoDataError(f"map {amap.station_id!r} has no usable nodes")
    return best

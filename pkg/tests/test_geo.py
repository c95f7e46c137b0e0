"""Geodesy primitives and geometry-matrix construction."""

import math

import numpy as np
import pytest

from lorasf.geo import (
    EARTH_RADIUS_M,
    GeoPoint,
    InsufficientStations,
    StationTooClose,
    build_geometry_matrix,
    geodesic_range_bearing,
)

from oracles import destination, lawcos_distance

# One degree of arc on the R = 6371 km sphere, frozen from the
# law-of-cosines oracle.
ONE_DEGREE_ARC_M = 111_194.9266


def test_geopoint_validation():
    GeoPoint(-90.0, -180.0)
    GeoPoint(90.0, 179.999)
    with pytest.raises(ValueError):
        GeoPoint(90.5, 0.0)
    with pytest.raises(ValueError):
        GeoPoint(0.0, 180.0)
    with pytest.raises(ValueError):
        GeoPoint(float("nan"), 0.0)


def test_identity_point_is_zero_range_zero_bearing():
    rng, bearing = geodesic_range_bearing(GeoPoint(37.0, 127.0), GeoPoint(37.0, 127.0))
    assert rng == 0.0
    assert bearing == 0.0


def test_one_degree_east_on_equator():
    oracle = lawcos_distance(0.0, 0.0, 0.0, 1.0)
    assert oracle == pytest.approx(ONE_DEGREE_ARC_M, abs=0.01)
    rng, bearing = geodesic_range_bearing(GeoPoint(0.0, 0.0), GeoPoint(0.0, 1.0))
    assert rng == pytest.approx(ONE_DEGREE_ARC_M, abs=0.01)
    assert bearing == pytest.approx(math.pi / 2, abs=1e-12)


def test_one_degree_north_matches_meridian_symmetry():
    rng, bearing = geodesic_range_bearing(GeoPoint(0.0, 0.0), GeoPoint(1.0, 0.0))
    assert rng == pytest.approx(ONE_DEGREE_ARC_M, abs=0.01)
    assert bearing == pytest.approx(0.0, abs=1e-12)


def test_range_agrees_with_law_of_cosines_oracle():
    rng = np.random.default_rng(7)
    for _ in range(200):
        a = GeoPoint(float(rng.uniform(-80, 80)), float(rng.uniform(-180, 179)))
        b = GeoPoint(float(rng.uniform(-80, 80)), float(rng.uniform(-180, 179)))
        got, _ = geodesic_range_bearing(a, b)
        want = lawcos_distance(a.lat, a.lon, b.lat, b.lon)
        # law of cosines loses precision on short arcs; compare loosely there
        assert got == pytest.approx(want, rel=1e-9, abs=0.5)


def test_range_symmetry_exact():
    rng = np.random.default_rng(8)
    for _ in range(200):
        a = GeoPoint(float(rng.uniform(-90, 90)), float(rng.uniform(-180, 179.9)))
        b = GeoPoint(float(rng.uniform(-90, 90)), float(rng.uniform(-180, 179.9)))
        assert geodesic_range_bearing(a, b)[0] == geodesic_range_bearing(b, a)[0]


def test_equatorial_bearing_antisymmetry():
    rng = np.random.default_rng(9)
    for _ in range(100):
        a = GeoPoint(0.0, float(rng.uniform(-170, 170)))
        b = GeoPoint(0.0, float(rng.uniform(-170, 170)))
        if a.lon == b.lon:
            continue
        _, fwd = geodesic_range_bearing(a, b)
        _, back = geodesic_range_bearing(b, a)
        diff = (back - fwd) % (2 * math.pi)
        assert diff == pytest.approx(math.pi, abs=1e-12)


def test_bearing_range_convention():
    rng = np.random.default_rng(10)
    for _ in range(300):
        a = GeoPoint(float(rng.uniform(-89, 89)), float(rng.uniform(-180, 179.9)))
        b = GeoPoint(float(rng.uniform(-89, 89)), float(rng.uniform(-180, 179.9)))
        _, bearing = geodesic_range_bearing(a, b)
        assert 0.0 <= bearing < 2 * math.pi


def test_custom_radius_scales_range():
    a, b = GeoPoint(10.0, 20.0), GeoPoint(11.0, 21.0)
    r1, _ = geodesic_range_bearing(a, b)
    r2, _ = geodesic_range_bearing(a, b, radius=2 * EARTH_RADIUS_M)
    assert r2 == pytest.approx(2 * r1, rel=1e-15)


def test_geometry_row_station_due_north():
    rx = GeoPoint(37.0, 127.0)
    stations = [
        GeoPoint(38.0, 127.0),  # due north
        GeoPoint(37.0, 128.0),
        GeoPoint(36.0, 126.0),
    ]
    G = build_geometry_matrix(rx, stations)
    assert G[0] == pytest.approx([0.0, -1.0, 1.0], abs=1e-12)
    assert G.shape == (3, 3)


def test_geometry_rows_at_symmetric_bearings():
    """Stations placed by the direct-problem oracle at 0, 2pi/3, 4pi/3."""
    rx = GeoPoint(0.0, 0.0)
    bearings = [0.0, 2 * math.pi / 3, 4 * math.pi / 3]
    stations = [GeoPoint(*destination(rx.lat, rx.lon, b, 300_000.0)) for b in bearings]
    G = build_geometry_matrix(rx, stations)
    root3_2 = math.sqrt(3.0) / 2.0
    expected = np.array(
        [
            [0.0, -1.0, 1.0],
            [-root3_2, 0.5, 1.0],
            [root3_2, 0.5, 1.0],
        ]
    )
    np.testing.assert_allclose(G, expected, atol=1e-9)


def test_geometry_unit_norm_and_ones_column():
    rng = np.random.default_rng(11)
    for _ in range(50):
        rx = GeoPoint(float(rng.uniform(-60, 60)), float(rng.uniform(-170, 170)))
        stations = [
            GeoPoint(*destination(rx.lat, rx.lon, float(b), float(d)))
            for b, d in zip(rng.uniform(0, 2 * math.pi, 4), rng.uniform(5e4, 1e6, 4))
        ]
        G = build_geometry_matrix(rx, stations)
        norms = np.hypot(G[:, 0], G[:, 1])
        np.testing.assert_allclose(norms, 1.0, atol=1e-12)
        assert (G[:, 2] == 1.0).all()


@pytest.mark.parametrize("phi", [math.pi / 2, math.pi])
def test_rotation_of_stations_rotates_geometry_columns(phi):
    rx = GeoPoint(20.0, 50.0)
    bearings = [0.3, 1.9, 4.0]
    dist = 400_000.0
    G_a = build_geometry_matrix(
        rx, [GeoPoint(*destination(rx.lat, rx.lon, b, dist)) for b in bearings]
    )
    G_b = build_geometry_matrix(
        rx, [GeoPoint(*destination(rx.lat, rx.lon, b + phi, dist)) for b in bearings]
    )
    c, s = math.cos(phi), math.sin(phi)
    for row_a, row_b in zip(G_a, G_b):
        ea, na = -row_a[0], -row_a[1]
        # rotating the station bearing by phi rotates the unit vector by phi
        expect_e = ea * c + na * s
        expect_n = -ea * s + na * c
        assert -row_b[0] == pytest.approx(expect_e, abs=1e-9)
        assert -row_b[1] == pytest.approx(expect_n, abs=1e-9)


def test_insufficient_stations():
    rx = GeoPoint(0.0, 0.0)
    with pytest.raises(InsufficientStations):
        build_geometry_matrix(rx, [GeoPoint(1.0, 0.0), GeoPoint(0.0, 1.0)])


def test_station_coincident_with_receiver():
    rx = GeoPoint(36.0, 128.0)
    stations = [GeoPoint(36.0, 128.0), GeoPoint(37.0, 128.0), GeoPoint(36.0, 129.0)]
    with pytest.raises(StationTooClose):
        build_geometry_matrix(rx, stations)

"""Shared test network and synthetic-map builders."""

import numpy as np

from lorasf import GeoPoint, TransmitterSpec
from lorasf.synth import bump_map, gradient_map

# Incheon reference station (wide-area correction broadcast point).
REF_POINT = GeoPoint(37.449232, 126.593994)

# Map lattice covering the full default study area with margin, aligned so
# the reference point's nearest node is shared by all stations.
MAP_ORIGIN = GeoPoint(32.0, 123.0)
MAP_STEP = 0.05
MAP_N_LAT = 165
MAP_N_LON = 185


def korea_network() -> list[TransmitterSpec]:
    return [
        TransmitterSpec("pohang", GeoPoint(36.192, 129.343), 150.0, 2.11),
        TransmitterSpec("gwangju", GeoPoint(35.07, 126.53), 50.0, 3.21),
        TransmitterSpec("socheong", GeoPoint(37.76, 124.743), 8.0, 2.11),
    ]


def suite_maps(rng: np.random.Generator, kind: str, ref: GeoPoint = REF_POINT):
    """Per-station synthetic maps for one scenario-comparison run.

    Construction mirrors the operational setting the scenarios model:
    each station has a dominant path-specific offset (captured by the
    reference broadcast) plus a smooth spatial term that differs across
    stations (what S2 cannot remove away from the reference).
    """
    base = rng.permutation([-3.0, 0.0, 3.0]) + rng.uniform(-0.5, 0.5, 3)

    def signed(lo, hi):
        return float(rng.choice([-1.0, 1.0]) * rng.uniform(lo, hi))

    maps = {}
    for k, sid in enumerate(("pohang", "gwangju", "socheong")):
        common = (sid, MAP_ORIGIN, MAP_STEP, MAP_STEP, MAP_N_LAT, MAP_N_LON)
        if kind == "gradient":
            maps[sid] = gradient_map(
                *common,
                base_us=base[k],
                grad_lat_us_per_deg=signed(0.05, 0.3),
                grad_lon_us_per_deg=signed(0.05, 0.3),
                anchor=ref,
            )
        elif kind == "bump":
            # Centered well away from the reference so the broadcast value
            # stays close to the station's base offset.
            center = GeoPoint(rng.uniform(33.5, 35.5), rng.uniform(128.5, 130.5))
            maps[sid] = bump_map(
                *common,
                base_us=base[k],
                amplitude_us=signed(0.5, 1.5),
                center=center,
                width_lat_deg=rng.uniform(0.8, 1.4),
                width_lon_deg=rng.uniform(0.8, 1.4),
            )
        else:
            raise ValueError(kind)
    return maps

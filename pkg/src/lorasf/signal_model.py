"""Received signal strength, SNR masking, and per-station range weights.

The groundwave link model here is a deliberate stand-in: log-inverse-distance
spreading plus a linear attenuation term, three parameters, monotone in
distance. It reproduces threshold-mask behavior (who is usable where) without
claiming fidelity to ITU groundwave curves, which are out of scope.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .geo import EARTH_RADIUS_M, GeoPoint, geodesic_range_bearing

# Closest meaningful link distance; shorter ranges clamp here.
MIN_DISTANCE_M = 1_000.0

DEFAULT_SNR_THRESHOLD_DB = -15.0
DEFAULT_SIGMA0_M = 10.0


@dataclass(frozen=True)
class PropagationParams:
    """Field-strength model constants.

    e0_dbuv: field strength of a 1 kW transmitter at ``d0_m``, dB(uV/m).
    d0_m: reference distance, meters.
    alpha_db_per_km: linear attenuation beyond ``d0_m``.
    """

    e0_dbuv: float = 100.0
    d0_m: float = 1_000.0
    alpha_db_per_km: float = 0.007

    def __post_init__(self) -> None:
        if not (self.d0_m > 0.0):
            raise ValueError(f"d0_m must be positive, got {self.d0_m}")
        if self.alpha_db_per_km < 0.0:
            raise ValueError(f"alpha_db_per_km must be >= 0, got {self.alpha_db_per_km}")


@dataclass(frozen=True)
class NoiseModel:
    """Single-value noise floor; percentile and season are descriptive labels."""

    noise_field_strength: float = 62.0  # dB(uV/m)
    noise_percentile: float = 95.0
    season_label: str = "Averaged"

    def __post_init__(self) -> None:
        if not math.isfinite(self.noise_field_strength):
            raise ValueError("noise_field_strength must be finite")


@dataclass(frozen=True)
class TransmitterSpec:
    station_id: str
    location: GeoPoint
    power_kw: float
    jitter_m: float

    def __post_init__(self) -> None:
        if not self.power_kw > 0.0:
            raise ValueError(f"{self.station_id}: power must be > 0 kW, got {self.power_kw}")
        if self.jitter_m < 0.0:
            raise ValueError(f"{self.station_id}: jitter must be >= 0 m, got {self.jitter_m}")


@dataclass(frozen=True)
class StationMeasurement:
    """One station's link state at a receiver location."""

    station_id: str
    snr_db: float
    usable: bool
    sigma_m: float | None  # set iff usable
    weight: float | None   # 1/sigma^2, set iff usable


@dataclass(frozen=True)
class MeasurementModel:
    per_station: tuple[StationMeasurement, ...]

    def usable_count(self) -> int:
        return sum(1 for m in self.per_station if m.usable)


def field_strength(power_kw: float, distance_m: float, prop: PropagationParams) -> float:
    """Received field strength in dB(uV/m).

    E(d) = E0 + 10*log10(P/1kW) - 20*log10(d/d0) - alpha*(d - d0)/1000

    Distances below ``MIN_DISTANCE_M`` clamp to it, so E is finite and
    strictly decreasing in distance for alpha >= 0.
    """
    d = max(distance_m, MIN_DISTANCE_M)
    return (
        prop.e0_dbuv
        + 10.0 * math.log10(power_kw)
        - 20.0 * math.log10(d / prop.d0_m)
        - prop.alpha_db_per_km * (d - prop.d0_m) / 1_000.0
    )


def snr(field_dbuv: float, noise: NoiseModel) -> float:
    return field_dbuv - noise.noise_field_strength


def range_sigma(jitter_m: float, snr_db: float, sigma0_m: float) -> float:
    """1-sigma range error: transmitter jitter floor plus an SNR-scaled term.

    sigma^2 = jitter^2 + (sigma0 * 10^(-snr/20))^2
    """
    noise_term = sigma0_m * 10.0 ** (-snr_db / 20.0)
    return math.sqrt(jitter_m * jitter_m + noise_term * noise_term)


def measurement_model(
    stations: list[TransmitterSpec],
    rx: GeoPoint,
    noise: NoiseModel,
    snr_threshold_db: float = DEFAULT_SNR_THRESHOLD_DB,
    sigma0_m: float = DEFAULT_SIGMA0_M,
    prop: PropagationParams = PropagationParams(),
    radius: float = EARTH_RADIUS_M,
) -> MeasurementModel:
    """Per-station SNR, usability, sigma, and WLS weight at ``rx``.

    A station is usable iff its SNR is at or above the threshold (a signal
    exactly at threshold counts). Unusable stations carry no sigma or weight.
    """
    if not sigma0_m > 0.0:
        raise ValueError(f"sigma0_m must be > 0, got {sigma0_m}")
    entries = []
    for stn in stations:
        dist, _ = geodesic_range_bearing(rx, stn.location, radius=radius)
        s = snr(field_strength(stn.power_kw, dist, prop), noise)
        if s >= snr_threshold_db:
            sigma = range_sigma(stn.jitter_m, s, sigma0_m)
            entries.append(StationMeasurement(stn.station_id, s, True, sigma, 1.0 / (sigma * sigma)))
        else:
            entries.append(StationMeasurement(stn.station_id, s, False, None, None))
    return MeasurementModel(tuple(entries))

"""Grid sweep over the study area: scenario residuals, solver calls, statistics.

Three correction scenarios share one pipeline and differ only in the residual
rule applied to the sampled ASF field:

    S0  no correction         r_s = ASF_true(s)
    S1  local correction      r_s = 0
    S2  wide-area correction  r_s = ASF_true(s) - ASF_ref(s)

where ASF_ref(s) is station s's map value at the node nearest the reference
station. Geometry, SNR masking, and weights are scenario independent, so
sigma_pos is identical across scenarios at every grid point by construction.

:func:`evaluate_point` is the plain scalar composition of the module
operations; :func:`evaluate_grid` is a vectorized sweep that must agree with
it (covered by tests) and exists because full-area sweeps at 0.05 degree
resolution are tens of thousands of points.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from . import wls
from .asfmap import AsfMap, interpolate_asf, interpolate_asf_many, reference_asf
from .geo import (
    EARTH_RADIUS_M,
    STATION_MIN_RANGE_M,
    GeoPoint,
    StationTooClose,
    build_geometry_matrix,
)
from .signal_model import (
    DEFAULT_SIGMA0_M,
    DEFAULT_SNR_THRESHOLD_DB,
    MIN_DISTANCE_M,
    NoiseModel,
    PropagationParams,
    TransmitterSpec,
    measurement_model,
)

SCENARIO_TAGS = ("S0", "S1", "S2")

# Per-cell status codes in ScenarioResult grids.
STATUS_OK = 0
STATUS_INSUFFICIENT = 1
STATUS_SINGULAR = 2
STATUS_TOO_CLOSE = 3
_STATUS_REASON = {
    STATUS_INSUFFICIENT: "insufficient stations",
    STATUS_SINGULAR: "singular geometry",
    STATUS_TOO_CLOSE: "station too close",
}


class MissingReference(Exception):
    """Scenario S2 evaluated without per-station reference ASF values."""


class GridMismatch(Exception):
    """Scenario results being compared were computed on different grids."""


@dataclass(frozen=True)
class Scenario:
    """Correction scenario tag plus, for S2, the reference station location."""

    tag: str
    reference_point: GeoPoint | None = None

    def __post_init__(self) -> None:
        if self.tag not in SCENARIO_TAGS:
            raise ValueError(f"unknown scenario tag {self.tag!r}")
        if self.tag == "S2" and self.reference_point is None:
            raise ValueError("S2 requires a reference_point")
        if self.tag != "S2" and self.reference_point is not None:
            raise ValueError(f"{self.tag} does not take a reference_point")


@dataclass(frozen=True)
class GridSpec:
    """Study-area bounds and step defining the sweep lattice (degrees)."""

    lat_min: float
    lat_max: float
    lon_min: float
    lon_max: float
    step: float

    _MAX_NODES_PER_AXIS = 5_000

    def __post_init__(self) -> None:
        if not self.step > 0.0:
            raise ValueError(f"step must be > 0, got {self.step}")
        if not self.lat_min < self.lat_max:
            raise ValueError(f"lat_min {self.lat_min} must be < lat_max {self.lat_max}")
        if not self.lon_min < self.lon_max:
            raise ValueError(f"lon_min {self.lon_min} must be < lon_max {self.lon_max}")
        for extent, axis in (
            (self.lat_max - self.lat_min, "lat"),
            (self.lon_max - self.lon_min, "lon"),
        ):
            if extent / self.step > self._MAX_NODES_PER_AXIS:
                raise ValueError(
                    f"{axis} extent / step = {extent / self.step:.0f} exceeds "
                    f"{self._MAX_NODES_PER_AXIS} nodes"
                )

    @property
    def n_lat(self) -> int:
        return int(math.floor((self.lat_max - self.lat_min) / self.step + 1e-9)) + 1

    @property
    def n_lon(self) -> int:
        return int(math.floor((self.lon_max - self.lon_min) / self.step + 1e-9)) + 1

    def lats(self) -> np.ndarray:
        return self.lat_min + np.arange(self.n_lat) * self.step

    def lons(self) -> np.ndarray:
        return self.lon_min + np.arange(self.n_lon) * self.step


# Korean service area at the working resolution; fully configurable.
DEFAULT_GRID = GridSpec(lat_min=33.0, lat_max=39.0, lon_min=124.0, lon_max=131.0, step=0.05)


@dataclass(frozen=True)
class SimParams:
    """Scenario-independent simulation inputs shared by every grid point."""

    noise: NoiseModel = NoiseModel()
    propagation: PropagationParams = PropagationParams()
    snr_threshold_db: float = DEFAULT_SNR_THRESHOLD_DB
    sigma0_m: float = DEFAULT_SIGMA0_M
    earth_radius_m: float = EARTH_RADIUS_M


@dataclass(frozen=True)
class GridStats:
    """ACC statistics over OK cells; value fields are None when no cell is OK."""

    mean: float | None
    median: float | None
    p95: float | None
    max: float | None
    ok_cell_count: int
    nofix_cell_count: int


@dataclass(frozen=True)
class ScenarioResult:
    """Per-cell accuracy grids for one scenario, row-major (lat, lon)."""

    scenario: Scenario
    grid: GridSpec
    sigma_pos: np.ndarray
    pos_bias: np.ndarray
    acc: np.ndarray
    clock_bias: np.ndarray
    status_codes: np.ndarray
    stats: GridStats = field(init=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "stats", compute_stats(self.acc, self.ok_mask))

    @property
    def ok_mask(self) -> np.ndarray:
        return self.status_codes == STATUS_OK

    def at(self, i: int, j: int) -> wls.AccResult:
        code = int(self.status_codes[i, j])
        if code != STATUS_OK:
            return wls.AccResult.no_fix(_STATUS_REASON[code])
        return wls.AccResult(
            status="OK",
            sigma_pos=float(self.sigma_pos[i, j]),
            pos_bias=float(self.pos_bias[i, j]),
            acc=float(self.acc[i, j]),
            clock_bias=float(self.clock_bias[i, j]),
        )


def compute_stats(acc: np.ndarray, ok: np.ndarray) -> GridStats:
    vals = np.asarray(acc, dtype=float)[np.asarray(ok, dtype=bool)]
    nofix = int(np.asarray(ok).size - vals.size)
    if vals.size == 0:
        return GridStats(None, None, None, None, 0, nofix)
    return GridStats(
        mean=float(vals.mean()),
        median=float(np.median(vals)),
        p95=float(np.percentile(vals, 95)),
        max=float(vals.max()),
        ok_cell_count=int(vals.size),
        nofix_cell_count=nofix,
    )


def residual_vector(
    scenario: Scenario,
    asf_true_us: Sequence[float],
    asf_ref_us: Sequence[float] | None = None,
) -> np.ndarray:
    """Per-station ASF residuals (microseconds) under the scenario rule."""
    true = np.asarray(asf_true_us, dtype=float)
    if scenario.tag == "S2":
        if asf_ref_us is None:
            raise MissingReference("S2 residuals need per-station reference ASF values")
        ref = np.asarray(asf_ref_us, dtype=float)
        if ref.shape != true.shape:
            raise ValueError(f"reference shape {ref.shape} != true shape {true.shape}")
        return true - ref
    if asf_ref_us is not None:
        raise ValueError(f"{scenario.tag} does not take reference ASF values")
    if scenario.tag == "S1":
        return np.zeros_like(true)
    return true.copy()


def compute_reference_values(
    maps: Mapping[str, AsfMap], reference_point: GeoPoint
) -> dict[str, float]:
    """Per-station ASF at the map node nearest the reference station."""
    return {sid: reference_asf(m, reference_point) for sid, m in maps.items()}


def _map_for(maps: Mapping[str, AsfMap], stn: TransmitterSpec) -> AsfMap:
    try:
        return maps[stn.station_id]
    except KeyError:
        raise KeyError(f"no ASF map supplied for station {stn.station_id!r}") from None


def evaluate_point(
    p: GeoPoint,
    scenario: Scenario,
    maps: Mapping[str, AsfMap],
    network: Sequence[TransmitterSpec],
    params: SimParams = SimParams(),
    reference_values: Mapping[str, float] | None = None,
) -> wls.AccResult:
    """Accuracy at a single point: the scalar reference pipeline.

    A station contributes only if its SNR clears the threshold AND its ASF
    sample at ``p`` is valid; a usable signal with an unsampleable residual
    would otherwise silently inject the S1 rule into S0/S2. Degenerate cases
    come back as NoFix results, never exceptions.
    """
    mm = measurement_model(
        list(network),
        p,
        params.noise,
        params.snr_threshold_db,
        params.sigma0_m,
        params.propagation,
        params.earth_radius_m,
    )
    samples = [interpolate_asf(_map_for(maps, stn), p) for stn in network]
    usable = [
        i
        for i, (m, smp) in enumerate(zip(mm.per_station, samples))
        if m.usable and smp.valid
    ]
    if len(usable) < 3:
        return wls.AccResult.no_fix("insufficient stations")

    if scenario.tag == "S2" and reference_values is None:
        assert scenario.reference_point is not None
        reference_values = compute_reference_values(
            {stn.station_id: _map_for(maps, stn) for stn in network},
            scenario.reference_point,
        )

    asf_true = [samples[i].value for i in usable]
    asf_ref = (
        [reference_values[network[i].station_id] for i in usable]
        if scenario.tag == "S2"
        else None
    )
    r = residual_vector(scenario, asf_true, asf_ref)
    try:
        G = build_geometry_matrix(
            p, [network[i].location for i in usable], radius=params.earth_radius_m
        )
    except StationTooClose:
        return wls.AccResult.no_fix("station too close")
    w = np.array([mm.per_station[i].weight for i in usable])
    return wls.solve(G, w, r)


def evaluate_grid(
    spec: GridSpec,
    scenario: Scenario,
    maps: Mapping[str, AsfMap],
    network: Sequence[TransmitterSpec],
    params: SimParams = SimParams(),
) -> ScenarioResult:
    """Sweep the lattice and assemble per-cell accuracy grids plus statistics.

    Deterministic: identical inputs give bit-identical grids regardless of
    how many cells end up NoFix.
    """
    network = list(network)
    n_stn = len(network)
    lats = spec.lats()
    lons = spec.lons()
    lat_flat = np.repeat(lats, spec.n_lon)
    lon_flat = np.tile(lons, spec.n_lat)
    n_cells = lat_flat.size

    reference_values: Mapping[str, float] | None = None
    if scenario.tag == "S2":
        assert scenario.reference_point is not None
        reference_values = compute_reference_values(
            {stn.station_id: _map_for(maps, stn) for stn in network},
            scenario.reference_point,
        )

    # Scenario-independent per-station fields over the lattice.
    rad = math.radians
    lat_r = np.radians(lat_flat)
    dist = np.empty((n_stn, n_cells))
    bearing = np.empty((n_stn, n_cells))
    asf_val = np.empty((n_stn, n_cells))
    usable = np.empty((n_stn, n_cells), dtype=bool)
    sigma = np.empty((n_stn, n_cells))
    for k, stn in enumerate(network):
        lat2 = rad(stn.location.lat)
        dlat = np.radians(stn.location.lat - lat_flat)
        dlon = np.radians(stn.location.lon - lon_flat)
        h = np.sin(dlat / 2.0) ** 2 + np.cos(lat_r) * math.cos(lat2) * np.sin(dlon / 2.0) ** 2
        dist[k] = 2.0 * params.earth_radius_m * np.arcsin(np.sqrt(np.minimum(h, 1.0)))
        y = np.sin(dlon) * math.cos(lat2)
        x = np.cos(lat_r) * math.sin(lat2) - np.sin(lat_r) * math.cos(lat2) * np.cos(dlon)
        az = np.arctan2(y, x) % (2.0 * math.pi)
        bearing[k] = np.where(az >= 2.0 * math.pi, 0.0, az)

        d_clamped = np.maximum(dist[k], MIN_DISTANCE_M)
        prop = params.propagation
        field_db = (
            prop.e0_dbuv
            + 10.0 * math.log10(stn.power_kw)
            - 20.0 * np.log10(d_clamped / prop.d0_m)
            - prop.alpha_db_per_km * (d_clamped - prop.d0_m) / 1_000.0
        )
        snr_db = field_db - params.noise.noise_field_strength
        snr_ok = snr_db >= params.snr_threshold_db

        vals, valid = interpolate_asf_many(_map_for(maps, stn), lat_flat, lon_flat)
        asf_val[k] = vals
        usable[k] = snr_ok & valid
        noise_term = params.sigma0_m * 10.0 ** (-snr_db / 20.0)
        sigma[k] = np.sqrt(stn.jitter_m * stn.jitter_m + noise_term * noise_term)

    status = np.zeros(n_cells, dtype=np.uint8)
    n_usable = usable.sum(axis=0)
    status[n_usable < 3] = STATUS_INSUFFICIENT
    too_close = (usable & (dist < STATION_MIN_RANGE_M)).any(axis=0)
    status[(status == STATUS_OK) & too_close] = STATUS_TOO_CLOSE

    sigma_pos = np.full(n_cells, np.nan)
    pos_bias = np.full(n_cells, np.nan)
    acc = np.full(n_cells, np.nan)
    clock_bias = np.full(n_cells, np.nan)

    # Solve cells in groups sharing a usability pattern, so G has a fixed
    # station subset within each batch.
    pending = status == STATUS_OK
    bits = (usable.astype(np.uint64) << np.arange(n_stn, dtype=np.uint64)[:, None]).sum(axis=0)
    for pattern in np.unique(bits[pending]):
        members = [k for k in range(n_stn) if (int(pattern) >> k) & 1]
        cells = np.flatnonzero(pending & (bits == pattern))
        B = bearing[np.ix_(members, cells)].T  # (n, k)
        G = np.stack([-np.sin(B), -np.cos(B), np.ones_like(B)], axis=-1)
        w = 1.0 / np.square(sigma[np.ix_(members, cells)].T)

        true_us = asf_val[np.ix_(members, cells)].T
        if scenario.tag == "S1":
            r_us = np.zeros_like(true_us)
        elif scenario.tag == "S2":
            assert reference_values is not None
            ref = np.array([reference_values[network[k].station_id] for k in members])
            r_us = true_us - ref
        else:
            r_us = true_us
        d = wls.range_bias(r_us)

        Gw = G * w[:, :, None]
        M = np.empty((G.shape[0], 3, 3))
        for ii in range(3):
            for jj in range(ii, 3):
                M[:, ii, jj] = M[:, jj, ii] = (Gw[:, :, ii] * G[:, :, jj]).sum(axis=1)
        inv, singular = _invert_3x3_batch(M)
        s2 = inv[:, 0, 0] + inv[:, 1, 1]
        with np.errstate(invalid="ignore"):
            singular |= ~(s2 > 0.0) | ~np.isfinite(s2)
        sp = np.sqrt(np.where(singular, np.nan, s2))
        rhs = np.einsum("pki,pk,pk->pi", G, w, d)
        delta = np.einsum("pij,pj->pi", inv, rhs)
        pb = np.hypot(delta[:, 0], delta[:, 1])

        ok = ~singular
        idx = cells[ok]
        sigma_pos[idx] = sp[ok]
        pos_bias[idx] = pb[ok]
        acc[idx] = np.hypot(sp[ok], pb[ok])
        clock_bias[idx] = delta[ok, 2]
        status[cells[singular]] = STATUS_SINGULAR

    shape = (spec.n_lat, spec.n_lon)
    return ScenarioResult(
        scenario=scenario,
        grid=spec,
        sigma_pos=sigma_pos.reshape(shape),
        pos_bias=pos_bias.reshape(shape),
        acc=acc.reshape(shape),
        clock_bias=clock_bias.reshape(shape),
        status_codes=status.reshape(shape),
    )


def _invert_3x3_batch(M: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Batched adjugate inverse mirroring :func:`lorasf.wls.invert_3x3`.

    Returns (inverses, singular_mask); the mask flags a non-positive spectrum
    or an eigenvalue-ratio condition number above the gate, and the matching
    inverse entries are garbage that callers must discard.
    """
    eig = np.linalg.eigvalsh(M)
    with np.errstate(divide="ignore", invalid="ignore"):
        singular = (
            ~(eig[:, 0] > 0.0)
            | ~np.isfinite(eig[:, 2])
            | (eig[:, 2] / eig[:, 0] > wls.CONDITION_LIMIT)
        )
    a, b, c = M[:, 0, 0], M[:, 0, 1], M[:, 0, 2]
    d, e, f = M[:, 1, 0], M[:, 1, 1], M[:, 1, 2]
    g, h, i = M[:, 2, 0], M[:, 2, 1], M[:, 2, 2]
    adj = np.empty_like(M)
    adj[:, 0, 0] = e * i - f * h
    adj[:, 0, 1] = c * h - b * i
    adj[:, 0, 2] = b * f - c * e
    adj[:, 1, 0] = f * g - d * i
    adj[:, 1, 1] = a * i - c * g
    adj[:, 1, 2] = c * d - a * f
    adj[:, 2, 0] = d * h - e * g
    adj[:, 2, 1] = b * g - a * h
    adj[:, 2, 2] = a * e - b * d
    det = a * adj[:, 0, 0] + b * adj[:, 1, 0] + c * adj[:, 2, 0]
    singular |= (det == 0.0) | ~np.isfinite(det)
    with np.errstate(divide="ignore", invalid="ignore"):
        inv = adj / det[:, None, None]
    return inv, singular


@dataclass(frozen=True)
class ScenarioComparison:
    """Mean-ACC reduction between two scenarios over their common OK cells."""

    baseline_tag: str
    improved_tag: str
    baseline_mean_m: float | None
    improved_mean_m: float | None
    reduction_m: float | None
    reduction_pct: float | None
    common_ok_cells: int


def compare_means(baseline_mean_m: float, improved_mean_m: float) -> tuple[float, float]:
    """Absolute and percentage reduction of the improved mean vs the baseline."""
    reduction = baseline_mean_m - improved_mean_m
    pct = 0.0 if baseline_mean_m == 0.0 else 100.0 * reduction / baseline_mean_m
    return reduction, pct


def summary_compare(results: Sequence[ScenarioResult]) -> list[ScenarioComparison]:
    """Pairwise mean-error reductions; the worse scenario is the baseline.

    Means are recomputed over cells that are OK in both grids so the pair is
    compared on identical coverage.
    """
    results = list(results)
    for r in results[1:]:
        if r.grid != results[0].grid:
            raise GridMismatch(
                f"{r.scenario.tag} grid {r.grid} != {results[0].scenario.tag} grid {results[0].grid}"
            )
    rows = []
    for ia in range(len(results)):
        for ib in range(ia + 1, len(results)):
            ra, rb = results[ia], results[ib]
            common = ra.ok_mask & rb.ok_mask
            n = int(common.sum())
            if n == 0:
                rows.append(
                    ScenarioComparison(
                        ra.scenario.tag, rb.scenario.tag, None, None, None, None, 0
                    )
                )
                continue
            mean_a = float(ra.acc[common].mean())
            mean_b = float(rb.acc[common].mean())
            if mean_b > mean_a:
                ra, rb = rb, ra
                mean_a, mean_b = mean_b, mean_a
            reduction, pct = compare_means(mean_a, mean_b)
            rows.append(
                ScenarioComparison(
                    baseline_tag=ra.scenario.tag,
                    improved_tag=rb.scenario.tag,
                    baseline_mean_m=mean_a,
                    improved_mean_m=mean_b,
                    reduction_m=reduction,
                    reduction_pct=pct,
                    common_ok_cells=n,
                )
            )
    return rows

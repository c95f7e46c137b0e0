"""lorasf: eLoran positioning-accuracy simulation under spatial ASF corrections.

Evaluates, over a geographic grid, how uncorrected, locally corrected, and
wide-area single-value corrected spatial ASF residuals propagate through a
weighted least-squares position solution into the combined accuracy metric
ACC = sqrt(sigma_pos^2 + pos_bias^2).
"""

__version__ = "0.1.0"

from .asfmap import (
    AsfMap,
    AsfSample,
    FormatError,
    NoDataError,
    format_asf_map,
    interpolate_asf,
    load_asf_map,
    reference_asf,
    write_asf_map,
)
from .engine import (
    DEFAULT_GRID,
    GridMismatch,
    GridSpec,
    GridStats,
    MissingReference,
    Scenario,
    ScenarioResult,
    SimParams,
    compare_means,
    evaluate_grid,
    evaluate_point,
    residual_vector,
    summary_compare,
)
from .geo import (
    EARTH_RADIUS_M,
    GeoPoint,
    InsufficientStations,
    StationTooClose,
    build_geometry_matrix,
    geodesic_range_bearing,
)
from .signal_model import (
    MeasurementModel,
    NoiseModel,
    PropagationParams,
    TransmitterSpec,
    field_strength,
    measurement_model,
    snr,
)
from .wls import (
    SPEED_OF_LIGHT_M_S,
    AccResult,
    SingularGeometry,
    acc,
    bias_solution,
    normal_matrix,
    range_bias,
    sigma_pos,
)

__all__ = [
    "__version__",
    "AccResult",
    "AsfMap",
    "AsfSample",
    "DEFAULT_GRID",
    "EARTH_RADIUS_M",
    "FormatError",
    "GeoPoint",
    "GridMismatch",
    "GridSpec",
    "GridStats",
    "InsufficientStations",
    "MeasurementModel",
    "MissingReference",
    "NoDataError",
    "NoiseModel",
    "PropagationParams",
    "Scenario",
    "ScenarioResult",
    "SimParams",
    "SingularGeometry",
    "SPEED_OF_LIGHT_M_S",
    "StationTooClose",
    "TransmitterSpec",
    "acc",
    "bias_solution",
    "build_geometry_matrix",
    "compare_means",
    "evaluate_grid",
    "evaluate_point",
    "field_strength",
    "format_asf_map",
    "geodesic_range_bearing",
    "interpolate_asf",
    "load_asf_map",
    "measurement_model",
    "normal_matrix",
    "range_bias",
    "reference_asf",
    "residual_vector",
    "sigma_pos",
    "snr",
    "summary_compare",
    "write_asf_map",
]

"""Deterministic UAV surveillance network simulator.

Pipeline: ingest a surveillance area (geographic polygon or binary matrix),
place one camera drone per field-of-view cell with no blind spots, pick the
anchor drone nearest the fleet centroid, build a battery-derated RF link
graph, and move each activated drone's data to the anchor over hop-bounded
widest paths, draining batteries as transmissions run.
"""

from .channel import (
    ChannelParams,
    LinkBudget,
    LinkGraph,
    NeighborRule,
    build_link_graph,
    capacity,
    linear_loss_factor,
    link_budget,
    path_loss_db,
    snr,
)
from .deployment import (
    DroneNode,
    FovSpec,
    distance_matrix,
    place_fleet,
    select_anchor,
)
from .energy import (
    BatteryState,
    derate_capacity,
    drain,
    report_percent,
    transmission_time,
)
from .errors import (
    BelowReferenceDistanceError,
    CapacityExhaustedError,
    DeadLinkError,
    DegenerateNetworkError,
    EmptyAreaError,
    EmptyFleetError,
    InvalidParameterError,
    InvalidPolygonError,
    InvalidStateError,
    MatrixFormatError,
    NoRouteError,
    NoSourcesError,
    ScenarioError,
    UavNetError,
)
from .geometry import (
    CoverageGrid,
    GeoPolygon,
    PlanarPolygon,
    load_binary_matrix,
    normalize,
    parse_polygon_file,
    point_in_polygon,
    rasterize,
)
from .routing import (
    PathAllocation,
    RoutingConfig,
    TransmissionPlan,
    find_all_paths,
    path_bottleneck,
    schedule,
    select_widest,
    single_path_baseline,
)
from .simulator import (
    ScenarioConfig,
    TransmissionReport,
    activate_sources,
    compare_with_baseline,
    load_scenario,
    run_scenario,
    write_report,
)

__version__ = "0.1.0"

__all__ = [
    "BatteryState",
    "BelowReferenceDistanceError",
    "CapacityExhaustedError",
    "ChannelParams",
    "CoverageGrid",
    "DeadLinkError",
    "DegenerateNetworkError",
    "DroneNode",
    "EmptyAreaError",
    "EmptyFleetError",
    "FovSpec",
    "GeoPolygon",
    "InvalidParameterError",
    "InvalidPolygonError",
    "InvalidStateError",
    "LinkBudget",
    "LinkGraph",
    "MatrixFormatError",
    "NeighborRule",
    "NoRouteError",
    "NoSourcesError",
    "PathAllocation",
    "PlanarPolygon",
    "RoutingConfig",
    "ScenarioConfig",
    "ScenarioError",
    "TransmissionPlan",
    "TransmissionReport",
    "UavNetError",
    "activate_sources",
    "build_link_graph",
    "capacity",
    "compare_with_baseline",
    "derate_capacity",
    "distance_matrix",
    "drain",
    "find_all_paths",
    "linear_loss_factor",
    "link_budget",
    "load_binary_matrix",
    "load_scenario",
    "normalize",
    "parse_polygon_file",
    "path_bottleneck",
    "path_loss_db",
    "place_fleet",
    "point_in_polygon",
    "rasterize",
    "report_percent",
    "run_scenario",
    "schedule",
    "select_anchor",
    "select_widest",
    "single_path_baseline",
    "snr",
    "transmission_time",
    "write_report",
]

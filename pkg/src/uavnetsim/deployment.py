"""Fleet placement over the coverage grid, anchor selection, distance matrix."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .energy import BatteryState
from .errors import EmptyAreaError, EmptyFleetError, InvalidParameterError
from .geometry import CoverageGrid

# Relative tolerance when checking that the grid was built at FOV resolution.
_FOOTPRINT_RTOL = 1e-9


@dataclass(frozen=True)
class FovSpec:
    """Camera field of view: half-angle from nadir and flight altitude."""

    half_angle_deg: float
    altitude_m: float

    def __post_init__(self):
        if not 0.0 < self.half_angle_deg < 90.0:
            raise InvalidParameterError(
                f"FOV half-angle must be in (0, 90) degrees, got {self.half_angle_deg}"
            )
        if self.altitude_m <= 0:
            raise InvalidParameterError(f"altitude must be positive, got {self.altitude_m}")

    @property
    def footprint_side_m(self) -> float:
        """Side of the square ground footprint one drone observes."""
        return 2.0 * self.altitude_m * math.tan(math.radians(self.half_angle_deg))


@dataclass
class DroneNode:
    """One drone: identity, position, grid cell, role, battery."""

    id: int
    x_m: float
    y_m: float
    altitude_m: float
    cell: tuple[int, int]
    is_anchor: bool = False
    battery: BatteryState = field(default_factory=BatteryState)

    @property
    def position(self) -> tuple[float, float, float]:
        return (self.x_m, self.y_m, self.altitude_m)


def place_fleet(grid: CoverageGrid, fov: FovSpec) -> list[DroneNode]:
    """One drone per active cell, hovering at the cell center.

    Ids run in row-major cell order starting at 0. Each drone's footprint is
    exactly its own cell, so the active area is covered with no blind spot and
    no overlap.
    """
    footprint = fov.footprint_side_m
    if abs(footprint - grid.cell_size_m) > _FOOTPRINT_RTOL * max(footprint, grid.cell_size_m):
        raise InvalidParameterError(
            f"grid cell size {grid.cell_size_m} does not match FOV footprint {footprint}"
        )
    active = grid.active_cells()
    if not active:
        raise EmptyAreaError("cannot place a fleet on an empty grid")
    fleet = []
    for drone_id, (row, col) in enumerate(active):
        x, y = grid.cell_center(row, col)
        fleet.append(DroneNode(id=drone_id, x_m=x, y_m=y, altitude_m=fov.altitude_m, cell=(row, col)))
    return fleet


def select_anchor(fleet: list[DroneNode]) -> int:
    """Mark and return the drone closest to the fleet centroid.

    Ties break toward the lowest id so the choice is reproducible.
    """
    if not fleet:
        raise EmptyFleetError("cannot select an anchor from an empty fleet")
    n = len(fleet)
    cx = sum(d.x_m for d in fleet) / n
    cy = sum(d.y_m for d in fleet) / n
    cz = sum(d.altitude_m for d in fleet) / n
    best = min(fleet, key=lambda d: (math.dist(d.position, (cx, cy, cz)), d.id))
    for drone in fleet:
        drone.is_anchor = drone.id == best.id
    return best.id


def distance_matrix(fleet: list[DroneNode]) -> list[list[float]]:
    """Symmetric matrix of 3-D Euclidean distances between all drones, meters."""
    if not fleet:
        raise EmptyFleetError("cannot build a distance matrix for an empty fleet")
    positions = [d.position for d in fleet]
    n = len(positions)
    matrix = [[0.0] * n for _ in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            d = math.dist(positions[i], positions[j])
            matrix[i][j] = d
            matrix[j][i] = d
    return matrix

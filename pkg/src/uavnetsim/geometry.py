"""Surveillance area ingestion: geographic polygons, planar projection, coverage grids."""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

from .errors import (
    EmptyAreaError,
    InvalidParameterError,
    InvalidPolygonError,
    MatrixFormatError,
)

EARTH_RADIUS_M = 6_371_000.0  # mean Earth radius, m

# Guard against float noise when an extent is an exact multiple of the cell size.
_EXTENT_EPS = 1e-9


@dataclass(frozen=True)
class GeoPolygon:
    """Closed ring of geographic vertices, stored as (latitude, longitude) degrees.

    The closing vertex may be repeated in the input; it is dropped on
    construction. Rings must be simple (no self-intersection).
    """

    vertices: tuple[tuple[float, float], ...]

    def __post_init__(self):
        vertices = tuple((float(lat), float(lon)) for lat, lon in self.vertices)
        if len(vertices) >= 2 and vertices[0] == vertices[-1]:
            vertices = vertices[:-1]
        object.__setattr__(self, "vertices", vertices)
        if len(vertices) < 3:
            raise InvalidPolygonError(f"polygon needs at least 3 vertices, got {len(vertices)}")
        for lat, lon in vertices:
            if not -90.0 <= lat <= 90.0:
                raise InvalidPolygonError(f"latitude {lat} outside [-90, 90]")
            if not -180.0 <= lon <= 180.0:
                raise InvalidPolygonError(f"longitude {lon} outside [-180, 180]")
        if _ring_self_intersects(vertices):
            raise InvalidPolygonError("polygon ring is self-intersecting")


@dataclass(frozen=True)
class PlanarPolygon:
    """Simple polygon in local planar coordinates, meters."""

    vertices: tuple[tuple[float, float], ...]

    def __post_init__(self):
        vertices = tuple((float(x), float(y)) for x, y in self.vertices)
        if len(vertices) >= 2 and vertices[0] == vertices[-1]:
            vertices = vertices[:-1]
        object.__setattr__(self, "vertices", vertices)
        if len(vertices) < 3:
            raise InvalidPolygonError(f"polygon needs at least 3 vertices, got {len(vertices)}")
        if self.area_m2 <= 0.0:
            raise InvalidPolygonError("polygon area must be positive")

    @property
    def bounding_box(self) -> tuple[float, float, float, float]:
        """(min_x, min_y, max_x, max_y) in meters."""
        xs = [x for x, _ in self.vertices]
        ys = [y for _, y in self.vertices]
        return (min(xs), min(ys), max(xs), max(ys))

    @property
    def area_m2(self) -> float:
        return abs(_signed_area(self.vertices))


@dataclass(frozen=True)
class CoverageGrid:
    """Binary occupancy matrix over the area, one cell per camera footprint.

    Row 0 is the top row of the area (image convention); cell (0, 0) sits at
    the top-left corner. ``origin`` is the planar coordinate of the grid's
    bottom-left corner.
    """

    cells: tuple[tuple[int, ...], ...]
    cell_size_m: float
    origin: tuple[float, float] = (0.0, 0.0)

    def __post_init__(self):
        if self.cell_size_m <= 0:
            raise InvalidParameterError(f"cell size must be positive, got {self.cell_size_m}")
        if not self.cells:
            raise EmptyAreaError("grid has no rows")
        width = len(self.cells[0])
        for row in self.cells:
            if len(row) != width:
                raise MatrixFormatError("grid rows have unequal lengths")
            for value in row:
                if value not in (0, 1):
                    raise MatrixFormatError(f"grid cells must be 0 or 1, got {value!r}")
        if not any(any(row) for row in self.cells):
            raise EmptyAreaError("grid has no active cell")

    @property
    def n_rows(self) -> int:
        return len(self.cells)

    @property
    def n_cols(self) -> int:
        return len(self.cells[0])

    def active_cells(self) -> list[tuple[int, int]]:
        """(row, col) of every active cell, in row-major order."""
        return [
            (i, j)
            for i, row in enumerate(self.cells)
            for j, value in enumerate(row)
            if value == 1
        ]

    def cell_center(self, row: int, col: int) -> tuple[float, float]:
        """Planar center of a cell, meters; row 0 maps to the highest y band."""
        x = self.origin[0] + (col + 0.5) * self.cell_size_m
        y = self.origin[1] + (self.n_rows - row - 0.5) * self.cell_size_m
        return (x, y)


def _signed_area(vertices: tuple[tuple[float, float], ...]) -> float:
    total = 0.0
    n = len(vertices)
    for i in range(n):
        x1, y1 = vertices[i]
        x2, y2 = vertices[(i + 1) % n]
        total += x1 * y2 - x2 * y1
    return total / 2.0


def _orientation(p, q, r) -> int:
    cross = (q[0] - p[0]) * (r[1] - p[1]) - (q[1] - p[1]) * (r[0] - p[0])
    if cross > 0:
        return 1
    if cross < 0:
        return -1
    return 0


def _on_segment(p, q, r) -> bool:
    """True when collinear point q lies within segment pr's bounding box."""
    return (
        min(p[0], r[0]) <= q[0] <= max(p[0], r[0])
        and min(p[1], r[1]) <= q[1] <= max(p[1], r[1])
    )


def _segments_intersect(a1, a2, b1, b2) -> bool:
    o1 = _orientation(a1, a2, b1)
    o2 = _orientation(a1, a2, b2)
    o3 = _orientation(b1, b2, a1)
    o4 = _orientation(b1, b2, a2)
    if o1 != o2 and o3 != o4:
        return True
    if o1 == 0 and _on_segment(a1, b1, a2):
        return True
    if o2 == 0 and _on_segment(a1, b2, a2):
        return True
    if o3 == 0 and _on_segment(b1, a1, b2):
        return True
    if o4 == 0 and _on_segment(b1, a2, b2):
        return True
    return False


def _ring_self_intersects(vertices: tuple[tuple[float, float], ...]) -> bool:
    """Check every pair of non-adjacent ring segments for intersection."""
    n = len(vertices)
    segments = [(vertices[i], vertices[(i + 1) % n]) for i in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            if j == i + 1 or (i == 0 and j == n - 1):
                continue  # adjacent segments share an endpoint by construction
            if _segments_intersect(*segments[i], *segments[j]):
                return True
    return False


def point_in_polygon(x: float, y: float, vertices: tuple[tuple[float, float], ...]) -> bool:
    """Even-odd ray-cast membership test; boundary points count as outside."""
    inside = False
    n = len(vertices)
    for i in range(n):
        x1, y1 = vertices[i]
        x2, y2 = vertices[(i + 1) % n]
        if (y1 > y) != (y2 > y):
            x_cross = (x2 - x1) * (y - y1) / (y2 - y1) + x1
            if x < x_cross:
                inside = not inside
    return inside


def normalize(polygon: GeoPolygon) -> PlanarPolygon:
    """Project a geographic ring onto a local planar frame anchored at the origin.

    Uses an equirectangular projection about the polygon's mean latitude,
    adequate for areas spanning hundreds of meters, then translates the
    bounding-box minimum corner to (0, 0).
    """
    lat0_deg = sum(lat for lat, _ in polygon.vertices) / len(polygon.vertices)
    lon0_deg = sum(lon for _, lon in polygon.vertices) / len(polygon.vertices)
    cos_lat0 = math.cos(math.radians(lat0_deg))
    planar = []
    for lat, lon in polygon.vertices:
        x = EARTH_RADIUS_M * math.radians(lon - lon0_deg) * cos_lat0
        y = EARTH_RADIUS_M * math.radians(lat - lat0_deg)
        planar.append((x, y))
    min_x = min(x for x, _ in planar)
    min_y = min(y for _, y in planar)
    shifted = tuple((x - min_x, y - min_y) for x, y in planar)
    return PlanarPolygon(shifted)


def rasterize(polygon: PlanarPolygon, cell_size_m: float) -> CoverageGrid:
    """Rasterize a planar polygon into a binary grid at the given cell size.

    A cell is active when its center point lies strictly inside the polygon.
    """
    if cell_size_m <= 0:
        raise InvalidParameterError(f"cell size must be positive, got {cell_size_m}")
    min_x, min_y, max_x, max_y = polygon.bounding_box
    width = max_x - min_x
    height = max_y - min_y
    n_cols = max(1, math.ceil(width / cell_size_m - _EXTENT_EPS))
    n_rows = max(1, math.ceil(height / cell_size_m - _EXTENT_EPS))
    rows = []
    for i in range(n_rows):
        row = []
        for j in range(n_cols):
            cx = min_x + (j + 0.5) * cell_size_m
            cy = min_y + (n_rows - i - 0.5) * cell_size_m
            row.append(1 if point_in_polygon(cx, cy, polygon.vertices) else 0)
        rows.append(tuple(row))
    return CoverageGrid(tuple(rows), cell_size_m, origin=(min_x, min_y))


def load_binary_matrix(source: str | Path, cell_size_m: float) -> CoverageGrid:
    """Read a text file of '0'/'1' rows into a CoverageGrid."""
    if cell_size_m <= 0:
        raise InvalidParameterError(f"cell size must be positive, got {cell_size_m}")
    path = Path(source)
    lines = [line.strip() for line in path.read_text().splitlines()]
    lines = [line for line in lines if line]
    if not lines:
        raise MatrixFormatError(f"matrix file {path} is empty")
    width = len(lines[0])
    rows = []
    for line_no, line in enumerate(lines, start=1):
        if len(line) != width:
            raise MatrixFormatError(f"{path}:{line_no}: row length {len(line)} != {width}")
        row = []
        for ch in line:
            if ch not in "01":
                raise MatrixFormatError(f"{path}:{line_no}: invalid character {ch!r}")
            row.append(int(ch))
        rows.append(tuple(row))
    return CoverageGrid(tuple(rows), cell_size_m)


def parse_polygon_file(source: str | Path) -> GeoPolygon:
    """Read a text file with one 'lat,lon' vertex per line into a GeoPolygon."""
    path = Path(source)
    vertices = []
    for line_no, raw in enumerate(path.read_text().splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        parts = line.split(",")
        if len(parts) != 2:
            raise InvalidPolygonError(f"{path}:{line_no}: expected 'lat,lon', got {raw!r}")
        try:
            lat, lon = float(parts[0]), float(parts[1])
        except ValueError as exc:
            raise InvalidPolygonError(f"{path}:{line_no}: non-numeric vertex {raw!r}") from exc
        vertices.append((lat, lon))
    return GeoPolygon(tuple(vertices))

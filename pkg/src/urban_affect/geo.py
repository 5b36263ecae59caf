"""Planar geometry over lon/lat degree space: study grid, cells, zoning.

The study region is small enough (< 0.12 degrees across) that all
operations work directly in degree coordinates without a projection;
this keeps cell bucketing deterministic and trivially reproducible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

#: The ten land-use categories a zoning polygon may carry.
ZONE_LABELS = (
    "Residential and public Infrastructure",
    "Industry",
    "Storage",
    "External Transportation",
    "Road and Plaza",
    "Municipality",
    "Green",
    "Special",
    "Water and Others",
    "Road",
)

#: Label used for points not covered by any zoning polygon.
UNZONED = "Unzoned"


@dataclass(frozen=True)
class GeoPoint:
    """A lon/lat position in decimal degrees."""

    lon: float
    lat: float

    def __post_init__(self) -> None:
        if not (-180.0 <= self.lon <= 180.0):
            raise ValueError(f"lon out of range: {self.lon}")
        if not (-90.0 <= self.lat <= 90.0):
            raise ValueError(f"lat out of range: {self.lat}")


@dataclass(frozen=True)
class BoundingBox:
    """Axis-aligned lon/lat box; west < east and south < north."""

    west: float
    south: float
    east: float
    north: float

    def __post_init__(self) -> None:
        if not (self.west < self.east and self.south < self.north):
            raise ValueError("degenerate bounding box")

    def contains(self, p: GeoPoint) -> bool:
        return self.west <= p.lon <= self.east and self.south <= p.lat <= self.north


#: Default study window: a roughly 10x12 km box over central Beijing.
STUDY_BBOX = BoundingBox(west=116.343615, south=39.868876, east=116.460898, north=39.963175)

#: Default cell edge of ~100 m at this latitude.
DEFAULT_CELL_SIZE = 0.001


@dataclass(frozen=True)
class Grid:
    """Uniform cell grid over a bounding box; row 0 is the northernmost band."""

    bbox: BoundingBox
    cell_size: float
    n_cols: int
    n_rows: int

    def cell_center(self, row: int, col: int) -> GeoPoint:
        return GeoPoint(
            lon=self.bbox.west + (col + 0.5) * self.cell_size,
            lat=self.bbox.north - (row + 0.5) * self.cell_size,
        )

    def cell_bounds(self, row: int, col: int) -> BoundingBox:
        west = self.bbox.west + col * self.cell_size
        north = self.bbox.north - row * self.cell_size
        return BoundingBox(west=west, south=north - self.cell_size, east=west + self.cell_size, north=north)

    @property
    def n_cells(self) -> int:
        return self.n_rows * self.n_cols

    @property
    def coverage(self) -> BoundingBox:
        """The full cell extent: the bbox rounded up to whole cells.

        When the bbox spans a non-integer number of cells, the last row and
        column stick out slightly past the south/east edges; locate treats
        that sliver as part of the grid so every cell center round-trips.
        """
        return BoundingBox(
            west=self.bbox.west,
            south=self.bbox.north - self.n_rows * self.cell_size,
            east=self.bbox.west + self.n_cols * self.cell_size,
            north=self.bbox.north,
        )


def make_grid(bbox: BoundingBox, cell_size: float) -> Grid:
    """Build the cell grid covering ``bbox`` with square degree cells."""
    if cell_size <= 0:
        raise ValueError("cell_size must be positive")
    n_cols = math.ceil((bbox.east - bbox.west) / cell_size)
    n_rows = math.ceil((bbox.north - bbox.south) / cell_size)
    return Grid(bbox=bbox, cell_size=cell_size, n_cols=n_cols, n_rows=n_rows)


def locate(grid: Grid, p: GeoPoint) -> Optional[tuple[int, int]]:
    """Map a point to its (row, col) cell, or None when outside the grid.

    Points exactly on the east or south edge belong to the last
    column/row, so the covered area is closed on all sides.
    """
    b = grid.coverage
    if not b.contains(p):
        return None
    col = int((p.lon - b.west) / grid.cell_size)
    row = int((b.north - p.lat) / grid.cell_size)
    if col >= grid.n_cols:
        col = grid.n_cols - 1
    if row >= grid.n_rows:
        row = grid.n_rows - 1
    return row, col


# --------------------------------------------------------------------------
# Zoning polygons


def _ring_signed_area(ring: Sequence[GeoPoint]) -> float:
    """Shoelace signed area of a closed ring given without the repeated vertex."""
    total = 0.0
    n = len(ring)
    for i in range(n):
        a = ring[i]
        b = ring[(i + 1) % n]
        total += a.lon * b.lat - b.lon * a.lat
    return total / 2.0


def _orient(a: GeoPoint, b: GeoPoint, c: GeoPoint) -> float:
    return (b.lon - a.lon) * (c.lat - a.lat) - (b.lat - a.lat) * (c.lon - a.lon)


def _on_segment(p: GeoPoint, a: GeoPoint, b: GeoPoint) -> bool:
    if _orient(a, b, p) != 0.0:
        return False
    return (
        min(a.lon, b.lon) <= p.lon <= max(a.lon, b.lon)
        and min(a.lat, b.lat) <= p.lat <= max(a.lat, b.lat)
    )


def _ring_is_simple(ring: Sequence[GeoPoint]) -> bool:
    """Reject rings whose non-adjacent edges cross or touch."""
    n = len(ring)
    for i in range(n):
        a1, a2 = ring[i], ring[(i + 1) % n]
        for j in range(i + 1, n):
            # Adjacent edges share a vertex by construction.
            if j == i or (j + 1) % n == i or (i + 1) % n == j:
                continue
            b1, b2 = ring[j], ring[(j + 1) % n]
            d1 = _orient(b1, b2, a1)
            d2 = _orient(b1, b2, a2)
            d3 = _orient(a1, a2, b1)
            d4 = _orient(a1, a2, b2)
            if ((d1 > 0) != (d2 > 0)) and ((d3 > 0) != (d4 > 0)):
                return False
            if any(
                _on_segment(p, q1, q2)
                for p, q1, q2 in (
                    (a1, b1, b2),
                    (a2, b1, b2),
                    (b1, a1, a2),
                    (b2, a1, a2),
                )
            ):
                return False
    return True


@dataclass(frozen=True)
class ZonePolygon:
    """One land-use polygon: an outer ring plus optional hole rings."""

    label: str
    rings: tuple[tuple[GeoPoint, ...], ...]
    area: float

    @classmethod
    def create(cls, label: str, rings: Iterable[Sequence[GeoPoint]]) -> "ZonePolygon":
        if label not in ZONE_LABELS:
            raise ValueError(
                f"unknown zone label {label!r}; legal labels: {', '.join(ZONE_LABELS)}"
            )
        ring_tuples = tuple(tuple(r) for r in rings)
        if not ring_tuples:
            raise ValueError("polygon needs at least an outer ring")
        for ring in ring_tuples:
            if len(ring) < 3:
                raise ValueError("ring needs at least 3 vertices")
        if not _ring_is_simple(ring_tuples[0]):
            raise ValueError("outer ring is self-intersecting")
        area = abs(_ring_signed_area(ring_tuples[0]))
        for hole in ring_tuples[1:]:
            area -= abs(_ring_signed_area(hole))
        if area <= 0:
            raise ValueError("polygon area must be positive")
        return cls(label=label, rings=ring_tuples, area=area)


@dataclass(frozen=True)
class ZoningSet:
    """All zoning polygons of one land-use layer."""

    polygons: tuple[ZonePolygon, ...]

    def __len__(self) -> int:
        return len(self.polygons)


def point_in_polygon(p: GeoPoint, poly: ZonePolygon) -> bool:
    """Even-odd ray-casting containment; boundary points count as inside.

    Hole rings participate in the crossing count, so points strictly inside
    a hole come out outside, while points on any ring edge are inside.
    """
    crossings = 0
    for ring in poly.rings:
        n = len(ring)
        for i in range(n):
            a = ring[i]
            b = ring[(i + 1) % n]
            if _on_segment(p, a, b):
                return True
            if (a.lat > p.lat) != (b.lat > p.lat):
                x_cross = a.lon + (p.lat - a.lat) * (b.lon - a.lon) / (b.lat - a.lat)
                if p.lon < x_cross:
                    crossings += 1
    return crossings % 2 == 1


def assign_zone(p: GeoPoint, zones: ZoningSet) -> Optional[str]:
    """Label of the smallest-area polygon containing ``p``, or None.

    The smallest-area rule lets nested special districts win over
    city-wide background polygons; ties break on ascending label text so
    the answer never depends on polygon order.
    """
    best: Optional[ZonePolygon] = None
    for poly in zones.polygons:
        if point_in_polygon(p, poly):
            if best is None or (poly.area, poly.label) < (best.area, best.label):
                best = poly
    return best.label if best is not None else None

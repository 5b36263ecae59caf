from __future__ import annotations

import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import winding_number_contains
from urban_affect.geo import (
    STUDY_BBOX,
    UNZONED,
    BoundingBox,
    GeoPoint,
    Grid,
    ZonePolygon,
    ZoningSet,
    assign_zone,
    locate,
    make_grid,
    point_in_polygon,
)


def square(label, west, south, east, north, holes=()):
    ring = [
        GeoPoint(west, south),
        GeoPoint(east, south),
        GeoPoint(east, north),
        GeoPoint(west, north),
    ]
    hole_rings = [
        [GeoPoint(w, s), GeoPoint(e, s), GeoPoint(e, n), GeoPoint(w, n)]
        for (w, s, e, n) in holes
    ]
    return ZonePolygon.create(label, [ring] + hole_rings)


class TestMakeGrid:
    def test_study_grid_dimensions(self):
        grid = make_grid(STUDY_BBOX, 0.001)
        assert (grid.n_cols, grid.n_rows) == (118, 95)

    def test_unit_grid(self):
        grid = make_grid(BoundingBox(0, 0, 1, 1), 1.0)
        assert (grid.n_cols, grid.n_rows) == (1, 1)

    def test_zero_cell_size_rejected(self):
        with pytest.raises(ValueError):
            make_grid(BoundingBox(0, 0, 1, 1), 0.0)

    def test_degenerate_bbox_rejected(self):
        with pytest.raises(ValueError):
            BoundingBox(1, 0, 1, 1)


class TestLocate:
    def test_study_point_near_northwest(self):
        grid = make_grid(STUDY_BBOX, 0.001)
        assert locate(grid, GeoPoint(116.344, 39.9630)) == (0, 0)

    def test_northwest_corner(self):
        grid = make_grid(STUDY_BBOX, 0.001)
        corner = GeoPoint(STUDY_BBOX.west, STUDY_BBOX.north)
        assert locate(grid, corner) == (0, 0)

    def test_outside_returns_none(self):
        grid = make_grid(STUDY_BBOX, 0.001)
        assert locate(grid, GeoPoint(0.0, 0.0)) is None

    def test_east_south_edges_belong_to_last_cell(self):
        grid = make_grid(BoundingBox(0, 0, 2, 2), 1.0)
        assert locate(grid, GeoPoint(2.0, 0.0)) == (1, 1)
        assert locate(grid, GeoPoint(2.0, 2.0)) == (0, 1)
        assert locate(grid, GeoPoint(0.0, 0.0)) == (1, 0)

    @pytest.mark.property
    @settings(max_examples=1000)
    @given(
        west=st.floats(-170, 170),
        south=st.floats(-80, 80),
        span_cells=st.integers(1, 40),
        cell_size=st.floats(1e-4, 0.5),
        data=st.data(),
    )
    def test_cell_center_roundtrip(self, west, south, span_cells, cell_size, data):
        bbox = BoundingBox(
            west, south, west + span_cells * cell_size, south + span_cells * cell_size
        )
        grid = make_grid(bbox, cell_size)
        row = data.draw(st.integers(0, grid.n_rows - 1))
        col = data.draw(st.integers(0, grid.n_cols - 1))
        assert locate(grid, grid.cell_center(row, col)) == (row, col)


class TestPointInPolygon:
    def test_unit_square_inside(self):
        assert point_in_polygon(GeoPoint(0.5, 0.5), square("Green", 0, 0, 1, 1))

    def test_unit_square_outside(self):
        assert not point_in_polygon(GeoPoint(2, 2), square("Green", 0, 0, 1, 1))

    def test_hole_center_is_outside(self):
        poly = square("Green", 0, 0, 4, 4, holes=[(1, 1, 3, 3)])
        assert not point_in_polygon(GeoPoint(2, 2), poly)
        assert point_in_polygon(GeoPoint(0.5, 2), poly)

    def test_boundary_counts_as_inside(self):
        poly = square("Green", 0, 0, 1, 1)
        assert point_in_polygon(GeoPoint(0.0, 0.5), poly)
        assert point_in_polygon(GeoPoint(1.0, 1.0), poly)
        assert point_in_polygon(GeoPoint(0.5, 0.0), poly)

    def test_self_intersecting_ring_rejected(self):
        bowtie = [GeoPoint(0, 0), GeoPoint(1, 1), GeoPoint(1, 0), GeoPoint(0, 1)]
        with pytest.raises(ValueError):
            ZonePolygon.create("Green", [bowtie])

    @pytest.mark.property
    def test_matches_winding_number_oracle(self):
        # Random convex polygons (<= 8 vertices), 1000 random points each.
        rnd = random.Random(2031)
        for _ in range(20):
            n = rnd.randint(3, 8)
            cx, cy = rnd.uniform(-5, 5), rnd.uniform(-5, 5)
            radius = rnd.uniform(0.5, 4.0)
            angles = sorted(rnd.uniform(0, 2 * math.pi) for _ in range(n))
            verts = [
                (cx + radius * math.cos(a), cy + radius * math.sin(a)) for a in angles
            ]
            poly = ZonePolygon.create("Green", [[GeoPoint(x, y) for x, y in verts]])
            for _ in range(1000):
                lon = cx + rnd.uniform(-1.5 * radius, 1.5 * radius)
                lat = cy + rnd.uniform(-1.5 * radius, 1.5 * radius)
                assert point_in_polygon(GeoPoint(lon, lat), poly) == (
                    winding_number_contains(lon, lat, verts)
                )


class TestAssignZone:
    def test_single_zone(self):
        zones = ZoningSet((square("Green", 0, 0, 1, 1),))
        assert assign_zone(GeoPoint(0.5, 0.5), zones) == "Green"

    def test_nested_smallest_area_wins(self):
        outer = square("Residential and public Infrastructure", 0, 0, 2, 2)  # area 4
        inner = square("Special", 0.5, 0.5, 1.5, 1.5)  # area 1
        assert outer.area == pytest.approx(4.0)
        assert inner.area == pytest.approx(1.0)
        zones = ZoningSet((outer, inner))
        assert assign_zone(GeoPoint(1.0, 1.0), zones) == "Special"

    def test_unzoned_point(self):
        zones = ZoningSet((square("Green", 0, 0, 1, 1),))
        assert assign_zone(GeoPoint(5, 5), zones) is None

    def test_area_tie_breaks_by_label(self):
        a = square("Road", 0, 0, 1, 1)
        b = square("Green", 0.0, 0.0, 1.0, 1.0)
        assert assign_zone(GeoPoint(0.5, 0.5), ZoningSet((a, b))) == "Green"
        assert assign_zone(GeoPoint(0.5, 0.5), ZoningSet((b, a))) == "Green"

    @pytest.mark.property
    @settings(max_examples=1000)
    @given(data=st.data())
    def test_polygon_order_never_matters(self, data):
        labels = data.draw(
            st.lists(
                st.sampled_from(["Green", "Road", "Special", "Industry"]),
                min_size=1,
                max_size=4,
            )
        )
        polys = []
        for i, label in enumerate(labels):
            w = data.draw(st.floats(-2, 2))
            s = data.draw(st.floats(-2, 2))
            size = data.draw(st.floats(0.5, 3))
            polys.append(square(label, w, s, w + size, s + size))
        point = GeoPoint(data.draw(st.floats(-2, 4)), data.draw(st.floats(-2, 4)))
        perm = data.draw(st.permutations(polys))
        assert assign_zone(point, ZoningSet(tuple(polys))) == assign_zone(
            point, ZoningSet(tuple(perm))
        )


def test_unzoned_label_is_reserved():
    assert UNZONED == "Unzoned"


def test_grid_cell_bounds_tile_the_bbox():
    grid = make_grid(BoundingBox(0, 0, 3, 2), 1.0)
    north_row = grid.cell_bounds(0, 0)
    assert north_row.north == grid.bbox.north
    south_row = grid.cell_bounds(grid.n_rows - 1, 0)
    assert south_row.south == pytest.approx(grid.bbox.south)

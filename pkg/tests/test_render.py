from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from urban_affect.affectmap import ScoreRaster, TrendRaster
from urban_affect.geo import BoundingBox, GeoPoint, locate, make_grid
from urban_affect.render import (
    MISMATCH_RAMP,
    MISSING_RGB,
    SCORE_RAMP,
    TREND_RAMP,
    ColorRamp,
    default_domain,
    export_geojson,
    ramp_color,
    render_raster,
)


def score_raster(values, support=None):
    arr = np.asarray(values, dtype=float)
    grid = make_grid(BoundingBox(0, 0, arr.shape[1], arr.shape[0]), 1.0)
    if support is None:
        support = np.where(np.isnan(arr), 0, 1).astype(np.int64)
    else:
        support = np.asarray(support, dtype=np.int64)
    return ScoreRaster(grid=grid, channel="perception", epoch=2016, values=arr, support=support)


class TestRampColor:
    def test_sequential_endpoints(self):
        assert ramp_color(0.0, SCORE_RAMP, (0, 10)) == (247, 251, 255)
        assert ramp_color(10.0, SCORE_RAMP, (0, 10)) == (8, 48, 107)

    def test_sequential_midpoint_rounding(self):
        assert ramp_color(5.0, SCORE_RAMP, (0, 10)) == (128, 150, 181)

    def test_grayscale_inverted_full_mismatch_is_black(self):
        assert ramp_color(1.0, MISMATCH_RAMP, (0, 1)) == (0, 0, 0)
        assert ramp_color(0.0, MISMATCH_RAMP, (0, 1)) == (255, 255, 255)

    def test_diverging_midpoint_hits_middle_anchor(self):
        assert ramp_color(0.0, TREND_RAMP, (-2, 2)) == (247, 247, 247)
        assert ramp_color(-2.0, TREND_RAMP, (-2, 2)) == (178, 24, 43)
        assert ramp_color(2.0, TREND_RAMP, (-2, 2)) == (33, 102, 172)

    def test_values_clamped_to_domain(self):
        assert ramp_color(99.0, SCORE_RAMP, (0, 10)) == (8, 48, 107)
        assert ramp_color(-99.0, SCORE_RAMP, (0, 10)) == (247, 251, 255)

    def test_invalid_domain_rejected(self):
        with pytest.raises(ValueError):
            ramp_color(1.0, SCORE_RAMP, (5, 5))

    def test_anchor_arity_checked(self):
        with pytest.raises(ValueError):
            ColorRamp("diverging", ((0, 0, 0), (255, 255, 255)))
        with pytest.raises(ValueError):
            ColorRamp("sequential", ((0, 0, 300),))

    @pytest.mark.property
    @settings(max_examples=1000)
    @given(
        a=st.floats(0, 10, allow_nan=False),
        b=st.floats(0, 10, allow_nan=False),
    )
    def test_monotone_per_channel(self, a, b):
        lo, hi = sorted((a, b))
        c_lo = ramp_color(lo, SCORE_RAMP, (0, 10))
        c_hi = ramp_color(hi, SCORE_RAMP, (0, 10))
        for i, (start, end) in enumerate(zip(*SCORE_RAMP.anchors)):
            if start <= end:
                assert c_lo[i] <= c_hi[i]
            else:
                assert c_lo[i] >= c_hi[i]


class TestRenderRaster:
    def test_single_darkest_pixel(self):
        data = render_raster(score_raster([[10.0]]), SCORE_RAMP)
        assert data == b"P6\n1 1\n255\n" + bytes((8, 48, 107))

    def test_all_missing_raster(self):
        data = render_raster(score_raster([[np.nan, np.nan]]), SCORE_RAMP)
        assert data == b"P6\n2 1\n255\n" + bytes(MISSING_RGB) * 2

    def test_golden_two_by_two(self):
        # Hand-derived: 10 -> darkest anchor, missing -> gray, 0 -> lightest,
        # 5 -> per-channel midpoint with half-up rounding.
        raster = score_raster([[10.0, np.nan], [0.0, 5.0]], support=[[1, 0], [2, 3]])
        expected = b"P6\n2 2\n255\n" + bytes(
            (8, 48, 107, 200, 200, 200, 247, 251, 255, 128, 150, 181)
        )
        assert render_raster(raster, SCORE_RAMP) == expected

    def test_byte_identical_across_calls(self):
        raster = score_raster([[1.0, 4.0], [np.nan, 9.5]])
        assert render_raster(raster, SCORE_RAMP, scale=3) == render_raster(
            raster, SCORE_RAMP, scale=3
        )

    def test_scale_expands_pixels(self):
        data = render_raster(score_raster([[10.0]]), SCORE_RAMP, scale=2)
        assert data.startswith(b"P6\n2 2\n255\n")
        assert data[len(b"P6\n2 2\n255\n"):] == bytes((8, 48, 107)) * 4

    def test_every_present_cell_color_matches_ramp(self):
        values = [[0.0, 2.5, np.nan], [7.5, 10.0, 3.3]]
        raster = score_raster(values)
        data = render_raster(raster, SCORE_RAMP)
        body = data[len(b"P6\n3 2\n255\n"):]
        for idx, (row, col) in enumerate(
            (r, c) for r in range(2) for c in range(3)
        ):
            rgb = tuple(body[idx * 3 : idx * 3 + 3])
            v = values[row][col]
            if math.isnan(v):
                assert rgb == MISSING_RGB
            else:
                assert rgb == ramp_color(v, SCORE_RAMP, (0, 10))

    def test_scale_zero_rejected(self):
        with pytest.raises(ValueError):
            render_raster(score_raster([[1.0]]), SCORE_RAMP, scale=0)


class TestDefaultDomain:
    def test_score_domain(self):
        assert default_domain(score_raster([[3.0]])) == (0.0, 10.0)

    def test_trend_domain_symmetric(self):
        grid = make_grid(BoundingBox(0, 0, 2, 1), 1.0)
        tr = TrendRaster(
            grid=grid, channel="perception", early=2016, late=2022,
            values=np.array([[-3.0, 1.0]]),
        )
        assert default_domain(tr) == (-3.0, 3.0)


class TestExportGeojson:
    def test_single_cell_ring(self):
        raster = score_raster([[6.0]])
        fc = export_geojson(raster)
        assert len(fc["features"]) == 1
        feature = fc["features"][0]
        assert feature["properties"] == {"row": 0, "col": 0, "value": 6.0, "support": 1}
        ring = feature["geometry"]["coordinates"][0]
        assert ring[0] == ring[-1]
        assert [0.0, 0.0] in ring and [1.0, 1.0] in ring

    def test_missing_cells_omitted(self):
        fc = export_geojson(score_raster([[6.0, np.nan]]))
        assert len(fc["features"]) == 1

    def test_cells_roundtrip_through_locate(self):
        raster = score_raster([[1.0, 2.0], [3.0, 4.0]])
        fc = export_geojson(raster)
        for feature in fc["features"]:
            ring = feature["geometry"]["coordinates"][0]
            lon = sum(p[0] for p in ring[:4]) / 4
            lat = sum(p[1] for p in ring[:4]) / 4
            cell = locate(raster.grid, GeoPoint(lon, lat))
            assert cell == (feature["properties"]["row"], feature["properties"]["col"])

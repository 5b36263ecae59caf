"""Turn rasters into color images (binary PPM) and GeoJSON.

PPM P6 is the canonical byte-exact output: the format is a three-line
ASCII header plus raw RGB bytes, so goldens stay stable across platforms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .affectmap import MismatchRaster, ScoreRaster, TrendRaster

RGB = tuple[int, int, int]

#: Cells without data are painted neutral gray.
MISSING_RGB: RGB = (200, 200, 200)


@dataclass(frozen=True)
class ColorRamp:
    """Anchor colors at ramp parameters 0 / (0.5) / 1.

    Sequential and grayscale ramps interpolate two anchors; diverging
    ramps pin a third anchor at the domain midpoint.
    """

    kind: str  # sequential | diverging | grayscale_inverted
    anchors: tuple[RGB, ...]

    def __post_init__(self) -> None:
        expected = 3 if self.kind == "diverging" else 2
        if len(self.anchors) != expected:
            raise ValueError(f"{self.kind} ramp needs {expected} anchors")
        for color in self.anchors:
            if any(not (0 <= c <= 255) for c in color):
                raise ValueError("anchor components must be in [0, 255]")


#: Darker blue = more positive affect.
SCORE_RAMP = ColorRamp("sequential", ((247, 251, 255), (8, 48, 107)))
#: Red = decrease, blue = increase, white = no change.
TREND_RAMP = ColorRamp("diverging", ((178, 24, 43), (247, 247, 247), (33, 102, 172)))
#: Blacker = greater perception/opinion mismatch.
MISMATCH_RAMP = ColorRamp("grayscale_inverted", ((255, 255, 255), (0, 0, 0)))


def _round_half_up(v: float) -> int:
    # Channels are non-negative, so +0.5-and-truncate is half away from zero.
    return int(v + 0.5)


def _lerp(a: RGB, b: RGB, t: float) -> RGB:
    return tuple(_round_half_up(a[i] + (b[i] - a[i]) * t) for i in range(3))  # type: ignore[return-value]


def ramp_color(value: float, ramp: ColorRamp, domain: tuple[float, float]) -> RGB:
    """Map a value through the ramp; values are clamped to the domain."""
    lo, hi = domain
    if not (lo < hi):
        raise ValueError("domain min must be below max")
    t = (min(max(value, lo), hi) - lo) / (hi - lo)
    if ramp.kind == "diverging":
        low, mid, high = ramp.anchors
        if t == 0.5:
            return mid
        if t < 0.5:
            return _lerp(low, mid, t / 0.5)
        return _lerp(mid, high, (t - 0.5) / 0.5)
    a, b = ramp.anchors
    return _lerp(a, b, t)


def default_domain(raster) -> tuple[float, float]:
    """Natural value domain per raster kind.

    Trend domains are symmetric around zero at the max absolute trend, so
    "no change" always lands exactly on the diverging midpoint.
    """
    if isinstance(raster, ScoreRaster):
        return (0.0, 10.0)
    if isinstance(raster, MismatchRaster):
        return (0.0, 1.0)
    if isinstance(raster, TrendRaster):
        present = raster.present
        peak = float(np.max(np.abs(raster.values[present]))) if present.any() else 0.0
        if peak == 0.0:
            peak = 1.0
        return (-peak, peak)
    raise TypeError(f"not a raster: {type(raster).__name__}")


def render_raster(
    raster,
    ramp: ColorRamp,
    scale: int = 1,
    domain: Optional[tuple[float, float]] = None,
) -> bytes:
    """Render one pixel block per cell into P6 PPM bytes (north row first)."""
    if scale < 1:
        raise ValueError("scale must be a positive integer")
    values = raster.values
    n_rows, n_cols = values.shape
    if n_rows == 0 or n_cols == 0:
        raise ValueError("raster has no cells")
    if domain is None:
        domain = default_domain(raster)
    width, height = n_cols * scale, n_rows * scale
    header = f"P6\n{width} {height}\n255\n".encode("ascii")
    body = bytearray()
    for row in range(n_rows):
        line = bytearray()
        for col in range(n_cols):
            v = values[row, col]
            color = MISSING_RGB if math.isnan(v) else ramp_color(float(v), ramp, domain)
            line.extend(bytes(color) * scale)
        body.extend(bytes(line) * scale)
    return header + bytes(body)


def export_geojson(raster) -> dict:
    """One square Polygon feature per present cell, row-major order."""
    grid = raster.grid
    support = getattr(raster, "support", None)
    values = raster.values
    features = []
    n_rows, n_cols = values.shape
    for row in range(n_rows):
        for col in range(n_cols):
            v = values[row, col]
            if math.isnan(v):
                continue
            b = grid.cell_bounds(row, col)
            ring = [
                [b.west, b.south],
                [b.east, b.south],
                [b.east, b.north],
                [b.west, b.north],
                [b.west, b.south],
            ]
            props = {"row": row, "col": col, "value": float(v)}
            if support is not None:
                props["support"] = int(support[row, col])
            features.append(
                {
                    "type": "Feature",
                    "geometry": {"type": "Polygon", "coordinates": [ring]},
                    "properties": props,
                }
            )
    return {"type": "FeatureCollection", "features": features}

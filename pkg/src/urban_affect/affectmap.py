"""Map algebra: score rasters, trend rasters, the mismatch raster, stats.

Rasters are dense 2D float arrays over the study grid with NaN marking
cells without data. Every reduction uses exactly-rounded per-cell sums
(math.fsum), so results are bit-identical across runs and across any
sharding of the input.
"""

from __future__ import annotations

import csv
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import IO, Sequence

import numpy as np

from .geo import Grid, locate
from .percept import bin_score

PERCEPTION = "perception"
OPINION = "opinion"


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True, eq=False)
class ScoreRaster:
    """Per-cell mean affective score for one channel and epoch."""

    grid: Grid
    channel: str
    epoch: int
    values: np.ndarray  # float64, NaN = missing
    support: np.ndarray  # int64 record count per cell
    skipped: int = 0  # records outside the grid

    @property
    def present(self) -> np.ndarray:
        return ~np.isnan(self.values)


@dataclass(frozen=True, eq=False)
class TrendRaster:
    """Cellwise late-epoch minus early-epoch score for one channel."""

    grid: Grid
    channel: str
    early: int
    late: int
    values: np.ndarray

    @property
    def present(self) -> np.ndarray:
        return ~np.isnan(self.values)


@dataclass(frozen=True, eq=False)
class MismatchRaster:
    """Normalized absolute divergence between the two channel trends, in [0, 1]."""

    grid: Grid
    values: np.ndarray

    @property
    def present(self) -> np.ndarray:
        return ~np.isnan(self.values)


@dataclass(frozen=True)
class ScoreDistribution:
    """Decile-bin shares plus the low (< 2) and high (>= 8) score bands."""

    deciles: tuple[float, ...]
    low: float
    high: float
    n: int

    def to_dict(self) -> dict:
        return {"deciles": list(self.deciles), "low": self.low, "high": self.high, "n": self.n}


def aggregate_cells(
    grid: Grid,
    records: Sequence,
    channel: str,
    epoch: int,
    workers: int = 1,
) -> ScoreRaster:
    """Bucket records into cells and take the per-cell mean score.

    Records must carry a score; records of other epochs are ignored and
    records outside the grid are skipped and counted. Per-cell sums are
    exactly rounded, so worker count cannot change any cell value.
    """
    buckets: dict[tuple[int, int], list[tuple[str, float]]] = {}
    skipped = 0
    for rec in records:
        if rec.epoch != epoch:
            continue
        if rec.score is None:
            raise ValueError(f"record {rec.id!r} has no score")
        cell = locate(grid, rec.point)
        if cell is None:
            skipped += 1
            continue
        buckets.setdefault(cell, []).append((rec.id, rec.score))
    values = np.full((grid.n_rows, grid.n_cols), np.nan)
    support = np.zeros((grid.n_rows, grid.n_cols), dtype=np.int64)

    def reduce_cell(item: tuple[tuple[int, int], list[tuple[str, float]]]):
        cell, scored = item
        scored.sort()  # ascending record id
        return cell, math.fsum(s for _, s in scored) / len(scored), len(scored)

    items = sorted(buckets.items())
    if workers > 1 and len(items) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            reduced = list(pool.map(reduce_cell, items))
    else:
        reduced = [reduce_cell(item) for item in items]
    for (row, col), mean, count in reduced:
        values[row, col] = mean
        support[row, col] = count
    return ScoreRaster(
        grid=grid,
        channel=channel,
        epoch=epoch,
        values=_frozen(values),
        support=_frozen(support),
        skipped=skipped,
    )


def smooth(
    raster: ScoreRaster,
    method: str = "none",
    power: float = 2.0,
    radius: int = 1,
) -> ScoreRaster:
    """Optionally fill missing cells by inverse-distance weighting.

    With ``idw``, each missing cell takes the 1/d^power weighted mean of the
    originally present cells within Chebyshev radius ``radius`` (d is the
    Euclidean center distance in cell units). Present cells and support are
    never touched; a missing cell with no neighbors stays missing.
    """
    if method == "none":
        return raster
    if method != "idw":
        raise ValueError(f"unknown smoothing method: {method}")
    if power <= 0:
        raise ValueError("idw power must be positive")
    if radius < 1:
        raise ValueError("idw radius must be at least 1")
    src = raster.values
    out = src.copy()
    n_rows, n_cols = src.shape
    for row in range(n_rows):
        for col in range(n_cols):
            if not math.isnan(src[row, col]):
                continue
            num: list[float] = []
            den: list[float] = []
            for dr in range(-radius, radius + 1):
                r = row + dr
                if r < 0 or r >= n_rows:
                    continue
                for dc in range(-radius, radius + 1):
                    c = col + dc
                    if c < 0 or c >= n_cols:
                        continue
                    v = src[r, c]
                    if math.isnan(v):
                        continue
                    w = 1.0 / math.hypot(dr, dc) ** power
                    num.append(w * v)
                    den.append(w)
            if den:
                out[row, col] = math.fsum(num) / math.fsum(den)
    return ScoreRaster(
        grid=raster.grid,
        channel=raster.channel,
        epoch=raster.epoch,
        values=_frozen(out),
        support=raster.support,
        skipped=raster.skipped,
    )


def trend(late: ScoreRaster, early: ScoreRaster) -> TrendRaster:
    """Late minus early scores where both epochs have data."""
    if late.grid != early.grid:
        raise ValueError("trend inputs must share one grid")
    if late.channel != early.channel:
        raise ValueError("trend inputs must share one channel")
    if late.epoch == early.epoch:
        raise ValueError("trend needs two distinct epochs")
    values = late.values - early.values  # NaN propagates where either is missing
    return TrendRaster(
        grid=late.grid,
        channel=late.channel,
        early=early.epoch,
        late=late.epoch,
        values=_frozen(values),
    )


def _normalize_by_max_abs(values: np.ndarray) -> np.ndarray:
    present = ~np.isnan(values)
    if not present.any():
        return values.copy()
    peak = float(np.max(np.abs(values[present])))
    if peak == 0.0:
        out = values.copy()
        out[present] = 0.0
        return out
    return values / peak


def mismatch(tp: TrendRaster, to: TrendRaster) -> MismatchRaster:
    """Overlay the two channel trends into a [0, 1] divergence raster.

    Each trend is first scaled by its own max absolute value so neither
    channel's variance dominates; half the absolute difference of the
    scaled trends then lands in [0, 1].
    """
    if tp.grid != to.grid:
        raise ValueError("mismatch inputs must share one grid")
    np_hat = _normalize_by_max_abs(tp.values)
    no_hat = _normalize_by_max_abs(to.values)
    values = np.abs(np_hat - no_hat) / 2.0
    return MismatchRaster(grid=tp.grid, values=_frozen(values))


def score_histogram(scores: Sequence[float]) -> ScoreDistribution:
    """Decile shares plus low/high band shares over 0-10 scores."""
    counts = [0] * 10
    low = high = 0
    for s in scores:
        counts[bin_score(s)] += 1
        if s < 2.0:
            low += 1
        if s >= 8.0:
            high += 1
    n = len(scores)
    if n == 0:
        return ScoreDistribution(deciles=(0.0,) * 10, low=0.0, high=0.0, n=0)
    return ScoreDistribution(
        deciles=tuple(c / n for c in counts),
        low=low / n,
        high=high / n,
        n=n,
    )


# --------------------------------------------------------------------------
# Raster export: CSV rows plus a JSON sidecar (see cli for file layout).


def write_raster_csv(raster, stream: IO[str]) -> None:
    """CSV row,col,value,support with missing cells omitted.

    Derived rasters (trend, mismatch) carry no record support; their
    support column is written as 0.
    """
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(["row", "col", "value", "support"])
    support = getattr(raster, "support", None)
    values = raster.values
    n_rows, n_cols = values.shape
    for row in range(n_rows):
        for col in range(n_cols):
            v = values[row, col]
            if math.isnan(v):
                continue
            sup = int(support[row, col]) if support is not None else 0
            writer.writerow([row, col, repr(float(v)), sup])


def raster_sidecar(raster) -> dict:
    """JSON-ready metadata: grid geometry, identity, summary stats."""
    grid = raster.grid
    present = raster.present
    vals = raster.values[present]
    stats: dict = {"n_present": int(present.sum())}
    if vals.size:
        stats.update(
            min=float(vals.min()),
            max=float(vals.max()),
            mean=float(math.fsum(float(v) for v in vals) / vals.size),
        )
    if isinstance(raster, ScoreRaster):
        stats["skipped_outside"] = raster.skipped
        stats["distribution"] = score_histogram([float(v) for v in vals]).to_dict()
    sidecar = {
        "grid": {
            "west": grid.bbox.west,
            "south": grid.bbox.south,
            "east": grid.bbox.east,
            "north": grid.bbox.north,
            "cell_size": grid.cell_size,
            "n_cols": grid.n_cols,
            "n_rows": grid.n_rows,
        },
        "stats": stats,
    }
    if isinstance(raster, ScoreRaster):
        sidecar["channel"] = raster.channel
        sidecar["epoch"] = raster.epoch
    elif isinstance(raster, TrendRaster):
        sidecar["channel"] = raster.channel
        sidecar["epochs"] = {"early": raster.early, "late": raster.late}
    return sidecar

"""Seeded synthetic scenarios with planted ground truth for end-to-end tests.

A scenario plants three kinds of structure and hands back the answer key:

* smooth per-channel base score surfaces over the grid, quantized to
  multiples of 1/8 so per-cell means reproduce them exactly in floats;
* hotspot disks whose per-channel score deltas apply in the late epoch,
  creating known trend and mismatch cells;
* a cubic score-vs-element relation inside one zoning strip.

Every record-level random draw comes from a stream keyed by (seed, channel,
cell, site index) — never by epoch — so two epochs of a site share noise,
positions, and token draws. A scenario without planted divergence therefore
produces bit-identical per-cell statistics in both epochs, and the pipeline
trend is exactly zero rather than merely small.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .geo import BoundingBox, GeoPoint, Grid, make_grid
from .ingest import (
    OpinionRecord,
    PerceptionRecord,
    opinion_to_line,
    perception_to_line,
)
from .percept import N_SEGMENTS, SEGMENT_CLASSES
from .rng import Rng
from .textsent import Lexicon

_STREAM_PERCEPTION = 1
_STREAM_OPINION = 2
_STREAM_CORPUS_POS = 3
_STREAM_CORPUS_NEG = 4

# Synthetic two-character vocabulary: start characters never appear as end
# characters, so concatenated words always re-segment exactly.
_START_CHARS = "山水花风光月星雪"
_POS_END_CHARS = "乐好美妙"
_NEG_END_CHARS = "愁苦怨痛"
POS_WORDS = tuple(_START_CHARS[i] + _POS_END_CHARS[i % 4] for i in range(8))
NEG_WORDS = tuple(_START_CHARS[i] + _NEG_END_CHARS[i % 4] for i in range(8))

#: Probability that a corpus-document token comes from its own class's
#: vocabulary. Keeps per-token log-likelihood ratios moderate so post
#: scores spread over (0, 1) instead of saturating.
_CORPUS_CLASS_MIX = 0.6


def _quantize8(x: float) -> float:
    """Snap to a multiple of 1/8 (exactly representable in binary floats)."""
    return round(x * 8.0) / 8.0


@dataclass(frozen=True)
class HotspotDisk:
    """Disk of cells whose late-epoch scores shift by per-channel deltas."""

    center_row: int
    center_col: int
    radius: int
    delta_perception: float
    delta_opinion: float

    def cells(self, grid: Grid) -> set[tuple[int, int]]:
        out = set()
        r2 = self.radius * self.radius
        for dr in range(-self.radius, self.radius + 1):
            for dc in range(-self.radius, self.radius + 1):
                if dr * dr + dc * dc > r2:
                    continue
                row, col = self.center_row + dr, self.center_col + dc
                if 0 <= row < grid.n_rows and 0 <= col < grid.n_cols:
                    out.add((row, col))
        return out


@dataclass(frozen=True)
class PlantedCubic:
    """Ground-truth cubic relation between one element and the score."""

    zone: str
    element: str
    coefficients: tuple[float, float, float, float]
    noise_sigma: float
    x_max: float = 0.9

    def evaluate(self, x: float) -> float:
        c0, c1, c2, c3 = self.coefficients
        return c0 + c1 * x + c2 * x * x + c3 * x**3


@dataclass(frozen=True)
class ScenarioSpec:
    """Full description of one synthetic scenario."""

    seed: int
    bbox: BoundingBox
    cell_size: float
    early: int
    late: int
    perception_per_cell: int
    opinion_per_cell: int
    base_perception: float
    base_opinion: float
    surface_amplitude: float
    score_sigma: float
    hotspots: tuple[HotspotDisk, ...]
    planted: tuple[PlantedCubic, ...]
    tokens_per_post: int = 6
    corpus_docs_per_class: int = 400
    tokens_per_corpus_doc: int = 8
    emit_opinion_scores: bool = False


@dataclass(frozen=True)
class AnswerKey:
    """What the pipeline should recover from a generated scenario."""

    trend_perception: np.ndarray
    trend_opinion: np.ndarray
    hotspot_cells: frozenset[tuple[int, int]]
    planted: tuple[PlantedCubic, ...]

    def to_dict(self) -> dict:
        return {
            "trend_perception": self.trend_perception.tolist(),
            "trend_opinion": self.trend_opinion.tolist(),
            "hotspot_cells": sorted([r, c] for r, c in self.hotspot_cells),
            "planted": [
                {
                    "zone": p.zone,
                    "element": p.element,
                    "coefficients": list(p.coefficients),
                    "noise_sigma": p.noise_sigma,
                    "x_max": p.x_max,
                }
                for p in self.planted
            ],
        }


@dataclass(frozen=True)
class ScenarioResult:
    spec: ScenarioSpec
    grid: Grid
    perception: list[PerceptionRecord]
    opinion: list[OpinionRecord]
    zoning: dict
    lexicon_entries: dict[str, int]
    pos_corpus: list[str]
    neg_corpus: list[str]
    answer_key: AnswerKey

    @property
    def lexicon(self) -> Lexicon:
        return Lexicon.from_entries(self.lexicon_entries)


#: Scenario geometry uses a dyadic cell size and origin so every cell
#: boundary is exactly representable and the grid is exactly 30x30.
_SYNTH_CELL = 1.0 / 1024.0
_SYNTH_WEST = 116.25
_SYNTH_SOUTH = 39.875
_SYNTH_SIDE = 30


def standard_scenario(seed: int = 20160) -> ScenarioSpec:
    """The fixed scenario the acceptance suite runs (~50k records)."""
    return ScenarioSpec(
        seed=seed,
        bbox=BoundingBox(
            west=_SYNTH_WEST,
            south=_SYNTH_SOUTH,
            east=_SYNTH_WEST + _SYNTH_SIDE * _SYNTH_CELL,
            north=_SYNTH_SOUTH + _SYNTH_SIDE * _SYNTH_CELL,
        ),
        cell_size=_SYNTH_CELL,
        early=2016,
        late=2022,
        perception_per_cell=9,
        opinion_per_cell=18,
        base_perception=5.5,
        base_opinion=5.0,
        surface_amplitude=1.0,
        score_sigma=0.25,
        hotspots=(
            HotspotDisk(8, 20, 3, delta_perception=-2.0, delta_opinion=2.0),
            HotspotDisk(21, 24, 3, delta_perception=2.0, delta_opinion=-2.0),
        ),
        planted=(
            PlantedCubic(
                zone="Special",
                element="building",
                coefficients=(5.8, -7.5, 38.3, -33.5),
                noise_sigma=0.1,
            ),
        ),
    )


def zero_divergence_scenario(seed: int = 20160) -> ScenarioSpec:
    """The standard scenario with no hotspots: both trends must be zero."""
    spec = standard_scenario(seed)
    return ScenarioSpec(**{**spec.__dict__, "hotspots": ()})


# --------------------------------------------------------------------------
# Generation


def _base_surface(spec: ScenarioSpec, grid: Grid, base: float) -> np.ndarray:
    rows = np.arange(grid.n_rows)[:, None]
    cols = np.arange(grid.n_cols)[None, :]
    wave = np.sin(2.0 * np.pi * (cols + 0.5) / grid.n_cols) * np.sin(
        np.pi * (rows + 0.5) / grid.n_rows
    )
    raw = base + spec.surface_amplitude * wave
    return np.round(raw * 8.0) / 8.0


def _delta_map(spec: ScenarioSpec, grid: Grid, channel: str) -> np.ndarray:
    deltas = np.zeros((grid.n_rows, grid.n_cols))
    for disk in spec.hotspots:
        d = disk.delta_perception if channel == "perception" else disk.delta_opinion
        for row, col in disk.cells(grid):
            deltas[row, col] += _quantize8(d)
    return deltas


def _strip_columns(spec: ScenarioSpec, grid: Grid) -> dict[str, tuple[int, int]]:
    """Vertical zoning strips (column ranges) for the planted zones.

    Planted zones share the west quarter of the grid; the remainder is the
    residential background strip.
    """
    strips: dict[str, tuple[int, int]] = {}
    zones = []
    for p in spec.planted:
        if p.zone not in zones:
            zones.append(p.zone)
    if zones:
        planted_width = max(len(zones), grid.n_cols // 4)
        per_zone = planted_width // len(zones)
        start = 0
        for i, zone in enumerate(zones):
            end = start + per_zone if i < len(zones) - 1 else planted_width
            strips[zone] = (start, end)
            start = end
        strips["Residential and public Infrastructure"] = (planted_width, grid.n_cols)
    else:
        strips["Residential and public Infrastructure"] = (0, grid.n_cols)
    return strips


def _strips_to_geojson(strips: dict[str, tuple[int, int]], grid: Grid) -> dict:
    features = []
    for zone, (c0, c1) in sorted(strips.items(), key=lambda kv: kv[1][0]):
        west = grid.bbox.west + c0 * grid.cell_size
        east = grid.bbox.west + c1 * grid.cell_size if c1 < grid.n_cols else grid.bbox.east
        ring = [
            [west, grid.bbox.south],
            [east, grid.bbox.south],
            [east, grid.bbox.north],
            [west, grid.bbox.north],
            [west, grid.bbox.south],
        ]
        features.append(
            {
                "type": "Feature",
                "geometry": {"type": "Polygon", "coordinates": [ring]},
                "properties": {"zone": zone},
            }
        )
    return {"type": "FeatureCollection", "features": features}


def _validate(
    spec: ScenarioSpec,
    grid: Grid,
    strips: dict[str, tuple[int, int]],
    fields: dict[str, tuple[np.ndarray, np.ndarray]],
) -> None:
    if spec.perception_per_cell <= 0 or spec.opinion_per_cell <= 0:
        raise ValueError("record counts must be positive")
    if spec.score_sigma < 0:
        raise ValueError("score sigma must be non-negative")
    if spec.early == spec.late:
        raise ValueError("epochs must be distinct")
    for channel, (base, delta) in fields.items():
        late = base + delta
        if min(base.min(), late.min()) < 0.0 or max(base.max(), late.max()) > 10.0:
            raise ValueError(f"infeasible spec: {channel} deltas push scores out of [0, 10]")
    planted_cols = {
        col
        for p in spec.planted
        for col in range(*strips[p.zone])
    }
    for disk in spec.hotspots:
        if any(col in planted_cols for _, col in disk.cells(grid)):
            raise ValueError("infeasible spec: hotspot overlaps a planted-regression strip")
    for p in spec.planted:
        if p.element not in SEGMENT_CLASSES:
            raise ValueError(f"unknown element {p.element!r}")
        if not (0 < p.x_max <= 1.0):
            raise ValueError("x_max must be in (0, 1]")
        xs = np.linspace(0.0, p.x_max, 2001)
        vals = [p.evaluate(float(v)) for v in xs]
        margin = 4.0 * p.noise_sigma
        if min(vals) - margin < 0.0 or max(vals) + margin > 10.0:
            raise ValueError("infeasible spec: planted cubic leaves the score range")


def _jitter_point(grid: Grid, row: int, col: int, u: float, v: float) -> GeoPoint:
    # Keep points strictly interior to their cell so float rounding can
    # never push them across a cell (and hence strip) boundary.
    b = grid.cell_bounds(row, col)
    return GeoPoint(
        lon=b.west + (0.05 + 0.9 * u) * grid.cell_size,
        lat=b.south + (0.05 + 0.9 * v) * grid.cell_size,
    )


def _clamp_score(x: float) -> float:
    return min(max(x, 0.0), 10.0)


def _make_corpora(spec: ScenarioSpec) -> tuple[list[str], list[str]]:
    def build(stream_tag: int, own: tuple[str, ...], other: tuple[str, ...]) -> list[str]:
        docs = []
        for d in range(spec.corpus_docs_per_class):
            rng = Rng(spec.seed, stream_tag, d)
            tokens = []
            for _ in range(spec.tokens_per_corpus_doc):
                pool = own if rng.uniform() < _CORPUS_CLASS_MIX else other
                tokens.append(pool[rng.below(len(pool))])
            docs.append("".join(tokens))
        return docs

    return (
        build(_STREAM_CORPUS_POS, POS_WORDS, NEG_WORDS),
        build(_STREAM_CORPUS_NEG, NEG_WORDS, POS_WORDS),
    )


def generate_scenario(spec: ScenarioSpec) -> ScenarioResult:
    """Produce records, zoning, corpora, and the answer key for a spec."""
    grid = make_grid(spec.bbox, spec.cell_size)
    strips = _strip_columns(spec, grid)

    base_p = _base_surface(spec, grid, spec.base_perception)
    base_o = _base_surface(spec, grid, spec.base_opinion)
    delta_p = _delta_map(spec, grid, "perception")
    delta_o = _delta_map(spec, grid, "opinion")
    _validate(
        spec,
        grid,
        strips,
        {"perception": (base_p, delta_p), "opinion": (base_o, delta_o)},
    )

    planted_by_zone = {p.zone: p for p in spec.planted}
    col_to_planted: dict[int, PlantedCubic] = {}
    for zone, (c0, c1) in strips.items():
        if zone in planted_by_zone:
            for col in range(c0, c1):
                col_to_planted[col] = planted_by_zone[zone]

    epochs = (spec.early, spec.late)
    perception: list[PerceptionRecord] = []
    opinion: list[OpinionRecord] = []

    for row in range(grid.n_rows):
        for col in range(grid.n_cols):
            planted = col_to_planted.get(col)
            for i in range(spec.perception_per_cell):
                rng = Rng(spec.seed, _STREAM_PERCEPTION, row, col, i)
                point = _jitter_point(grid, row, col, rng.uniform(), rng.uniform())
                segments = [0.0] * N_SEGMENTS
                if planted is not None:
                    x = rng.uniform() * planted.x_max
                    for j in range(N_SEGMENTS):
                        segments[j] = rng.uniform() * 0.005
                    segments[SEGMENT_CLASSES.index(planted.element)] = x
                    noise = planted.noise_sigma * rng.normal()
                    score = _clamp_score(planted.evaluate(x) + noise)
                    scores = {epoch: score for epoch in epochs}
                else:
                    for j in range(N_SEGMENTS):
                        segments[j] = rng.uniform() * 0.03
                    g = rng.normal()
                    scores = {}
                    for epoch in epochs:
                        v = base_p[row, col] + (delta_p[row, col] if epoch == spec.late else 0.0)
                        scores[epoch] = _clamp_score(v + spec.score_sigma * g)
                for epoch in epochs:
                    perception.append(
                        PerceptionRecord(
                            id=f"p{epoch}-r{row:03d}c{col:03d}-{i:03d}",
                            point=point,
                            epoch=epoch,
                            score=scores[epoch],
                            segments=tuple(segments),
                        )
                    )
            for i in range(spec.opinion_per_cell):
                rng = Rng(spec.seed, _STREAM_OPINION, row, col, i)
                point = _jitter_point(grid, row, col, rng.uniform(), rng.uniform())
                draws = [
                    (rng.uniform(), rng.below(len(POS_WORDS)))
                    for _ in range(spec.tokens_per_post)
                ]
                for epoch in epochs:
                    value = base_o[row, col] + (delta_o[row, col] if epoch == spec.late else 0.0)
                    q = value / 10.0
                    text = "".join(
                        POS_WORDS[idx] if u < q else NEG_WORDS[idx] for u, idx in draws
                    )
                    opinion.append(
                        OpinionRecord(
                            id=f"o{epoch}-r{row:03d}c{col:03d}-{i:03d}",
                            point=point,
                            epoch=epoch,
                            text=text,
                            score=value if spec.emit_opinion_scores else None,
                        )
                    )

    pos_corpus, neg_corpus = _make_corpora(spec)
    lexicon_entries = {w: 100 for w in POS_WORDS + NEG_WORDS}

    # Answer key: planted-strip cells have epoch-constant perception scores,
    # so their true perception trend is zero regardless of hotspots.
    trend_p = delta_p.copy()
    for col in col_to_planted:
        trend_p[:, col] = 0.0
    trend_o = delta_o.copy()
    hotspot_cells = set()
    for disk in spec.hotspots:
        if disk.delta_perception != disk.delta_opinion:
            hotspot_cells |= disk.cells(grid)

    return ScenarioResult(
        spec=spec,
        grid=grid,
        perception=perception,
        opinion=opinion,
        zoning=_strips_to_geojson(strips, grid),
        lexicon_entries=lexicon_entries,
        pos_corpus=pos_corpus,
        neg_corpus=neg_corpus,
        answer_key=AnswerKey(
            trend_perception=trend_p,
            trend_opinion=trend_o,
            hotspot_cells=frozenset(hotspot_cells),
            planted=spec.planted,
        ),
    )


# --------------------------------------------------------------------------
# File emission (exactly the ingest/textsent input formats)


def write_scenario(result: ScenarioResult, outdir: str | Path) -> dict[str, str]:
    """Write all scenario files plus a ready-to-run pipeline config.

    Returns the config dictionary that was written to config.json; all
    paths inside it are relative to the output directory.
    """
    out = Path(outdir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "perception.jsonl").write_text(
        "".join(perception_to_line(r) + "\n" for r in result.perception), encoding="utf-8"
    )
    (out / "opinion.jsonl").write_text(
        "".join(opinion_to_line(r) + "\n" for r in result.opinion), encoding="utf-8"
    )
    (out / "zoning.geojson").write_text(
        json.dumps(result.zoning, ensure_ascii=False, sort_keys=True), encoding="utf-8"
    )
    (out / "lexicon.tsv").write_text(
        "".join(f"{w}\t{c}\n" for w, c in sorted(result.lexicon_entries.items())),
        encoding="utf-8",
    )
    (out / "corpus_pos.txt").write_text(
        "".join(doc + "\n" for doc in result.pos_corpus), encoding="utf-8"
    )
    (out / "corpus_neg.txt").write_text(
        "".join(doc + "\n" for doc in result.neg_corpus), encoding="utf-8"
    )
    (out / "stopwords.txt").write_text("", encoding="utf-8")
    (out / "answer_key.json").write_text(
        json.dumps(result.answer_key.to_dict(), sort_keys=True), encoding="utf-8"
    )
    spec = result.spec
    config = {
        "perception_path": "perception.jsonl",
        "opinion_path": "opinion.jsonl",
        "zoning_path": "zoning.geojson",
        "lexicon_path": "lexicon.tsv",
        "pos_corpus_path": "corpus_pos.txt",
        "neg_corpus_path": "corpus_neg.txt",
        "stopwords_path": "stopwords.txt",
        "bbox": {
            "west": spec.bbox.west,
            "south": spec.bbox.south,
            "east": spec.bbox.east,
            "north": spec.bbox.north,
        },
        "cell_size": spec.cell_size,
        "epochs": {"early": spec.early, "late": spec.late},
        "smoothing": {"method": "none", "power": 2.0, "radius": 1},
        "regression": {"r_square_min": 0.3, "sig_max": 0.01},
        "wordfreq_k": 50,
        "output_dir": "out",
        "seed": spec.seed,
        "workers": 1,
    }
    (out / "config.json").write_text(json.dumps(config, indent=2, sort_keys=True), encoding="utf-8")
    return config

"""Parse and validate the three input datasets at the component boundary.

Perception and opinion records arrive as UTF-8 line-delimited JSON objects
(one record per line); zoning arrives as a GeoJSON FeatureCollection.
Malformed lines never pass silently: each is counted and tagged with a
stable reason string, and accepted + rejected always equals the number of
input lines.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import IO, Iterable, Optional, Sequence

from . import percept
from .geo import GeoPoint, Grid, ZonePolygon, ZoningSet, locate

PERCEPTION_CHANNEL = "perception"
OPINION_CHANNEL = "opinion"

_PERCEPTION_FIELDS = {"id", "lon", "lat", "epoch", "score", "segments"}
_OPINION_REQUIRED = {"id", "lon", "lat", "epoch", "text"}
_OPINION_FIELDS = _OPINION_REQUIRED | {"score"}


@dataclass(frozen=True)
class PerceptionRecord:
    """One geotagged street-view observation."""

    id: str
    point: GeoPoint
    epoch: int
    score: float
    segments: tuple[float, ...]


@dataclass(frozen=True)
class OpinionRecord:
    """One geotagged text post; score may be filled later by the scorer."""

    id: str
    point: GeoPoint
    epoch: int
    text: str
    score: Optional[float] = None


@dataclass
class IngestReport:
    """Bookkeeping for one parse or dataset-stats pass."""

    channel: str
    total: int = 0
    accepted: int = 0
    rejected: int = 0
    reasons: dict[str, int] = field(default_factory=dict)
    per_epoch: dict[int, int] = field(default_factory=dict)
    bbox_coverage: Optional[float] = None
    cell_occupancy: Optional[dict[int, int]] = None

    def reject(self, reason: str) -> None:
        self.rejected += 1
        self.reasons[reason] = self.reasons.get(reason, 0) + 1

    def accept(self, epoch: int) -> None:
        self.accepted += 1
        self.per_epoch[epoch] = self.per_epoch.get(epoch, 0) + 1

    def to_dict(self) -> dict:
        return {
            "channel": self.channel,
            "total": self.total,
            "accepted": self.accepted,
            "rejected": self.rejected,
            "reasons": dict(sorted(self.reasons.items())),
            "per_epoch": {str(k): v for k, v in sorted(self.per_epoch.items())},
            "bbox_coverage": self.bbox_coverage,
            "cell_occupancy": None
            if self.cell_occupancy is None
            else {str(k): v for k, v in sorted(self.cell_occupancy.items())},
        }


class SchemaError(ValueError):
    """A per-line schema violation; str(exc) is the rejection reason."""


def _reject_constant(token: str) -> None:
    raise SchemaError("non-finite number")


def _load_object(line: str) -> dict:
    try:
        obj = json.loads(line, parse_constant=_reject_constant)
    except SchemaError:
        raise
    except json.JSONDecodeError:
        raise SchemaError("invalid json") from None
    if not isinstance(obj, dict):
        raise SchemaError("not an object")
    return obj


def _check_fields(obj: dict, required: set[str], allowed: set[str]) -> None:
    for name in sorted(required):
        if name not in obj:
            raise SchemaError(f"missing field: {name}")
    for name in sorted(obj):
        if name not in allowed:
            raise SchemaError(f"unexpected field: {name}")


def _number(obj: dict, name: str) -> float:
    v = obj[name]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise SchemaError(f"{name} not a number")
    v = float(v)
    if not math.isfinite(v):
        raise SchemaError("non-finite number")
    return v


def _record_id(obj: dict, seen: set[str]) -> str:
    rid = obj["id"]
    if not isinstance(rid, str):
        raise SchemaError("id not a string")
    if not rid:
        raise SchemaError("empty id")
    if rid in seen:
        raise SchemaError("duplicate id")
    return rid


def _point(obj: dict) -> GeoPoint:
    lon = _number(obj, "lon")
    lat = _number(obj, "lat")
    if not (-180.0 <= lon <= 180.0):
        raise SchemaError("lon out of range")
    if not (-90.0 <= lat <= 90.0):
        raise SchemaError("lat out of range")
    return GeoPoint(lon=lon, lat=lat)


def _epoch(obj: dict, epochs: Optional[frozenset[int]]) -> int:
    v = obj["epoch"]
    if isinstance(v, bool) or not isinstance(v, int):
        raise SchemaError("epoch not an integer")
    if epochs is not None and v not in epochs:
        raise SchemaError("epoch not in declared set")
    return v


def _score(obj: dict) -> float:
    score = _number(obj, "score")
    if not (0.0 <= score <= 10.0):
        raise SchemaError("score out of range")
    return score


def parse_perception(
    lines: Iterable[str], epochs: Optional[Iterable[int]] = None
) -> tuple[list[PerceptionRecord], IngestReport]:
    """Parse perception JSON lines; returns accepted records plus a report."""
    epoch_set = None if epochs is None else frozenset(epochs)
    report = IngestReport(channel=PERCEPTION_CHANNEL)
    records: list[PerceptionRecord] = []
    seen: set[str] = set()
    for line in lines:
        report.total += 1
        if not line.strip():
            report.reject("blank line")
            continue
        try:
            obj = _load_object(line)
            _check_fields(obj, _PERCEPTION_FIELDS, _PERCEPTION_FIELDS)
            rid = _record_id(obj, seen)
            point = _point(obj)
            epoch = _epoch(obj, epoch_set)
            score = _score(obj)
            raw_segments = obj["segments"]
            if not isinstance(raw_segments, list):
                raise SchemaError("segments not an array")
            try:
                segments = percept.validate_segments(raw_segments)
            except ValueError as exc:
                raise SchemaError(str(exc)) from None
        except SchemaError as exc:
            report.reject(str(exc))
            continue
        seen.add(rid)
        records.append(
            PerceptionRecord(id=rid, point=point, epoch=epoch, score=score, segments=segments)
        )
        report.accept(epoch)
    return records, report


def parse_opinion(
    lines: Iterable[str], epochs: Optional[Iterable[int]] = None
) -> tuple[list[OpinionRecord], IngestReport]:
    """Parse opinion JSON lines; the score field is optional."""
    epoch_set = None if epochs is None else frozenset(epochs)
    report = IngestReport(channel=OPINION_CHANNEL)
    records: list[OpinionRecord] = []
    seen: set[str] = set()
    for line in lines:
        report.total += 1
        if not line.strip():
            report.reject("blank line")
            continue
        try:
            obj = _load_object(line)
            _check_fields(obj, _OPINION_REQUIRED, _OPINION_FIELDS)
            rid = _record_id(obj, seen)
            point = _point(obj)
            epoch = _epoch(obj, epoch_set)
            text = obj["text"]
            if not isinstance(text, str):
                raise SchemaError("text not a string")
            if not text.strip():
                raise SchemaError("empty text")
            score = _score(obj) if "score" in obj else None
        except SchemaError as exc:
            report.reject(str(exc))
            continue
        seen.add(rid)
        records.append(OpinionRecord(id=rid, point=point, epoch=epoch, text=text, score=score))
        report.accept(epoch)
    return records, report


def perception_to_line(rec: PerceptionRecord) -> str:
    """Serialize a record to its JSON line; parsing it back is bit-exact."""
    return json.dumps(
        {
            "id": rec.id,
            "lon": rec.point.lon,
            "lat": rec.point.lat,
            "epoch": rec.epoch,
            "score": rec.score,
            "segments": list(rec.segments),
        },
        ensure_ascii=False,
    )


def opinion_to_line(rec: OpinionRecord) -> str:
    obj = {
        "id": rec.id,
        "lon": rec.point.lon,
        "lat": rec.point.lat,
        "epoch": rec.epoch,
        "text": rec.text,
    }
    if rec.score is not None:
        obj["score"] = rec.score
    return json.dumps(obj, ensure_ascii=False)


# --------------------------------------------------------------------------
# Zoning GeoJSON


def parse_zoning(document: str | dict) -> ZoningSet:
    """Parse a GeoJSON FeatureCollection of zoned Polygon/MultiPolygon features.

    Unknown zone labels and non-polygon geometries are fatal: zoning is a
    small curated layer and must be fixed at the source, not skipped.
    """
    doc = json.loads(document) if isinstance(document, str) else document
    if not isinstance(doc, dict) or doc.get("type") != "FeatureCollection":
        raise ValueError("zoning document must be a GeoJSON FeatureCollection")
    polygons: list[ZonePolygon] = []
    for i, feature in enumerate(doc.get("features", [])):
        props = feature.get("properties") or {}
        label = props.get("zone")
        geometry = feature.get("geometry") or {}
        gtype = geometry.get("type")
        coords = geometry.get("coordinates")
        if gtype == "Polygon":
            parts = [coords]
        elif gtype == "MultiPolygon":
            parts = coords
        else:
            raise ValueError(f"feature {i}: geometry must be Polygon or MultiPolygon, got {gtype}")
        for part in parts:
            rings = []
            for ring in part:
                points = [GeoPoint(lon=float(x), lat=float(y)) for x, y in ring]
                # GeoJSON rings repeat the first vertex; drop the closure.
                if len(points) > 1 and points[0] == points[-1]:
                    points = points[:-1]
                rings.append(points)
            polygons.append(ZonePolygon.create(label, rings))
    return ZoningSet(polygons=tuple(polygons))


# --------------------------------------------------------------------------
# Dataset statistics


def dataset_stats(records: Sequence, grid: Grid) -> IngestReport:
    """Per-epoch counts, bbox coverage, and a per-cell occupancy histogram.

    ``cell_occupancy`` maps a record count to the number of grid cells
    holding exactly that many records (empty cells are not listed).
    """
    report = IngestReport(channel="all", total=len(records))
    cell_counts: dict[tuple[int, int], int] = {}
    inside = 0
    for rec in records:
        report.accept(rec.epoch)
        cell = locate(grid, rec.point)
        if cell is not None:
            inside += 1
            cell_counts[cell] = cell_counts.get(cell, 0) + 1
    report.bbox_coverage = inside / len(records) if records else 0.0
    occupancy: dict[int, int] = {}
    for count in cell_counts.values():
        occupancy[count] = occupancy.get(count, 0) + 1
    report.cell_occupancy = occupancy
    return report

"""Batch exporters emitting the perception ingestion format.

``export_segments`` runs the segmenter over every geotagged image and
writes one JSON object per line with the 17 element proportions (scores
absent); ``export_scores`` runs the classifier and ``merge_scores`` joins
the two by image id into full ingestion rows. Rows are always written in
ascending id order, so exports are reproducible byte for byte.
"""

from __future__ import annotations

import csv
import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import IO, Iterable, Sequence

import numpy as np

from . import ELEMENTS
from .classmap import ClassMap
from .models import Scorer, Segmenter

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class GeotagRow:
    """One image's position and epoch, from the geotag CSV."""

    image_id: str
    lon: float
    lat: float
    epoch: int


def load_geotags(stream: IO[str]) -> list[GeotagRow]:
    """Parse CSV image_id,lon,lat,epoch (header optional)."""
    rows = []
    seen = set()
    for lineno, row in enumerate(csv.reader(stream), start=1):
        if not row or row == ["image_id", "lon", "lat", "epoch"]:
            continue
        if len(row) != 4:
            raise ValueError(f"geotag line {lineno}: expected 4 columns")
        image_id, lon, lat, epoch = row
        if image_id in seen:
            raise ValueError(f"geotag line {lineno}: duplicate image id {image_id!r}")
        seen.add(image_id)
        rows.append(GeotagRow(image_id, float(lon), float(lat), int(epoch)))
    return rows


def segment_proportions(labels: np.ndarray, class_map: ClassMap) -> tuple[float, ...]:
    """Pixel share of each element class; unmapped-to-other pixels only
    count toward the denominator."""
    total = labels.size
    if total == 0:
        raise ValueError("empty label map")
    counts = dict.fromkeys(ELEMENTS, 0)
    model_labels, label_counts = np.unique(labels, return_counts=True)
    for model_label, count in zip(model_labels, label_counts):
        element = class_map.element_for(str(model_label))
        if element in counts:
            counts[element] += int(count)
    return tuple(counts[e] / total for e in ELEMENTS)


def export_segments(
    image_dir: str | Path,
    geotags: Sequence[GeotagRow],
    class_map: ClassMap,
    segmenter: Segmenter,
    out: IO[str],
    suffix: str = ".png",
) -> int:
    """Write segment rows (scores absent) for every readable image.

    Unreadable images are skipped and logged; returns the number of rows
    written.
    """
    image_dir = Path(image_dir)
    written = 0
    for tag in sorted(geotags, key=lambda t: t.image_id):
        path = image_dir / f"{tag.image_id}{suffix}"
        try:
            labels = segmenter(path)
        except OSError as exc:
            log.warning("skipping unreadable image %s: %s", path, exc)
            continue
        proportions = segment_proportions(labels, class_map)
        row = {
            "id": tag.image_id,
            "lon": tag.lon,
            "lat": tag.lat,
            "epoch": tag.epoch,
            "segments": list(proportions),
        }
        out.write(json.dumps(row, ensure_ascii=False) + "\n")
        written += 1
    return written


def export_scores(
    image_dir: str | Path,
    image_ids: Iterable[str],
    scorer: Scorer,
    out: IO[str],
    suffix: str = ".png",
) -> int:
    """Write CSV image_id,score for every image, in ascending id order."""
    image_dir = Path(image_dir)
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["image_id", "score"])
    written = 0
    for image_id in sorted(image_ids):
        prediction = scorer(image_dir / f"{image_id}{suffix}")
        writer.writerow([image_id, repr(prediction.as_score())])
        written += 1
    return written


def load_scores(stream: IO[str]) -> dict[str, float]:
    scores = {}
    for row in csv.reader(stream):
        if not row or row == ["image_id", "score"]:
            continue
        scores[row[0]] = float(row[1])
    return scores


def merge_scores(
    segment_lines: Iterable[str],
    scores: dict[str, float],
    out: IO[str],
) -> int:
    """Join scores onto segment rows by id, producing full ingestion rows.

    Ids present on only one side are fatal: a silent partial join would
    fabricate a dataset that looks complete.
    """
    rows = [json.loads(line) for line in segment_lines if line.strip()]
    segment_ids = {row["id"] for row in rows}
    orphan_segments = sorted(segment_ids - set(scores))
    orphan_scores = sorted(set(scores) - segment_ids)
    if orphan_segments or orphan_scores:
        raise ValueError(
            "id mismatch between segment and score exports; "
            f"unscored ids: {orphan_segments[:10]}; scores without rows: {orphan_scores[:10]}"
        )
    written = 0
    for row in sorted(rows, key=lambda r: r["id"]):
        ordered = {
            "id": row["id"],
            "lon": row["lon"],
            "lat": row["lat"],
            "epoch": row["epoch"],
            "score": scores[row["id"]],
            "segments": row["segments"],
        }
        out.write(json.dumps(ordered, ensure_ascii=False) + "\n")
        written += 1
    return written

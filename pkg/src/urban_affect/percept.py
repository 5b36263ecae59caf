"""Questionnaire rating aggregation, decile score bins, segment validation."""

from __future__ import annotations

import csv
import math
from typing import IO, Iterable, Mapping, Sequence

from .rng import Rng

#: The urban-element classes a segment-proportion vector covers, in order.
SEGMENT_CLASSES = (
    "sky",
    "building",
    "green",
    "road",
    "sidewalk",
    "pedestrian",
    "transportation",
    "waterbody",
    "seating",
    "fence",
    "sign_and_symbols",
    "sign_lighting",
    "pole",
    "bicyclist",
    "pot",
    "animal",
    "trash",
)

N_SEGMENTS = len(SEGMENT_CLASSES)

SEGMENT_SUM_TOLERANCE = 1e-6
_NEGATIVE_CLAMP = -1e-9


def sample_for_annotation(records: Iterable, n: int, seed: int) -> list[str]:
    """Draw a reproducible uniform sample of record ids for hand-rating.

    Ids are sorted, selected by a partial Fisher-Yates shuffle driven by the
    pinned generator, and returned sorted, so the same (population, n, seed)
    always yields the same ids.
    """
    ids = sorted(getattr(r, "id", r) for r in records)
    if n > len(ids):
        raise ValueError(f"cannot sample {n} from population of {len(ids)}")
    rng = Rng(seed)
    for i in range(n):
        j = i + rng.below(len(ids) - i)
        ids[i], ids[j] = ids[j], ids[i]
    return sorted(ids[:n])


def aggregate_ratings(sheet: Mapping[str, Sequence[float]]) -> dict[str, float]:
    """Mean rater score per image.

    Values are summed in ascending value order (exactly-rounded via fsum),
    so the result is bit-identical under any permutation of raters.
    """
    means: dict[str, float] = {}
    for image_id, scores in sheet.items():
        if len(scores) == 0:
            raise ValueError(f"image {image_id!r} has no ratings")
        for s in scores:
            if not (0.0 <= s <= 10.0):
                raise ValueError(f"rating out of range for {image_id!r}: {s}")
        means[image_id] = math.fsum(sorted(scores)) / len(scores)
    return means


def bin_score(score: float) -> int:
    """Decile bin index of a 0-10 score; the last bin is closed at 10."""
    if not (0.0 <= score <= 10.0):
        raise ValueError(f"score out of range: {score}")
    return min(int(score), 9)


def validate_segments(values: Sequence[float]) -> tuple[float, ...]:
    """Check a 17-entry segment-proportion vector and return it normalized.

    Negative noise within -1e-9 is clamped to zero; anything else out of
    [0, 1], a wrong arity, or a sum exceeding 1 by more than 1e-6 raises.
    The remainder up to 1 belongs to unlisted classes and stays implicit.
    """
    if len(values) != N_SEGMENTS:
        raise ValueError("segment arity")
    out = []
    for v in values:
        if not isinstance(v, (int, float)) or isinstance(v, bool) or not math.isfinite(v):
            raise ValueError("segment not a number")
        if _NEGATIVE_CLAMP <= v < 0.0:
            v = 0.0
        if not (0.0 <= v <= 1.0):
            raise ValueError("segment out of range")
        out.append(float(v))
    if math.fsum(out) > 1.0 + SEGMENT_SUM_TOLERANCE:
        raise ValueError("segment sum exceeds 1")
    return tuple(out)


# --------------------------------------------------------------------------
# Rating-sheet I/O: CSV "image_id,rater_id,score" in, labels CSV out.


def load_rating_sheet(stream: IO[str]) -> dict[str, list[float]]:
    """Parse a rating CSV into image id -> rater scores (input order kept)."""
    sheet: dict[str, list[float]] = {}
    reader = csv.reader(stream)
    for lineno, row in enumerate(reader, start=1):
        if not row or row == ["image_id", "rater_id", "score"]:
            continue
        if len(row) != 3:
            raise ValueError(f"rating sheet line {lineno}: expected 3 columns")
        image_id, _rater_id, raw = row
        try:
            score = float(raw)
        except ValueError as exc:
            raise ValueError(f"rating sheet line {lineno}: bad score {raw!r}") from exc
        if not (0.0 <= score <= 10.0):
            raise ValueError(f"rating sheet line {lineno}: score out of range")
        sheet.setdefault(image_id, []).append(score)
    return sheet


def write_labels_csv(means: Mapping[str, float], stream: IO[str]) -> None:
    """Emit training labels as CSV image_id,mean_score,bin (sorted by id)."""
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(["image_id", "mean_score", "bin"])
    for image_id in sorted(means):
        mean = means[image_id]
        writer.writerow([image_id, repr(mean), bin_score(mean)])

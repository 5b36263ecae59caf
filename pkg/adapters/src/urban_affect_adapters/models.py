"""Pluggable model wrappers: per-pixel segmenters and per-image scorers.

Real pretrained models are supplied by the caller as ``module:function``
references; the stubs here exist so the export plumbing and its schema
contract can run without any weights.
"""

from __future__ import annotations

import importlib
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import numpy as np
from PIL import Image

#: A segmenter maps an image path to a 2D array of model label strings.
Segmenter = Callable[[Path], np.ndarray]


@dataclass(frozen=True)
class ScorePrediction:
    """Classifier output: a decile bin index or a continuous score."""

    kind: str  # "bin" | "continuous"
    value: float

    def as_score(self) -> float:
        """Collapse to the 0-10 scale: bins map to their centers,
        continuous outputs are clamped."""
        if self.kind == "bin":
            bin_index = int(self.value)
            if not (0 <= bin_index <= 9):
                raise ValueError(f"bin index out of range: {self.value}")
            return bin_index + 0.5
        if self.kind == "continuous":
            return min(max(float(self.value), 0.0), 10.0)
        raise ValueError(f"unknown prediction kind: {self.kind}")


#: A scorer maps an image path to a ScorePrediction.
Scorer = Callable[[Path], ScorePrediction]


class PaletteSegmenter:
    """Stub segmenter labelling each pixel by its exact RGB color.

    The palette maps ``"r,g,b"`` strings to model labels; colors outside
    the palette become the ``unknown`` label (route it via the class map).
    """

    def __init__(self, palette: dict[str, str], unknown: str = "unknown") -> None:
        self._palette = {
            tuple(int(c) for c in key.split(",")): label for key, label in palette.items()
        }
        self._unknown = unknown

    @classmethod
    def load(cls, path: str | Path) -> "PaletteSegmenter":
        return cls(json.loads(Path(path).read_text(encoding="utf-8")))

    def __call__(self, image_path: Path) -> np.ndarray:
        with Image.open(image_path) as img:
            rgb = np.asarray(img.convert("RGB"))
        labels = np.full(rgb.shape[:2], self._unknown, dtype=object)
        for color, label in self._palette.items():
            mask = (rgb == np.array(color, dtype=np.uint8)).all(axis=2)
            labels[mask] = label
        return labels


class StubBinScorer:
    """Stub classifier that predicts one fixed decile bin for every image."""

    def __init__(self, bin_index: int) -> None:
        self._bin = bin_index

    def __call__(self, image_path: Path) -> ScorePrediction:
        return ScorePrediction(kind="bin", value=self._bin)


class StubContinuousScorer:
    """Stub regression head that emits one fixed raw value for every image."""

    def __init__(self, value: float) -> None:
        self._value = value

    def __call__(self, image_path: Path) -> ScorePrediction:
        return ScorePrediction(kind="continuous", value=self._value)


def load_callable(spec: str):
    """Resolve a ``package.module:attribute`` reference to a callable."""
    module_name, _, attr = spec.partition(":")
    if not attr:
        raise ValueError(f"model reference must look like module:function, got {spec!r}")
    obj = importlib.import_module(module_name)
    for part in attr.split("."):
        obj = getattr(obj, part)
    if not callable(obj):
        raise TypeError(f"{spec!r} does not resolve to a callable")
    return obj

"""Many-to-one mapping from model label vocabularies onto the 17 elements.

The mapping ships as an editable CSV (``model_label,element``); the bundled
default covers the common ADE20K scene-parsing vocabulary. A row with
model label ``*`` routes every otherwise-unmapped label to its element
(normally ``other``); without such a row an unmapped label is a
configuration error, never a silent drop.
"""

from __future__ import annotations

import csv
from importlib import resources
from pathlib import Path
from typing import IO, Mapping

from . import ELEMENTS, OTHER

WILDCARD = "*"

_LEGAL_TARGETS = set(ELEMENTS) | {OTHER}


class ClassMapError(ValueError):
    """A class-map configuration problem (bad target or uncovered label)."""


class ClassMap:
    """Lookup table from model labels to element names (or ``other``)."""

    def __init__(self, mapping: Mapping[str, str]) -> None:
        for label, element in mapping.items():
            if element not in _LEGAL_TARGETS:
                raise ClassMapError(
                    f"class map routes {label!r} to unknown element {element!r}"
                )
        self._mapping = dict(mapping)

    def element_for(self, model_label: str) -> str:
        if model_label in self._mapping:
            return self._mapping[model_label]
        if WILDCARD in self._mapping:
            return self._mapping[WILDCARD]
        raise ClassMapError(
            f"model label {model_label!r} is not covered by the class map "
            f"and no '{WILDCARD}' route exists"
        )

    @classmethod
    def load(cls, stream: IO[str]) -> "ClassMap":
        mapping: dict[str, str] = {}
        for lineno, row in enumerate(csv.reader(stream), start=1):
            if not row or row == ["model_label", "element"]:
                continue
            if len(row) != 2:
                raise ClassMapError(f"class map line {lineno}: expected 2 columns")
            mapping[row[0]] = row[1]
        if not mapping:
            raise ClassMapError("class map is empty")
        return cls(mapping)

    @classmethod
    def load_path(cls, path: str | Path) -> "ClassMap":
        with open(path, encoding="utf-8") as fh:
            return cls.load(fh)

    @classmethod
    def default_ade20k(cls) -> "ClassMap":
        ref = resources.files("urban_affect_adapters").joinpath("data/ade20k_classmap.csv")
        with ref.open("r", encoding="utf-8") as fh:
            return cls.load(fh)

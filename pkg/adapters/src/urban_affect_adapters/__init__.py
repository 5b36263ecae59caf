"""Exporters that turn segmentation and scoring model outputs into the
urban-affect perception ingestion format (JSON lines).

The adapters know nothing about the primary toolkit's internals; they only
write its documented file schema, so any model wrapper that can produce a
per-pixel label map or a per-image score plugs in here.
"""

__version__ = "0.1.0"

#: The 17 urban-element classes of a perception segment vector, in the
#: exact order the ingestion schema requires.
ELEMENTS = (
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

#: Pseudo-element that counts toward total pixels but no proportion.
OTHER = "other"

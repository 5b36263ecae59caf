"""Urban affective-reaction mapping toolkit.

Quantifies how people feel about urban places from two channels —
street-view *perception* scores and geotagged social-media *opinion*
posts — and turns them into per-epoch score maps, trend maps, a
perception/opinion mismatch map, zone-conditioned cubic regressions,
and word-frequency reports.
"""

__version__ = "0.1.0"

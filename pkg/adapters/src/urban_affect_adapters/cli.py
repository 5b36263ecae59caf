"""Command line for the exporters.

Segmenters and scorers are selected by reference: ``stub-palette:FILE``
loads the color-palette stub, ``stub-bin:K`` / ``stub-value:V`` fix the
classifier output, and anything containing ``module:function`` loads that
callable as the model wrapper.
"""

from __future__ import annotations

import argparse
import sys
from typing import Optional, Sequence

from .classmap import ClassMap, ClassMapError
from .export import export_scores, export_segments, load_geotags, load_scores, merge_scores
from .models import PaletteSegmenter, StubBinScorer, StubContinuousScorer, load_callable


def _resolve_segmenter(spec: str):
    if spec.startswith("stub-palette:"):
        return PaletteSegmenter.load(spec.split(":", 1)[1])
    return load_callable(spec)


def _resolve_scorer(spec: str):
    if spec.startswith("stub-bin:"):
        return StubBinScorer(int(spec.split(":", 1)[1]))
    if spec.startswith("stub-value:"):
        return StubContinuousScorer(float(spec.split(":", 1)[1]))
    return load_callable(spec)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="urban-affect-adapters",
        description="Export model outputs as urban-affect perception files.",
    )
    subs = parser.add_subparsers(dest="command", required=True)

    seg = subs.add_parser("export-segments", help="per-image element proportions")
    seg.add_argument("--images", required=True, help="image directory")
    seg.add_argument("--geotags", required=True, help="CSV image_id,lon,lat,epoch")
    seg.add_argument("--class-map", default=None, help="CSV model_label,element (default: bundled ADE20K map)")
    seg.add_argument("--segmenter", required=True, help="stub-palette:FILE or module:function")
    seg.add_argument("--out", required=True)
    seg.add_argument("--suffix", default=".png")

    sco = subs.add_parser("export-scores", help="per-image 0-10 scores")
    sco.add_argument("--images", required=True)
    sco.add_argument("--segments", required=True, help="segment JSONL whose ids to score")
    sco.add_argument("--scorer", required=True, help="stub-bin:K, stub-value:V or module:function")
    sco.add_argument("--out", required=True)
    sco.add_argument("--suffix", default=".png")

    mrg = subs.add_parser("merge", help="join scores onto segment rows")
    mrg.add_argument("--segments", required=True)
    mrg.add_argument("--scores", required=True)
    mrg.add_argument("--out", required=True)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "export-segments":
            class_map = (
                ClassMap.load_path(args.class_map)
                if args.class_map
                else ClassMap.default_ade20k()
            )
            with open(args.geotags, encoding="utf-8") as fh:
                geotags = load_geotags(fh)
            with open(args.out, "w", encoding="utf-8") as out:
                n = export_segments(
                    args.images, geotags, class_map, _resolve_segmenter(args.segmenter),
                    out, suffix=args.suffix,
                )
            print(f"wrote {n} segment rows to {args.out}")
        elif args.command == "export-scores":
            import json

            with open(args.segments, encoding="utf-8") as fh:
                ids = [json.loads(line)["id"] for line in fh if line.strip()]
            with open(args.out, "w", encoding="utf-8") as out:
                n = export_scores(
                    args.images, ids, _resolve_scorer(args.scorer), out, suffix=args.suffix
                )
            print(f"wrote {n} scores to {args.out}")
        else:
            with open(args.segments, encoding="utf-8") as fh:
                segment_lines = fh.readlines()
            with open(args.scores, encoding="utf-8") as fh:
                scores = load_scores(fh)
            with open(args.out, "w", encoding="utf-8") as out:
                n = merge_scores(segment_lines, scores, out)
            print(f"wrote {n} perception rows to {args.out}")
        return 0
    except (ClassMapError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

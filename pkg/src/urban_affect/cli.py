"""Pipeline orchestration and the ``urban-affect`` command line.

One JSON config drives everything; flags override config values and the
``URBAN_AFFECT_OUTDIR`` environment variable overrides the output
directory only. Identical inputs and config produce byte-identical output
directories regardless of the worker count, and every run writes a
manifest listing a SHA-256 digest for each input and output file.
"""

from __future__ import annotations

import argparse
import dataclasses
import hashlib
import io
import json
import os
import sys
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Optional, Sequence

from . import __version__, affectmap, ingest, regress, render, synth, textsent
from .geo import STUDY_BBOX, BoundingBox, make_grid

ENV_OUTDIR = "URBAN_AFFECT_OUTDIR"


class PipelineError(Exception):
    """Fatal error attributed to one named pipeline stage."""

    def __init__(self, stage: str, message: str) -> None:
        super().__init__(f"error in stage '{stage}': {message}")
        self.stage = stage


@dataclass(frozen=True)
class PipelineConfig:
    """All pipeline settings; defaults reproduce the out-of-box study setup."""

    perception_path: str
    opinion_path: str
    zoning_path: str
    lexicon_path: str
    pos_corpus_path: str
    neg_corpus_path: str
    stopwords_path: Optional[str] = None
    bbox: BoundingBox = STUDY_BBOX
    cell_size: float = 0.001
    early: int = 2016
    late: int = 2022
    smoothing_method: str = "none"
    smoothing_power: float = 2.0
    smoothing_radius: int = 1
    r_square_min: float = 0.3
    sig_max: float = 0.01
    wordfreq_k: int = 50
    output_dir: str = "out"
    seed: int = 0
    workers: int = 1

    def __post_init__(self) -> None:
        if self.early == self.late:
            raise ValueError("epochs must be distinct")
        if not (0.0 < self.r_square_min < 1.0 and 0.0 < self.sig_max < 1.0):
            raise ValueError("regression thresholds must be in (0, 1)")
        if self.cell_size <= 0:
            raise ValueError("cell_size must be positive")
        if self.workers < 1:
            raise ValueError("workers must be at least 1")

    @property
    def epochs(self) -> tuple[int, int]:
        return (self.early, self.late)

    @classmethod
    def load(cls, path: str | Path) -> "PipelineConfig":
        """Read a config JSON; relative paths resolve against the file's dir."""
        path = Path(path)
        raw = json.loads(path.read_text(encoding="utf-8"))
        base = path.parent

        def resolve(p: Optional[str]) -> Optional[str]:
            if p is None:
                return None
            return str((base / p) if not Path(p).is_absolute() else Path(p))

        bbox_raw = raw.get("bbox")
        bbox = (
            BoundingBox(
                west=bbox_raw["west"],
                south=bbox_raw["south"],
                east=bbox_raw["east"],
                north=bbox_raw["north"],
            )
            if bbox_raw
            else STUDY_BBOX
        )
        epochs = raw.get("epochs", {})
        smoothing = raw.get("smoothing", {})
        regression = raw.get("regression", {})
        return cls(
            perception_path=resolve(raw["perception_path"]),
            opinion_path=resolve(raw["opinion_path"]),
            zoning_path=resolve(raw["zoning_path"]),
            lexicon_path=resolve(raw["lexicon_path"]),
            pos_corpus_path=resolve(raw["pos_corpus_path"]),
            neg_corpus_path=resolve(raw["neg_corpus_path"]),
            stopwords_path=resolve(raw.get("stopwords_path")),
            bbox=bbox,
            cell_size=raw.get("cell_size", 0.001),
            early=epochs.get("early", 2016),
            late=epochs.get("late", 2022),
            smoothing_method=smoothing.get("method", "none"),
            smoothing_power=smoothing.get("power", 2.0),
            smoothing_radius=smoothing.get("radius", 1),
            r_square_min=regression.get("r_square_min", 0.3),
            sig_max=regression.get("sig_max", 0.01),
            wordfreq_k=raw.get("wordfreq_k", 50),
            output_dir=resolve(raw.get("output_dir", "out")),
            seed=raw.get("seed", 0),
            workers=raw.get("workers", 1),
        )

    def canonical_dict(self) -> dict:
        """Config as stable JSON content for the manifest.

        The output directory and worker count are execution knobs that never
        change the artifacts, so they are excluded; runs into different
        directories or with different parallelism stay byte-identical.
        """
        d = dataclasses.asdict(self)
        d.pop("output_dir")
        d.pop("workers")
        d["bbox"] = dataclasses.asdict(self.bbox)
        return d


# --------------------------------------------------------------------------
# Pipeline stages


def _sha256(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


class _Workspace:
    """Collects output files and their digests for the run manifest."""

    def __init__(self, outdir: Path) -> None:
        self.outdir = outdir
        self.digests: dict[str, str] = {}

    def write_bytes(self, relpath: str, data: bytes) -> None:
        target = self.outdir / relpath
        target.parent.mkdir(parents=True, exist_ok=True)
        target.write_bytes(data)
        self.digests[relpath] = _sha256(data)

    def write_text(self, relpath: str, text: str) -> None:
        self.write_bytes(relpath, text.encode("utf-8"))

    def write_json(self, relpath: str, obj) -> None:
        self.write_text(relpath, json.dumps(obj, sort_keys=True, indent=2) + "\n")


def _read_lines(path: str, stage: str) -> list[str]:
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read().splitlines()
    except OSError as exc:
        raise PipelineError(stage, f"cannot read {path}: {exc.strerror}") from exc


def _load_inputs(config: PipelineConfig):
    perception, p_report = ingest.parse_perception(
        _read_lines(config.perception_path, "perception"), epochs=config.epochs
    )
    opinion, o_report = ingest.parse_opinion(
        _read_lines(config.opinion_path, "opinion"), epochs=config.epochs
    )
    try:
        with open(config.zoning_path, encoding="utf-8") as fh:
            zoning = ingest.parse_zoning(fh.read())
    except OSError as exc:
        raise PipelineError("zoning", f"cannot read {config.zoning_path}: {exc.strerror}") from exc
    except ValueError as exc:
        raise PipelineError("zoning", str(exc)) from exc
    return perception, p_report, opinion, o_report, zoning


def _load_text_assets(config: PipelineConfig):
    try:
        with open(config.lexicon_path, encoding="utf-8") as fh:
            lexicon = textsent.Lexicon.load(fh)
    except OSError as exc:
        raise PipelineError("lexicon", f"cannot read {config.lexicon_path}: {exc.strerror}") from exc
    except ValueError as exc:
        raise PipelineError("lexicon", str(exc)) from exc
    pos_docs = [l for l in _read_lines(config.pos_corpus_path, "corpus") if l.strip()]
    neg_docs = [l for l in _read_lines(config.neg_corpus_path, "corpus") if l.strip()]
    if config.stopwords_path is not None:
        stopwords = textsent.load_stopwords(
            io.StringIO("\n".join(_read_lines(config.stopwords_path, "stopwords")))
        )
    else:
        stopwords = textsent.DEFAULT_STOPWORDS
    try:
        model = textsent.train_sentiment(
            pos_docs, neg_docs, tokenizer=lambda t: textsent.tokenize(t, lexicon)
        )
    except ValueError as exc:
        raise PipelineError("train-sentiment", str(exc)) from exc
    return lexicon, stopwords, model


def _score_opinion(records, model):
    """Fill missing opinion scores from the classifier (0-10 scale)."""
    out = []
    for rec in records:
        if rec.score is None:
            out.append(replace(rec, score=textsent.opinion_score(model, rec.text)))
        else:
            out.append(rec)
    return out


def _csv_text(write_fn, *args) -> str:
    buf = io.StringIO()
    write_fn(*args, buf)
    return buf.getvalue()


def run(config: PipelineConfig) -> dict:
    """Execute the full pipeline; returns the manifest dictionary."""
    outdir = Path(config.output_dir)
    ws = _Workspace(outdir)

    perception, p_report, opinion, o_report, zoning = _load_inputs(config)
    lexicon, stopwords, model = _load_text_assets(config)
    opinion = _score_opinion(opinion, model)

    grid = make_grid(config.bbox, config.cell_size)
    channels = {affectmap.PERCEPTION: perception, affectmap.OPINION: opinion}

    rasters = {}
    for channel, records in channels.items():
        for epoch in config.epochs:
            raster = affectmap.aggregate_cells(
                grid, records, channel, epoch, workers=config.workers
            )
            raster = affectmap.smooth(
                raster,
                method=config.smoothing_method,
                power=config.smoothing_power,
                radius=config.smoothing_radius,
            )
            rasters[(channel, epoch)] = raster
            stem = f"rasters/score_{channel}_{epoch}"
            ws.write_text(f"{stem}.csv", _csv_text(affectmap.write_raster_csv, raster))
            ws.write_json(f"{stem}.json", affectmap.raster_sidecar(raster))
            ws.write_bytes(f"{stem}.ppm", render.render_raster(raster, render.SCORE_RAMP))

    trends = {}
    for channel in channels:
        tr = affectmap.trend(rasters[(channel, config.late)], rasters[(channel, config.early)])
        trends[channel] = tr
        stem = f"rasters/trend_{channel}"
        ws.write_text(f"{stem}.csv", _csv_text(affectmap.write_raster_csv, tr))
        ws.write_json(f"{stem}.json", affectmap.raster_sidecar(tr))
        ws.write_bytes(f"{stem}.ppm", render.render_raster(tr, render.TREND_RAMP))

    mism = affectmap.mismatch(trends[affectmap.PERCEPTION], trends[affectmap.OPINION])
    ws.write_text("rasters/mismatch.csv", _csv_text(affectmap.write_raster_csv, mism))
    ws.write_json("rasters/mismatch.json", affectmap.raster_sidecar(mism))
    ws.write_bytes("rasters/mismatch.ppm", render.render_raster(mism, render.MISMATCH_RAMP))

    report = regress.run_zone_element_regressions(
        perception,
        zoning,
        config.epochs,
        r_square_min=config.r_square_min,
        sig_max=config.sig_max,
        workers=config.workers,
    )
    ws.write_text("regressions.csv", _csv_text(regress.write_regression_csv, report))

    for epoch in config.epochs:
        docs = [r.text for r in opinion if r.epoch == epoch]
        freq = textsent.word_frequency(docs, lexicon, stopwords, k=config.wordfreq_k)
        ws.write_text(
            f"wordfreq_{epoch}.csv", _csv_text(textsent.write_word_frequency_csv, freq)
        )

    ws.write_json(
        "ingest_report.json",
        {
            "perception": p_report.to_dict(),
            "opinion": o_report.to_dict(),
            "perception_stats": ingest.dataset_stats(perception, grid).to_dict(),
            "opinion_stats": ingest.dataset_stats(opinion, grid).to_dict(),
        },
    )

    input_digests = {}
    for label, path in (
        ("perception", config.perception_path),
        ("opinion", config.opinion_path),
        ("zoning", config.zoning_path),
        ("lexicon", config.lexicon_path),
        ("pos_corpus", config.pos_corpus_path),
        ("neg_corpus", config.neg_corpus_path),
        ("stopwords", config.stopwords_path),
    ):
        if path is not None:
            input_digests[label] = _sha256(Path(path).read_bytes())

    manifest = {
        "version": __version__,
        "config": config.canonical_dict(),
        "inputs": input_digests,
        "outputs": dict(sorted(ws.digests.items())),
    }
    ws.write_json("manifest.json", manifest)
    return manifest


# --------------------------------------------------------------------------
# Subcommands


def _cmd_run(config: PipelineConfig, args) -> int:
    manifest = run(config)
    print(f"wrote {len(manifest['outputs'])} files to {config.output_dir}")
    return 0


def _cmd_synth(args) -> int:
    if args.scenario == "standard":
        spec = synth.standard_scenario(seed=args.seed)
    elif args.scenario == "zero-divergence":
        spec = synth.zero_divergence_scenario(seed=args.seed)
    else:
        raise PipelineError("synth", f"unknown scenario {args.scenario!r}")
    result = synth.generate_scenario(spec)
    synth.write_scenario(result, args.out)
    print(
        f"wrote scenario '{args.scenario}' ({len(result.perception)} perception, "
        f"{len(result.opinion)} opinion records) to {args.out}"
    )
    return 0


def _cmd_ingest_stats(config: PipelineConfig, args) -> int:
    perception, p_report, opinion, o_report, _zoning = _load_inputs(config)
    grid = make_grid(config.bbox, config.cell_size)
    payload = {
        "perception": p_report.to_dict(),
        "opinion": o_report.to_dict(),
        "perception_stats": ingest.dataset_stats(perception, grid).to_dict(),
        "opinion_stats": ingest.dataset_stats(opinion, grid).to_dict(),
    }
    print(json.dumps(payload, sort_keys=True, indent=2))
    return 0


def _cmd_score_text(config: PipelineConfig, args) -> int:
    _lexicon, _stopwords, model = _load_text_assets(config)
    if args.text is not None:
        texts = [args.text]
    else:
        texts = [l for l in sys.stdin.read().splitlines() if l.strip()]
    for text in texts:
        print(f"{textsent.opinion_score(model, text)!r}\t{text}")
    return 0


def _build_rasters(config: PipelineConfig):
    perception, _p, opinion, _o, zoning = _load_inputs(config)
    _lexicon, _stopwords, model = _load_text_assets(config)
    opinion = _score_opinion(opinion, model)
    grid = make_grid(config.bbox, config.cell_size)
    rasters = {}
    for channel, records in (
        (affectmap.PERCEPTION, perception),
        (affectmap.OPINION, opinion),
    ):
        for epoch in config.epochs:
            raster = affectmap.aggregate_cells(grid, records, channel, epoch, workers=config.workers)
            rasters[(channel, epoch)] = affectmap.smooth(
                raster,
                method=config.smoothing_method,
                power=config.smoothing_power,
                radius=config.smoothing_radius,
            )
    return perception, opinion, zoning, grid, rasters


def _write_one_raster(raster, ramp, stem: str, outdir: Path) -> None:
    outdir.mkdir(parents=True, exist_ok=True)
    (outdir / f"{stem}.csv").write_text(
        _csv_text(affectmap.write_raster_csv, raster), encoding="utf-8"
    )
    (outdir / f"{stem}.json").write_text(
        json.dumps(affectmap.raster_sidecar(raster), sort_keys=True, indent=2) + "\n",
        encoding="utf-8",
    )
    (outdir / f"{stem}.ppm").write_bytes(render.render_raster(raster, ramp))


def _cmd_aggregate(config: PipelineConfig, args) -> int:
    _p, _o, _z, _grid, rasters = _build_rasters(config)
    outdir = Path(config.output_dir)
    for (channel, epoch), raster in sorted(rasters.items()):
        if args.channel and channel != args.channel:
            continue
        _write_one_raster(raster, render.SCORE_RAMP, f"score_{channel}_{epoch}", outdir)
    print(f"wrote score rasters to {outdir}")
    return 0


def _cmd_trend(config: PipelineConfig, args) -> int:
    _p, _o, _z, _grid, rasters = _build_rasters(config)
    outdir = Path(config.output_dir)
    for channel in (affectmap.PERCEPTION, affectmap.OPINION):
        if args.channel and channel != args.channel:
            continue
        tr = affectmap.trend(rasters[(channel, config.late)], rasters[(channel, config.early)])
        _write_one_raster(tr, render.TREND_RAMP, f"trend_{channel}", outdir)
    print(f"wrote trend rasters to {outdir}")
    return 0


def _cmd_mismatch(config: PipelineConfig, args) -> int:
    _p, _o, _z, _grid, rasters = _build_rasters(config)
    tp = affectmap.trend(
        rasters[(affectmap.PERCEPTION, config.late)], rasters[(affectmap.PERCEPTION, config.early)]
    )
    to = affectmap.trend(
        rasters[(affectmap.OPINION, config.late)], rasters[(affectmap.OPINION, config.early)]
    )
    mism = affectmap.mismatch(tp, to)
    _write_one_raster(mism, render.MISMATCH_RAMP, "mismatch", Path(config.output_dir))
    print(f"wrote mismatch raster to {config.output_dir}")
    return 0


def _cmd_regress(config: PipelineConfig, args) -> int:
    perception, _p, _opinion, _o, zoning = _load_inputs(config)
    report = regress.run_zone_element_regressions(
        perception,
        zoning,
        config.epochs,
        r_square_min=config.r_square_min,
        sig_max=config.sig_max,
        workers=config.workers,
    )
    outdir = Path(config.output_dir)
    outdir.mkdir(parents=True, exist_ok=True)
    (outdir / "regressions.csv").write_text(
        _csv_text(regress.write_regression_csv, report), encoding="utf-8"
    )
    flagged = [r for r in report.rows if r.reported]
    for row in flagged:
        print(
            f"{row.epoch} {row.zone}: {row.element}  R2={row.fit.r_square:.3f} "
            f"F={row.fit.f_stat:.3f} Sig={regress.sig_display(row.fit.sig)}"
        )
    print(f"{len(report.rows)} fits, {len(flagged)} reported; wrote {outdir / 'regressions.csv'}")
    return 0


def _cmd_wordfreq(config: PipelineConfig, args) -> int:
    _perception, _p, opinion, _o, _zoning = _load_inputs(config)
    lexicon, stopwords, _model = _load_text_assets(config)
    outdir = Path(config.output_dir)
    outdir.mkdir(parents=True, exist_ok=True)
    epochs = [args.epoch] if args.epoch is not None else list(config.epochs)
    for epoch in epochs:
        docs = [r.text for r in opinion if r.epoch == epoch]
        freq = textsent.word_frequency(docs, lexicon, stopwords, k=config.wordfreq_k)
        (outdir / f"wordfreq_{epoch}.csv").write_text(
            _csv_text(textsent.write_word_frequency_csv, freq), encoding="utf-8"
        )
    print(f"wrote word-frequency reports to {outdir}")
    return 0


def _cmd_render(config: PipelineConfig, args) -> int:
    _p, _o, _z, _grid, rasters = _build_rasters(config)
    outdir = Path(config.output_dir)
    outdir.mkdir(parents=True, exist_ok=True)
    for (channel, epoch), raster in sorted(rasters.items()):
        data = render.render_raster(raster, render.SCORE_RAMP, scale=args.scale)
        (outdir / f"score_{channel}_{epoch}.ppm").write_bytes(data)
    print(f"wrote raster images to {outdir}")
    return 0


# --------------------------------------------------------------------------
# Argument parsing


def _add_config_arg(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--config", required=True, help="path to the pipeline config JSON")
    sub.add_argument("--output-dir", default=None, help="override the configured output dir")
    sub.add_argument("--workers", type=int, default=None, help="override the worker count")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="urban-affect",
        description="Map urban affective reactions from perception and opinion data.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    subs = parser.add_subparsers(dest="command", required=True)

    for name, help_text in (
        ("run", "execute the full pipeline"),
        ("ingest-stats", "parse inputs and print dataset statistics"),
        ("aggregate", "write per-epoch score rasters"),
        ("trend", "write trend rasters"),
        ("mismatch", "write the mismatch raster"),
        ("regress", "run the zone/element regression sweep"),
        ("wordfreq", "write word-frequency reports"),
        ("render", "render score rasters to PPM images"),
        ("score-text", "score text with the configured sentiment model"),
    ):
        sub = subs.add_parser(name, help=help_text)
        _add_config_arg(sub)
        if name in ("aggregate", "trend"):
            sub.add_argument("--channel", choices=["perception", "opinion"], default=None)
        if name == "wordfreq":
            sub.add_argument("--epoch", type=int, default=None)
        if name == "render":
            sub.add_argument("--scale", type=int, default=1)
        if name == "score-text":
            sub.add_argument("--text", default=None, help="text to score (default: stdin lines)")

    sub = subs.add_parser("synth", help="generate a synthetic scenario dataset")
    sub.add_argument("--out", required=True, help="directory for the scenario files")
    sub.add_argument("--seed", type=int, default=20160)
    sub.add_argument(
        "--scenario", choices=["standard", "zero-divergence"], default="standard"
    )

    return parser


_COMMANDS = {
    "run": _cmd_run,
    "ingest-stats": _cmd_ingest_stats,
    "aggregate": _cmd_aggregate,
    "trend": _cmd_trend,
    "mismatch": _cmd_mismatch,
    "regress": _cmd_regress,
    "wordfreq": _cmd_wordfreq,
    "render": _cmd_render,
    "score-text": _cmd_score_text,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "synth":
            return _cmd_synth(args)
        config = PipelineConfig.load(args.config)
        if args.output_dir is not None:
            config = replace(config, output_dir=args.output_dir)
        if os.environ.get(ENV_OUTDIR):
            config = replace(config, output_dir=os.environ[ENV_OUTDIR])
        if args.workers is not None:
            config = replace(config, workers=args.workers)
        return _COMMANDS[args.command](config, args)
    except PipelineError as exc:
        print(str(exc), file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"error in stage 'config': {exc}", file=sys.stderr)
        return 2
    except (ValueError, KeyError) as exc:
        print(f"error in stage 'config': {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

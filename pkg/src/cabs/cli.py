"""Command-line surface wiring ingestion, sampling, fusion, curation and
analytics together with reproducible run manifests.

Subcommands: sample, analyze, fuse-boxes, curate-metaclip, profile. Every
run writes exactly one `<out>.manifest.json` capturing the command line,
the resolved configuration and content digests of inputs and outputs.
Verbosity is controlled by the CABS_LOG environment variable.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from . import __version__
from .analytics import (
    batch_composition,
    composition_csv,
    concept_adherence,
    dataset_profile,
    multiplicity_csv,
    word_count_stats,
)
from .boxes import WbfConfig, format_fused, read_detection_sets, wbf
from .concepts import ConceptVocabulary, ingest_annotations
from .curation import CurationConfig, metaclip_curate
from .manifest import write_manifest
from .sampler import BatchWriter, SamplerConfig, read_batches, run_sampler
from .strategies import DmParams, make_strategy

log = logging.getLogger("cabs")

STRATEGIES = ("iid", "dm", "fm", "dm-alg2")


def _add_io_args(p: argparse.ArgumentParser, *, vocab: bool = True) -> None:
    p.add_argument("--data", required=True, help="annotation JSONL file")
    if vocab:
        p.add_argument("--vocab", required=True, help="vocabulary TSV file")
    p.add_argument("--out", required=True, help="output path")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cabs",
        description="Concept-aware batch sampling engine",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument(
        "--threads", type=int, default=1, help="upper bound on worker parallelism"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sample", help="select sub-batches from superbatches")
    _add_io_args(p)
    p.add_argument("--strategy", choices=STRATEGIES, default="dm")
    p.add_argument("--superbatch-size", type=int, default=20480)
    p.add_argument("--filter-ratio", type=float, default=0.8)
    p.add_argument("--epochs", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--shuffle-buffer", type=int, default=0)
    p.add_argument("--max-concept-frequency", type=int, default=40)
    p.add_argument("--min-samples-concept", type=int, default=1)
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("analyze", help="composition and caption reports")
    p.add_argument("--what", choices=("batch", "dataset", "adherence", "words"), required=True)
    _add_io_args(p)
    p.add_argument("--indices", help="batch-index file (for --what batch)")
    p.add_argument("--caption-field", choices=("caption", "recaption"), default="caption")
    p.add_argument("--taus", default="0.6,0.7,0.8", help="comma-separated thresholds")
    p.add_argument("--csv", help="also write a histogram CSV here")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("fuse-boxes", help="ensemble multi-source detections")
    p.add_argument("--detections", required=True, help="detections JSONL file")
    p.add_argument("--out", required=True)
    p.add_argument("--iou-threshold", type=float, default=0.29)
    p.add_argument("--post-threshold", type=float, default=0.5)
    p.add_argument("--mode", choices=("clip", "linear"), default="clip")
    p.add_argument("--n-sources", type=int, default=4)
    p.set_defaults(func=cmd_fuse)

    p = sub.add_parser("curate-metaclip", help="offline balanced subset baseline")
    _add_io_args(p)
    p.add_argument("--threshold", type=int, required=True, help="per-concept sample cap")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--report", help="write the before/after count report here")
    p.set_defaults(func=cmd_curate)

    p = sub.add_parser("profile", help="dataset-wide concept statistics")
    _add_io_args(p)
    p.add_argument("--csv", help="also write the multiplicity histogram CSV here")
    p.set_defaults(func=cmd_profile)

    return parser


def _stream_factory(data: str, vocab: ConceptVocabulary):
    return lambda: ingest_annotations(data, vocab)


def cmd_sample(args: argparse.Namespace, argv: list[str]) -> list[Path]:
    vocab = ConceptVocabulary.load(args.vocab)
    config = SamplerConfig(
        superbatch_size=args.superbatch_size,
        filter_ratio=args.filter_ratio,
        seed=args.seed,
        epochs=args.epochs,
        shuffle_buffer=args.shuffle_buffer,
    )
    params = DmParams(
        max_concept_frequency=args.max_concept_frequency,
        min_samples_concept=args.min_samples_concept,
    )
    strategy = make_strategy(args.strategy, params)
    with BatchWriter(args.out, config) as sink:
        summary = run_sampler(_stream_factory(args.data, vocab), config, strategy, sink)
    log.info(
        "sampled %d batches (%d samples) in %.2fs",
        summary.superbatches,
        summary.samples_selected,
        summary.wall_time_s,
    )
    manifest = write_manifest(
        args.out,
        command_line=argv,
        config={
            "strategy": args.strategy,
            "superbatch_size": config.superbatch_size,
            "filter_ratio": config.filter_ratio,
            "sub_batch_size": config.sub_batch_size,
            "epochs": config.epochs,
            "seed": config.seed,
            "shuffle_buffer": config.shuffle_buffer,
            "max_concept_frequency": params.max_concept_frequency,
            "min_samples_concept": params.min_samples_concept,
        },
        inputs=[args.data, args.vocab],
        outputs=[args.out],
        tool_version=__version__,
        summary={
            "superbatches": summary.superbatches,
            "samples_selected": summary.samples_selected,
            "samples_seen": summary.samples_seen,
            "samples_per_epoch": summary.samples_per_epoch,
        },
    )
    return [Path(args.out), manifest]


def _collect_batch_samples(indices_path: str, data: str, vocab: ConceptVocabulary):
    meta, batches = read_batches(indices_path)
    needed = {i for b in batches for i in b.indices}
    by_ordinal = {}
    for ordinal, sample in enumerate(ingest_annotations(data, vocab)):
        if ordinal in needed:
            by_ordinal[ordinal] = sample
    missing = needed - by_ordinal.keys()
    if missing:
        raise SystemExit(f"batch file references ordinals absent from {data}: {sorted(missing)[:5]} ...")
    return meta, batches, by_ordinal


def cmd_analyze(args: argparse.Namespace, argv: list[str]) -> list[Path]:
    vocab = ConceptVocabulary.load(args.vocab)
    inputs = [args.data, args.vocab]
    csv_text = None
    if args.what == "batch":
        if not args.indices:
            raise SystemExit("analyze --what batch requires --indices")
        inputs.append(args.indices)
        meta, batches, by_ordinal = _collect_batch_samples(args.indices, args.data, vocab)
        per_batch = []
        all_samples = []
        for b in batches:
            samples = [by_ordinal[i] for i in b.indices]
            all_samples.extend(samples)
            comp = batch_composition(samples)
            per_batch.append(
                {"epoch": b.epoch, "batch_seq": b.batch_seq, "size": len(samples), **comp.to_json()}
            )
        aggregate = batch_composition(all_samples)
        report = {
            "what": "batch",
            "header": meta,
            "strategy": batches[0].strategy if batches else None,
            "batches": per_batch,
            "aggregate": aggregate.to_json(),
        }
        csv_text = composition_csv(aggregate, vocab)
    elif args.what == "dataset":
        profile = dataset_profile(ingest_annotations(args.data, vocab))
        report = {"what": "dataset", **profile.to_json()}
        csv_text = multiplicity_csv(profile)
    elif args.what == "adherence":
        taus = [float(t) for t in args.taus.split(",") if t]
        result = concept_adherence(
            ingest_annotations(args.data, vocab), vocab, args.caption_field, taus
        )
        report = {"what": "adherence", "caption_field": args.caption_field, **result.to_json()}
    else:
        stats = word_count_stats(ingest_annotations(args.data, vocab), args.caption_field)
        report = {"what": "words", "caption_field": args.caption_field, **stats.to_json()}
        csv_text = "words,captions\n" + "".join(
            f"{k},{v}\n" for k, v in sorted(stats.histogram.items())
        )

    Path(args.out).write_text(json.dumps(report, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    outputs = [args.out]
    if args.csv:
        if csv_text is None:
            raise SystemExit(f"--csv is not available for --what {args.what}")
        Path(args.csv).write_text(csv_text, encoding="utf-8")
        outputs.append(args.csv)
    manifest = write_manifest(
        args.out,
        command_line=argv,
        config={
            "what": args.what,
            "caption_field": args.caption_field,
            "taus": args.taus,
            "indices": args.indices,
        },
        inputs=inputs,
        outputs=outputs,
        tool_version=__version__,
    )
    return [Path(p) for p in outputs] + [manifest]


def cmd_fuse(args: argparse.Namespace, argv: list[str]) -> list[Path]:
    config = WbfConfig(
        iou_threshold=args.iou_threshold,
        post_threshold=args.post_threshold,
        rescale_mode=args.mode,
        n_sources=args.n_sources,
    )

    def fuse_line(line: str) -> str:
        image_id, sets = read_detection_sets(line)
        return format_fused(image_id, wbf(sets, config))

    with open(args.detections, encoding="utf-8") as fh:
        lines = [line for line in fh if line.strip()]
    if args.threads > 1:
        with ThreadPoolExecutor(max_workers=args.threads) as pool:
            fused_lines = list(pool.map(fuse_line, lines))
    else:
        fused_lines = [fuse_line(line) for line in lines]
    with open(args.out, "w", encoding="utf-8") as out:
        for line in fused_lines:
            out.write(line + "\n")
    manifest = write_manifest(
        args.out,
        command_line=argv,
        config={
            "iou_threshold": config.iou_threshold,
            "post_threshold": config.post_threshold,
            "rescale_mode": config.rescale_mode,
            "n_sources": config.n_sources,
        },
        inputs=[args.detections],
        outputs=[args.out],
        tool_version=__version__,
    )
    return [Path(args.out), manifest]


def cmd_curate(args: argparse.Namespace, argv: list[str]) -> list[Path]:
    vocab = ConceptVocabulary.load(args.vocab)
    config = CurationConfig(per_concept_threshold=args.threshold, seed=args.seed)
    kept, report = metaclip_curate(_stream_factory(args.data, vocab), config)
    Path(args.out).write_text("".join(i + "\n" for i in kept), encoding="utf-8")
    outputs = [args.out]
    if args.report:
        Path(args.report).write_text(
            json.dumps(report.to_json(), indent=2, sort_keys=True) + "\n", encoding="utf-8"
        )
        outputs.append(args.report)
    log.info("kept %d of %d samples", report.kept, report.seen)
    manifest = write_manifest(
        args.out,
        command_line=argv,
        config={"threshold": config.per_concept_threshold, "seed": config.seed},
        inputs=[args.data, args.vocab],
        outputs=outputs,
        tool_version=__version__,
        summary={"kept": report.kept, "seen": report.seen},
    )
    return [Path(p) for p in outputs] + [manifest]


def cmd_profile(args: argparse.Namespace, argv: list[str]) -> list[Path]:
    vocab = ConceptVocabulary.load(args.vocab)
    profile = dataset_profile(ingest_annotations(args.data, vocab))
    Path(args.out).write_text(
        json.dumps({"what": "dataset", **profile.to_json()}, indent=2, sort_keys=True) + "\n",
        encoding="utf-8",
    )
    outputs = [args.out]
    if args.csv:
        Path(args.csv).write_text(multiplicity_csv(profile), encoding="utf-8")
        outputs.append(args.csv)
    manifest = write_manifest(
        args.out,
        command_line=argv,
        config={},
        inputs=[args.data, args.vocab],
        outputs=outputs,
        tool_version=__version__,
        summary={"n_samples": profile.n_samples, "total_annotations": profile.total_annotations},
    )
    return [Path(p) for p in outputs] + [manifest]


def _configure_logging() -> None:
    level = os.environ.get("CABS_LOG", "warning").upper()
    logging.basicConfig(
        level=getattr(logging, level, logging.WARNING),
        format="%(levelname)s %(name)s: %(message)s",
    )


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    _configure_logging()
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.func(args, argv)
    except SystemExit:
        raise
    except FileNotFoundError as exc:
        print(f"cabs: missing input: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001 - single CLI error boundary
        print(f"cabs: error: {exc}", file=sys.stderr)
        log.debug("traceback", exc_info=True)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())

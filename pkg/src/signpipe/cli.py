"""Command-line entry point.

Subcommands: ``extract``, ``split``, ``validate``, ``stats``, ``score``.
Exit codes: 0 success, 1 total failure, 2 validation violation.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from . import datasets, metrics
from .config import ConfigError, PipelineConfig, load_config
from .pipeline import ACCEPT, ClipResult, extract_stream
from .slf import write_feature_file

SIDECAR_NAME = "sidecar.jsonl"


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="signpipe",
        description="Pose-stream preprocessing, dataset split tooling, and scoring.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    extract = sub.add_parser(
        "extract", help="turn keypoint stream files into .slf feature files"
    )
    extract.add_argument("inputs", nargs="+", help="keypoint stream files (JSONL)")
    extract.add_argument("--out", default=None, help="output directory")
    extract.add_argument(
        "--tolerance",
        type=float,
        default=None,
        help="multi-person frame fraction tolerated before rejecting a clip",
    )
    extract.add_argument(
        "--resolution", type=int, default=None, help="crop target resolution (px)"
    )
    extract.add_argument(
        "--no-decimate",
        action="store_true",
        default=None,
        help="keep every frame instead of every other frame",
    )
    extract.add_argument("--jobs", type=int, default=None, help="parallel workers")
    extract.add_argument("--config", default=None, help="JSON config file")

    split = sub.add_parser(
        "split", help="generate a split assignment from a manifest"
    )
    split.add_argument("manifest", help="manifest TSV")
    split.add_argument("--out", default="assignment.tsv", help="assignment TSV path")
    split.add_argument("--seed", type=int, default=0, help="PRNG seed")
    split.add_argument(
        "--unseen-signers", type=int, default=2, help="signers held out entirely"
    )
    split.add_argument(
        "--sentences-t1", type=int, default=100,
        help="sentences held out for Test1",
    )
    split.add_argument(
        "--sentences-t2", type=int, default=100,
        help="sentences held out for Test2",
    )

    validate = sub.add_parser(
        "validate", help="check an assignment against its manifest"
    )
    validate.add_argument("manifest", help="manifest TSV")
    validate.add_argument("assignment", help="assignment TSV")

    stats = sub.add_parser("stats", help="emit duration and token histograms")
    stats.add_argument("manifest", help="manifest TSV")
    stats.add_argument("--out", default=".", help="directory for the CSV files")
    stats.add_argument(
        "--duration-bin", type=float, default=1.0, help="duration bin width (s)"
    )
    stats.add_argument("--token-bin", type=int, default=1, help="token bin width")

    score = sub.add_parser("score", help="score hypothesis file against reference")
    score.add_argument("hypothesis", help="hypothesis text file, one segment per line")
    score.add_argument("reference", help="reference text file, one segment per line")
    score.add_argument(
        "--lowercase", action="store_true", help="lowercase before tokenizing"
    )
    score.add_argument("--csv", action="store_true", help="emit CSV instead of a table")

    return parser


def _extract_config(args: argparse.Namespace) -> PipelineConfig:
    overrides = {
        "multi_person_tolerance": args.tolerance,
        "target_resolution": args.resolution,
        "out_dir": args.out,
        "jobs": args.jobs,
    }
    if args.no_decimate:
        overrides["decimate"] = False
    return load_config(config_path=args.config, overrides=overrides)


def cmd_extract(args: argparse.Namespace) -> int:
    try:
        config = _extract_config(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1

    out_dir = Path(config.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    def work(path_text: str):
        path = Path(path_text)
        try:
            with open(path, encoding="utf-8") as source:
                return extract_stream(source, config, name=path.stem)
        except OSError as exc:
            return None, ClipResult(clip_id=path.stem, status="error", reason=str(exc))

    if config.jobs == 1:
        outcomes = [work(p) for p in args.inputs]
    else:
        with ThreadPoolExecutor(max_workers=config.jobs) as pool:
            outcomes = list(pool.map(work, args.inputs))

    accepted = 0
    # Feature files and the sidecar are written here, in input order, so a
    # parallel run is byte-identical to a serial one.
    with open(out_dir / SIDECAR_NAME, "w", encoding="utf-8") as sidecar:
        for input_path, (sequence, result) in zip(args.inputs, outcomes):
            if sequence is not None:
                written = write_feature_file(sequence, out_dir)
                result = dataclasses.replace(result, output_path=written.name)
                accepted += 1
            record = {"input": input_path, **result.sidecar_record()}
            sidecar.write(json.dumps(record, separators=(",", ":")) + "\n")
            status = result.status.upper()
            note = f" ({result.reason})" if result.reason else ""
            print(f"{status} {result.clip_id}{note}")

    print(f"{accepted}/{len(args.inputs)} clips extracted to {out_dir}")
    return 0 if accepted > 0 else 1


def cmd_split(args: argparse.Namespace) -> int:
    try:
        manifest = datasets.read_manifest(args.manifest)
    except (OSError, datasets.ManifestError) as exc:
        print(f"{args.manifest}: {exc}", file=sys.stderr)
        return 1
    config = datasets.SplitConfig(
        n_unseen_signers=args.unseen_signers,
        n_unseen_sentences_t1=args.sentences_t1,
        n_unseen_sentences_t2=args.sentences_t2,
        rng_seed=args.seed,
    )
    try:
        assignment = datasets.generate_splits(manifest, config)
    except datasets.InfeasibleConfig as exc:
        print(f"infeasible split config: {exc}", file=sys.stderr)
        return 1
    datasets.write_assignment(assignment, args.out)
    report = datasets.validate_splits(manifest, assignment)
    print(report.render(), end="")
    print(f"assignment written to {args.out}")
    return 0 if report.ok else 2


def cmd_validate(args: argparse.Namespace) -> int:
    try:
        manifest = datasets.read_manifest(args.manifest)
        assignment = datasets.read_assignment(args.assignment)
    except (OSError, datasets.ManifestError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    report = datasets.validate_splits(manifest, assignment)
    print(report.render(), end="")
    return 0 if report.ok else 2


def cmd_stats(args: argparse.Namespace) -> int:
    try:
        manifest = datasets.read_manifest(args.manifest)
        stats = datasets.dataset_stats(
            manifest, duration_bin_s=args.duration_bin, token_bin=args.token_bin
        )
    except (OSError, datasets.ManifestError, ValueError) as exc:
        print(f"{args.manifest}: {exc}", file=sys.stderr)
        return 1
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    duration_path = out_dir / "duration_hist.csv"
    token_path = out_dir / "token_hist.csv"
    duration_path.write_text(stats.duration.to_csv(), encoding="utf-8")
    token_path.write_text(stats.tokens.to_csv(), encoding="utf-8")
    print(f"wrote {duration_path} and {token_path}")
    return 0


def cmd_score(args: argparse.Namespace) -> int:
    try:
        report = metrics.score_files(
            args.hypothesis, args.reference, lowercase=args.lowercase
        )
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (metrics.EmptyCorpus, metrics.LineCountMismatch, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(report.render_csv() if args.csv else report.render_table(), end="")
    return 0


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    handlers = {
        "extract": cmd_extract,
        "split": cmd_split,
        "validate": cmd_validate,
        "stats": cmd_stats,
        "score": cmd_score,
    }
    return handlers[args.command](args)


if __name__ == "__main__":
    sys.exit(main())

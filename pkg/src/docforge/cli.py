"""Command-line entry point: ``docforge <subcommand>``."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import __version__
from .config import PipelineConfig, load_config, with_overrides
from .metrics import sample_size
from .pipeline import (
    KeyMismatchError,
    StageResult,
    run_build_dataset,
    run_evaluate,
    run_extract,
    run_filter_repos,
    run_generate,
)


def _common() -> argparse.ArgumentParser:
    # SUPPRESS lets the flags appear either before or after the subcommand.
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, default=argparse.SUPPRESS, help="INI config file")
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS)
    common.add_argument("--workers", type=int, default=argparse.SUPPRESS)
    common.add_argument("--output-dir", type=Path, default=argparse.SUPPRESS)
    common.add_argument("-v", "--verbose", action="store_true", default=argparse.SUPPRESS)
    return common


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = argparse.ArgumentParser(prog="docforge", parents=[common], description=__doc__)
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("filter-repos", parents=[common], help="apply repository criteria")
    p.add_argument("metadata", type=Path, help="metadata JSON Lines file")

    p = sub.add_parser("extract", parents=[common], help="extract documented functions")
    p.add_argument("--corpus", type=Path, help="corpus root (overrides config)")

    p = sub.add_parser("build-dataset", parents=[common], help="build Formatted/Exploded datasets")
    p.add_argument("functions", type=Path)
    p.add_argument("--train-fraction", type=float)

    p = sub.add_parser("generate", parents=[common], help="generate parameter docstrings")
    p.add_argument("functions", type=Path)
    p.add_argument("--corpus", type=Path, help="corpus root, needed for --rewrite")
    p.add_argument(
        "--rewrite",
        choices=("copy", "inplace"),
        help="also insert docstrings into sources (copy: under OUTPUT_DIR/rewritten)",
    )

    p = sub.add_parser("evaluate", parents=[common], help="score candidates against references")
    p.add_argument("candidates", type=Path)
    p.add_argument("references", type=Path)
    p.add_argument("--key", default="id", help="record key field (default: id)")

    p = sub.add_parser("sample-size", parents=[common], help="finite-population sample size")
    p.add_argument("population", type=int)
    p.add_argument("--confidence", type=float, default=0.95)
    p.add_argument("--margin", type=float, default=0.05)

    p = sub.add_parser("serve-stub", parents=[common], help="run the stub model server")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8765)
    return parser


def _resolve_config(args: argparse.Namespace) -> PipelineConfig:
    config = load_config(getattr(args, "config", None))
    return with_overrides(
        config,
        seed=getattr(args, "seed", None),
        workers=getattr(args, "workers", None),
        output_dir=getattr(args, "output_dir", None),
        corpus_root=getattr(args, "corpus", None),
        train_fraction=getattr(args, "train_fraction", None),
    )


def _report(result: StageResult) -> int:
    stream = sys.stdout if result.exit_code == 0 else sys.stderr
    print(result.summary, file=stream)
    return result.exit_code


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if getattr(args, "verbose", False) else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )

    if args.command == "sample-size":
        try:
            print(sample_size(args.population, args.confidence, args.margin))
        except ValueError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 2
        return 0

    try:
        config = _resolve_config(args)
        if args.command == "filter-repos":
            return _report(run_filter_repos(args.metadata, config))
        if args.command == "extract":
            return _report(run_extract(config))
        if args.command == "build-dataset":
            return _report(run_build_dataset(args.functions, config))
        if args.command == "generate":
            return _report(run_generate(args.functions, config, rewrite=args.rewrite))
        if args.command == "evaluate":
            return _report(run_evaluate(args.candidates, args.references, config, key=args.key))
        if args.command == "serve-stub":
            import uvicorn

            from .server import create_app

            uvicorn.run(create_app(), host=args.host, port=args.port)
            return 0
    except (KeyMismatchError, ValueError, FileNotFoundError, PermissionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    parser.error(f"unknown command {args.command}")
    return 2


if __name__ == "__main__":
    sys.exit(main())

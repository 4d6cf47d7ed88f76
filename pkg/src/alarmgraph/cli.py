"""Command-line entry point: ``alarmgraph <command> [options]``.

Exit codes: 0 success, 1 invalid configuration or arguments, 2 stage failure.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .config import load_config
from .errors import ConfigError
from .pipeline import STAGES, MissingInput, StageError, run_pipeline, run_stage

EXIT_OK, EXIT_VALIDATION, EXIT_STAGE = 0, 1, 2

log = logging.getLogger("alarmgraph")


def _common(p: argparse.ArgumentParser, needs_log: bool = False) -> None:
    p.add_argument("--config", type=Path, help="key = value configuration file")
    p.add_argument("--out", type=Path, required=True, help="artifact directory")
    p.add_argument("--seed", type=int, help="overrides the configured seed")
    p.add_argument("-v", "--verbose", action="store_true")
    if needs_log:
        p.add_argument("--log", type=Path, required=True, help="alarm log (delimited text with header)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="alarmgraph", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run the whole pipeline")
    _common(run, needs_log=True)
    run.add_argument(
        "--stages",
        default=",".join(STAGES),
        help=f"comma-separated subset of {','.join(STAGES)}",
    )
    _common(sub.add_parser("synth", help="write a synthetic alarm log with planted groups"))
    _common(sub.add_parser("preprocess", help="dechatter and segment a log"), needs_log=True)
    for name, text in [
        ("graph", "build the co-occurrence graph"),
        ("embed", "random walks + skip-gram embeddings"),
        ("cluster", "consensus clustering and dendrogram"),
        ("project", "PCA projection"),
        ("report", "render SVG figures"),
    ]:
        _common(sub.add_parser(name, help=text))
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_VALIDATION
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )

    try:
        if args.config is not None and not args.config.exists():
            raise ConfigError("--config", f"{args.config} does not exist")
        cfg = load_config(args.config).with_seed(args.seed)
        stages = STAGES
        if args.command == "run":
            stages = tuple(s.strip() for s in args.stages.split(",") if s.strip())
            unknown = [s for s in stages if s not in STAGES]
            if unknown:
                raise ConfigError("--stages", f"unknown stage(s): {', '.join(unknown)}")
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION

    try:
        if args.command == "run":
            result = run_pipeline(args.log, args.out, cfg, stages)
            for p in result.artifacts:
                print(p)
            print(result.manifest)
        else:
            args.out.mkdir(parents=True, exist_ok=True)
            kw = {"log_path": args.log} if args.command == "preprocess" else {}
            for p in run_stage(args.command, args.out, cfg, **kw):
                print(p)
    except (StageError, MissingInput) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_STAGE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())

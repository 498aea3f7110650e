"""Command-line interface.

Subcommands mirror the pipeline stages (`ingest`, `enrich`, `network`, `htt`,
`sep`, `portrait`, `cohort`, `export`) plus `run` for the whole workflow.
Exit codes: 0 success, 2 configuration error, 3 input error, 4 stage failure.
"""

from __future__ import annotations

import argparse
import logging
import sys

from .errors import ConfigurationError, InputFormatError, StageError
from .pipeline import PipelineConfig, run_cohort, run_pipeline

_COMMAND_STAGES = {
    "ingest": ["ingest", "dedup"],
    "enrich": ["enrich"],
    "network": ["network"],
    "htt": ["htt"],
    "sep": ["sep"],
    "portrait": ["portraits"],
    "export": ["export"],
    "run": None,  # all enabled stages
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bibliograph",
        description="Bibliometric analytics: corpus merging, co-occurrence "
        "networks, topic hierarchies, evolution tracing, and portraits.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in [*_COMMAND_STAGES, "cohort"]:
        cmd = sub.add_parser(name, help=f"run the {name} step")
        cmd.add_argument("--config", required=True, help="pipeline config (JSON)")
        cmd.add_argument("--seed", type=int, default=None)
        cmd.add_argument("--out-dir", default=None)
        cmd.add_argument("--drop-unmatched", action="store_true", default=None,
                         help="drop records the knowledge graph cannot match")
        cmd.add_argument("--include-abstract-tagging", action="store_true", default=None,
                         help="let principle tagging scan abstracts too")
        cmd.add_argument("-v", "--verbose", action="store_true")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    overrides = {
        "seed": args.seed,
        "out_dir": args.out_dir,
        "drop_unmatched": args.drop_unmatched,
        "include_abstract_tagging": args.include_abstract_tagging,
    }
    if args.command == "enrich":
        overrides["enrich"] = True
    try:
        config = PipelineConfig.load_json(args.config, overrides)
        if args.command == "cohort":
            paths = run_cohort(config)
        else:
            manifest = run_pipeline(config, only=_COMMAND_STAGES[args.command])
            paths = manifest.output_files()
        for path in paths:
            print(path)
        return 0
    except ConfigurationError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except (FileNotFoundError, IsADirectoryError, PermissionError, InputFormatError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 3
    except StageError as exc:
        print(f"stage failure: {exc}", file=sys.stderr)
        return 4


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()

"""Command-line interface.

Each subcommand runs a slice of the pipeline against one run config;
`run-all` chains every stage. `sample` covers both target sampling and
direct-identifier synthesis so one command produces complete profiles.
"""
from __future__ import annotations

import argparse
import logging
import sys

from .config import ConfigError, apply_overrides, load_run_config
from .pipeline import STAGES, PipelineError, PipelineRun

COMMAND_STAGES = {
    "sample": ("sample", "synth"),
    "generate": ("generate",),
    "anonymize": ("anonymize",),
    "attack": ("attack",),
    "score": ("score",),
    "report": ("report",),
    "run-all": STAGES,
}


def _int_list(text: str) -> list[int]:
    return [int(part) for part in text.split(",") if part.strip()]


def _str_list(text: str) -> list[str]:
    return [part.strip() for part in text.split(",") if part.strip()]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="reidbench",
        description="Generate a re-identification benchmark and score anonymization tools against it.",
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)
    for command, stages in COMMAND_STAGES.items():
        cmd = sub.add_parser(command, help=f"run stage(s): {', '.join(stages)}")
        cmd.add_argument("--config", required=True, help="run config YAML")
        cmd.add_argument("--seed", type=int, help="override the run seed")
        cmd.add_argument("--workers", type=int, help="parallel workers (default from config)")
        cmd.add_argument("--outdir", help="override the output directory")
        cmd.add_argument("--replay", help="replay bundle JSONL; swaps every client for canned responses")
        cmd.add_argument("--tools", type=_str_list, help="comma-separated tool ids to keep")
        cmd.add_argument("--levels", type=_int_list, help="comma-separated difficulty levels to keep")
        cmd.add_argument("--scenarios", type=_str_list, help="comma-separated scenarios to keep")
        cmd.add_argument("--languages", type=_str_list, help="comma-separated language codes to keep")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        config = load_run_config(args.config)
        config = apply_overrides(
            config,
            seed=args.seed,
            workers=args.workers,
            output_dir=args.outdir,
            replay_bundle=args.replay,
            tools=args.tools,
            levels=args.levels,
            scenarios=args.scenarios,
            languages=args.languages,
        )
        run = PipelineRun(config)
        run.run(COMMAND_STAGES[args.command])
    except (ConfigError, PipelineError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    if "report" in COMMAND_STAGES[args.command]:
        print(f"reports written to {config.output_dir / 'reports'}")
    return 0


if __name__ == "__main__":
    sys.exit(main())

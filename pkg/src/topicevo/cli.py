"""Command-line entry point: ``topicevo <subcommand> [--config FILE] [flags]``."""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import sys
import typing

from . import pipeline
from .config import ConfigError, RunConfig, make_config, read_config_file
from .pipeline import PipelineError, Timings

# short flag names used in place of the config key
ALIASES = {"out": ["--out", "-o"], "core_k": ["--core-k", "-k"]}

STAGE_COMMANDS = {
    "ingest": [pipeline.stage_ingest],
    "stats": [pipeline.stage_stats],
    "network": [pipeline.stage_network],
    "cluster": [pipeline.stage_cluster],
    "similarity": [pipeline.stage_similarity],
    "timeseries": [pipeline.stage_timeseries],
    "events": [pipeline.stage_events],
    "filter": [pipeline.stage_filter],
    "reduce": [pipeline.stage_reduce],
    "pmi": [pipeline.stage_pmi],
}


def _add_config_flags(parser):
    hints = typing.get_type_hints(RunConfig)
    for f in dataclasses.fields(RunConfig):
        if f.name == "extra":
            continue
        flags = ALIASES.get(f.name, ["--" + f.name.replace("_", "-")])
        tp = hints[f.name]
        if tp is bool:
            parser.add_argument(*flags, dest=f.name, action="store_const", const="true",
                                default=argparse.SUPPRESS, help=f"(default: {f.default})")
        else:
            parser.add_argument(*flags, dest=f.name, default=argparse.SUPPRESS,
                                metavar=f.name.upper(), help=f"(default: {f.default})")


def build_parser():
    parser = argparse.ArgumentParser(prog="topicevo", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in list(STAGE_COMMANDS) + ["pipeline"]:
        p = sub.add_parser(name)
        p.add_argument("--config", "-c")
        _add_config_flags(p)
    p = sub.add_parser("trace", help="list clusters containing each keyword, per snapshot")
    p.add_argument("keywords", nargs="+")
    p.add_argument("--out", "-o", default="out")
    p.add_argument("--write", action="store_true", help="also write out/trace.json")
    p = sub.add_parser("timings", help="summarise recorded stage timings")
    p.add_argument("--out", "-o", default="out")
    p.add_argument("--json", action="store_true")
    return parser


def _config_from_args(args):
    file_values = read_config_file(args.config) if args.config else {}
    overrides = {k: v for k, v in vars(args).items()
                 if k not in ("command", "config", "verbose")}
    return make_config(file_values, overrides)


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "trace":
            result = pipeline.trace_keywords(args.out, args.keywords)
            if args.write:
                from .io import write_json
                write_json(f"{args.out}/trace.json", result)
            print(json.dumps(result, indent=1, sort_keys=True))
            return 0
        if args.command == "timings":
            report = pipeline.report_timings(args.out)
            print(json.dumps(report, indent=1, sort_keys=True) if args.json
                  else pipeline.format_timings(report))
            return 0
        cfg = _config_from_args(args)
        if args.command == "pipeline":
            pipeline.run_pipeline(cfg)
            return 0
        timings = Timings(cfg.out, cfg)
        pipeline.write_run_meta(cfg)
        for stage in STAGE_COMMANDS[args.command]:
            stage(cfg, timings)
        timings.save()
        return 0
    except (ConfigError, PipelineError, ValueError, OSError) as exc:
        print(f"topicevo: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

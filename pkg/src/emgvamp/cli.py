"""Command-line interface: ``run``, ``oracle``, and ``version`` subcommands.

Exit codes: 0 on success, 2 when any cell of a run diverged, 1 on usage or
I/O errors.
"""

from __future__ import annotations

import argparse
import sys

from . import __version__
from .harness import (
    CONFIG_KEYS,
    ConfigError,
    any_diverged,
    config_from_mapping,
    emit_results,
    oracle_suite,
    parse_config_text,
    run_experiment,
    write_run_metadata,
)

_FULL_SCALE = (8192, 1024)


class _Parser(argparse.ArgumentParser):
    # usage errors exit 1, not argparse's default 2
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _build_parser():
    parser = _Parser(prog="emgvamp", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run an experiment and write the result table")
    run.add_argument("--config", help="flat key = value configuration file")
    run.add_argument(
        "--scale",
        type=float,
        help="dimension multiplier on the full-scale 8192x1024 study (0.25 = desk scale)",
    )
    run.add_argument("--em", choices=["on", "off"], help="enable or disable parameter learning")
    run.add_argument("--out", help="output path for the result table")
    run.add_argument("--format", choices=["csv", "json"], help="result table format")
    for key in CONFIG_KEYS:
        if key in ("em", "out", "format"):
            continue
        run.add_argument(f"--{key.replace('_', '-')}", dest=f"key_{key}", metavar="VALUE")

    sub.add_parser("oracle", help="run the small-instance oracle suite")
    sub.add_parser("version", help="print the package version")
    return parser


def _collect_run_values(args):
    values = {}
    if args.config:
        with open(args.config, "r", encoding="utf-8") as fh:
            values.update(parse_config_text(fh.read()))
    # flag overrides reuse the config-file value parsers
    from .harness import _KEY_TABLE

    for key in CONFIG_KEYS:
        raw = getattr(args, f"key_{key}", None)
        if raw is not None:
            parser_fn, _ = _KEY_TABLE[key]
            values[key] = parser_fn(raw)
    if args.scale is not None:
        if args.scale <= 0:
            raise ConfigError("--scale must be positive")
        values["m"] = max(int(round(_FULL_SCALE[0] * args.scale)), 1)
        values["n"] = max(int(round(_FULL_SCALE[1] * args.scale)), 1)
    if args.em is not None:
        values["em"] = args.em == "on"
    if args.out is not None:
        values["out"] = args.out
    if args.format is not None:
        values["format"] = args.format
    return values


def _cmd_run(args):
    try:
        cfg = config_from_mapping(_collect_run_values(args))
    except (ConfigError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    records = run_experiment(cfg)
    try:
        emit_results(records, cfg.out, cfg.format)
        write_run_metadata(cfg, cfg.out)
    except OSError as exc:
        print(f"error: cannot write {cfg.out!r}: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {cfg.out} ({len(records)} runs)")
    return 2 if any_diverged(records) else 0


def _cmd_oracle():
    results = oracle_suite()
    for name, ok in results:
        print(f"{'PASS' if ok else 'FAIL'}  {name}")
    return 0 if all(ok for _, ok in results) else 1


def main(argv=None):
    args = _build_parser().parse_args(argv)
    if args.command == "run":
        return _cmd_run(args)
    if args.command == "oracle":
        return _cmd_oracle()
    if args.command == "version":
        print(__version__)
        return 0
    return 1


if __name__ == "__main__":
    sys.exit(main())

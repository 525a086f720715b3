"""Command line: ``plotkit plot --in results.csv --out dir --format png|svg``."""

from __future__ import annotations

import argparse
import pathlib
import sys

from .figures import plot_trajectories
from .tables import SchemaError, load_table


def _build_parser():
    parser = argparse.ArgumentParser(prog="plotkit")
    sub = parser.add_subparsers(dest="command", required=True)
    plot = sub.add_parser("plot", help="render trajectory figures from a result table")
    plot.add_argument("--in", dest="table", required=True, help="result-table CSV")
    plot.add_argument("--out", dest="out_dir", required=True, help="output directory")
    plot.add_argument("--format", choices=["png", "svg"], default="png")
    return parser


def main(argv=None):
    args = _build_parser().parse_args(argv)
    try:
        table = load_table(args.table)
    except FileNotFoundError:
        print(f"error: no such file: {args.table}", file=sys.stderr)
        return 1
    except SchemaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    if not table.rows:
        print("warning: table has no data rows; nothing to plot", file=sys.stderr)
        return 0
    written = plot_trajectories(table, pathlib.Path(args.out_dir), args.format)
    for path in written:
        print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())

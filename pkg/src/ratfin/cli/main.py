"""``ratfin`` command line entry point.

    ratfin [EXPERIMENT] [--config FILE] [--seed N] [--out DIR] [--format csv|json]

Command-line flags override the config file.  Each run writes the main table
to ``<out>/<id>.<fmt>``, any secondary tables to ``<out>/<id>.<name>.<fmt>``
and a manifest ``<out>/<id>.manifest.ini`` that parses back to the config.

Exit status: 0 on success, 1 for domain or numerical errors, 2 for usage or
configuration errors.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import replace
from typing import List, Optional

from ratfin import __version__
from ratfin.errors import ConfigError, RatfinError
from ratfin.cli.config import EXPERIMENTS, SEEDED, ExperimentConfig, dump_config, parse_config
from ratfin.cli.experiments import RUNNERS, Table
from ratfin.cli.output import to_csv, to_json

EXIT_OK, EXIT_DOMAIN, EXIT_USAGE = 0, 1, 2


def _u64(text: str) -> int:
    try:
        v = int(text, 10)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}")
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError(f"seed out of the unsigned 64-bit range: {text}")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ratfin", description="Run a rational-finance experiment and write its tables.")
    p.add_argument("experiment", nargs="?", help=f"one of: {', '.join(EXPERIMENTS)}")
    p.add_argument("--config", help="experiment config file")
    p.add_argument("--seed", type=_u64, help="RNG seed (unsigned 64-bit)")
    p.add_argument("--out", help="output directory (default: current directory)")
    p.add_argument("--format", choices=("csv", "json"), help="table format")
    p.add_argument("--version", action="version", version=f"ratfin {__version__}")
    return p


def resolve_config(args: argparse.Namespace) -> ExperimentConfig:
    if args.experiment is not None and args.experiment not in EXPERIMENTS:
        raise _UsageError(f"unknown experiment {args.experiment!r} (expected one of {', '.join(EXPERIMENTS)})")
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise ConfigError(f"cannot read config file: {exc.strerror}", None) from None
    else:
        text = ""
    cfg = parse_config(text, args.experiment)
    changes = {}
    if args.seed is not None:
        changes["seed"] = args.seed
    if args.format is not None:
        changes["format"] = args.format
    if args.out is not None:
        changes["out"] = args.out
    return replace(cfg, **changes) if changes else cfg


class _UsageError(Exception):
    pass


def _file_name(cfg: ExperimentConfig, table: Table, first: bool) -> str:
    stem = cfg.id if first else f"{cfg.id}.{table.name}"
    return f"{stem}.{cfg.format}"


def write_outputs(cfg: ExperimentConfig, tables: List[Table]) -> List[str]:
    """Write tables and the manifest; return the written paths."""
    out = cfg.out or "."
    os.makedirs(out, exist_ok=True)
    written = []
    names = []
    for i, table in enumerate(tables):
        name = _file_name(cfg, table, i == 0)
        if cfg.format == "csv":
            body = to_csv(table.columns, table.rows)
        else:
            body = to_json(table.columns, table.rows, table.single)
        path = os.path.join(out, name)
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(body)
        written.append(path)
        names.append(name)
    extra = {"library_version": __version__, "seed": str(cfg.seed), "outputs": ", ".join(names)}
    if cfg.id not in SEEDED:
        extra["seed_used"] = "no"
    # the output location is left out so that reruns elsewhere give identical manifests
    manifest = dump_config(replace(cfg, out=None), extra)
    path = os.path.join(out, f"{cfg.id}.manifest.ini")
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(manifest)
    written.append(path)
    return written


def run(cfg: ExperimentConfig) -> List[str]:
    """Run one experiment and write its artifacts; errors propagate."""
    return write_outputs(cfg, RUNNERS[cfg.id](cfg))


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        cfg = resolve_config(args)
    except _UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"ratfin: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ConfigError as exc:
        where = f" ({args.config})" if args.config else ""
        print(f"ratfin: config error{where}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        for path in run(cfg):
            print(path)
    except ConfigError as exc:
        print(f"ratfin: config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except RatfinError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_DOMAIN
    except OSError as exc:
        print(f"ratfin: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())

"""Command-line entry point.

Exit codes: 0 success, 2 configuration error, 3 resource cap exceeded,
4 input/output failure.
"""

from __future__ import annotations

import argparse
import sys

from ..sampler import ResourceCapError
from .config import MODES, ConfigError, load_config
from .plots import plot_scan
from .records import emit, to_csv, to_jsonlines
from .runner import run

EXIT_OK, EXIT_CONFIG, EXIT_CAP, EXIT_IO = 0, 2, 3, 4


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"cylproc: config error: {message}", file=sys.stderr)
        sys.exit(EXIT_CONFIG)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="cylproc", description="Boolean cylinder process experiments.")
    p.add_argument("mode", choices=MODES)
    p.add_argument("--config", required=True, help="YAML configuration file")
    p.add_argument("--seed", type=int, help="master seed (overrides the file)")
    p.add_argument("--out", help="output path; stdout when omitted")
    p.add_argument("--workers", type=int, help="worker processes")
    p.add_argument("--format", choices=("csv", "jsonlines"), help="output format")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    overrides = {"mode": args.mode, "seed": args.seed, "out": args.out,
                 "workers": args.workers, "format": args.format}
    try:
        cfg = load_config(args.config, overrides)
    except ConfigError as exc:
        print(f"cylproc: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"cylproc: io error: {exc}", file=sys.stderr)
        return EXIT_IO
    try:
        records = run(cfg)
    except ResourceCapError as exc:
        print(f"cylproc: resource cap: {exc}", file=sys.stderr)
        return EXIT_CAP
    except ConfigError as exc:
        print(f"cylproc: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        if cfg.out:
            emit(records, cfg.format, cfg.out)
        else:
            sys.stdout.write(to_csv(records) if cfg.format == "csv" else to_jsonlines(records))
        if cfg.plot:
            kind = "clt-rate" if cfg.mode == "clt-scan" else "variance"
            plot_scan(records, kind, cfg.plot)
    except OSError as exc:
        print(f"cylproc: io error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"cylproc: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())

"""Command-line interface.

skewlab <gen|maxmargin|skews|normcurve|dynamics|verify|report>
        [--config FILE] [--seed N] [--out DIR] [--jobs N] ...

Most subcommands are config-driven (TOML, see README); maxmargin also
accepts direct flags for one-off solves.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import io_harness


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="skewlab",
        description="Spurious-correlation tasks, margin QPs, and dynamics",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for kind in io_harness.KINDS:
        sp = sub.add_parser(kind)
        sp.add_argument("--config", type=Path, default=None)
        sp.add_argument("--seed", type=int, default=None)
        sp.add_argument("--out", type=Path, default=None)
        sp.add_argument("--jobs", type=int, default=None)
        if kind == "maxmargin":
            sp.add_argument("--dataset", type=Path, default=None,
                            help="dataset CSV (with .meta sidecar)")
            sp.add_argument("--mask", choices=("inv", "full"), default=None)
            sp.add_argument("--targets", default=None,
                            help="'default' or 'balanced:<c>'")
            sp.add_argument("--subset", choices=("maj", "min", "all"), default=None)
        if kind == "verify":
            sp.add_argument("--all", action="store_true", dest="run_all")
            sp.add_argument("--only", default=None,
                            help="comma-separated criterion numbers")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)

    if args.command == "verify":
        from . import verification

        selection = None
        if args.only and not args.run_all:
            selection = [int(v) for v in args.only.split(",")]
        return verification.run(selection)

    if args.config is not None:
        cfg = io_harness.load_config(
            args.config, kind=args.command, out_dir=args.out,
            seed=args.seed, jobs=args.jobs,
        )
    else:
        sections: dict[str, dict] = {}
        if args.command == "maxmargin":
            section: dict = {}
            if args.dataset is not None:
                sections["dataset"] = {"path": str(args.dataset)}
            if args.mask is not None:
                section["mask"] = args.mask
            if args.targets is not None:
                section["targets"] = args.targets
            if args.subset is not None:
                section["subset"] = args.subset
            sections["maxmargin"] = section
        cfg = io_harness.ExperimentConfig(
            kind=args.command,
            out_dir=args.out if args.out is not None else Path("out"),
            jobs=args.jobs if args.jobs is not None else 1,
            seed=args.seed if args.seed is not None else 0,
            sections=sections,
        )
    return io_harness.run_experiment(cfg)


if __name__ == "__main__":
    sys.exit(main())

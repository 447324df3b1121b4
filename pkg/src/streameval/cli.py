"""Command line entry point.

Exit status: 0 on success, 2 for configuration errors, 1 for runtime errors.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys

from . import measures as M
from .config import ConfigError, load_config

OUT_ENV = "STREAMEVAL_OUT"


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="streameval",
                                description="Evaluate online learners on data streams.")
    sub = p.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run an experiment config")
    run.add_argument("config")
    run.add_argument("--out", help=f"output directory (overrides ${OUT_ENV} and the config)")
    run.add_argument("--seed", type=int, help="root seed (overrides the config)")
    run.add_argument("--workers", type=int, default=1, help="parallel k-fold workers")
    val = sub.add_parser("validate", help="check a config without running it")
    val.add_argument("config")
    sub.add_parser("list-measures", help="print the available measure ids")
    return p


def _load(path, seed=None):
    try:
        cfg = load_config(path)
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from None
    if seed is not None:
        cfg = cfg.model_copy(update={"seed": seed})
    return cfg


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(message)s")
    if args.command == "list-measures":
        for info in M.MEASURES.values():
            print(f"{info.id}\t{info.scope}\t{info.direction}\t{info.description}")
        return 0
    try:
        cfg = _load(args.config, getattr(args, "seed", None))
        if args.command == "validate":
            print("ok")
            return 0
        from .runner import run_experiment

        out = args.out or os.environ.get(OUT_ENV) or cfg.output
        bundle = run_experiment(cfg, out_dir=out, workers=args.workers)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 - reported as a runtime failure
        print(f"error: {exc}", file=sys.stderr)
        return 1
    for name, summary in bundle.summary.items():
        shown = {k: v for k, v in summary.items() if not isinstance(v, list)}
        print(name, shown)
    print(f"results written to {bundle.out_dir}")
    return 0


if __name__ == "__main__":
    sys.exit(main())

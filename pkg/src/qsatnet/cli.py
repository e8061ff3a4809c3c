"""Command-line entry point: ``qsatnet run --config sweep.toml --out results/``."""
from __future__ import annotations

import argparse
import logging
import sys

from .harness.config import ConfigError, load_config
from .harness.export import EMIT_CHOICES, export_bundle
from .harness.runner import ScenarioError, run_sweep
from .harness.sweep import enumerate_sweep, filter_scenarios

log = logging.getLogger("qsatnet")

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 1, 2


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="qsatnet", description="Satellite entanglement-distribution sweeps.")
    sub = p.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run a configured sweep and export the results")
    run.add_argument("--config", required=True, help="TOML scenario file")
    run.add_argument("--out", default=None, help="output directory (default: [output].dir)")
    run.add_argument("--workers", type=int, default=1, help="parallel scenario workers")
    run.add_argument("--scenario-filter", default=None,
                     help="glob on scenario ids or field=value[,field=value]")
    run.add_argument("--emit", choices=EMIT_CHOICES, default="all")
    run.add_argument("--format", choices=("csv", "json"), default="csv")
    run.add_argument("-v", "--verbose", action="store_true")
    return p


def cmd_run(args) -> int:
    try:
        cfg = load_config(args.config)
        scenarios = filter_scenarios(enumerate_sweep(cfg), args.scenario_filter)
    except (ConfigError, FileNotFoundError) as exc:
        log.error("configuration error: %s", exc)
        return EXIT_CONFIG
    except ValueError as exc:  # bad filter expression
        log.error("configuration error: %s", exc)
        return EXIT_CONFIG
    if args.workers < 1:
        log.error("configuration error: --workers must be >= 1")
        return EXIT_CONFIG
    out = args.out or cfg.output.dir
    log.info("running %d scenario(s) with %d worker(s)", len(scenarios), args.workers)
    try:
        bundle = run_sweep(cfg, scenarios, workers=args.workers,
                           keep_graphs=args.emit in ("edges", "all"))
        written = export_bundle(bundle, out, emit=args.emit, fmt=args.format)
    except ScenarioError as exc:
        log.error("%s", exc)
        return EXIT_RUNTIME
    except (OSError, ValueError, MemoryError) as exc:
        log.error("run failed: %s", exc)
        return EXIT_RUNTIME
    log.info("wrote %d file(s) to %s", len(written), out)
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    if args.command == "run":
        return cmd_run(args)
    return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())

"""Command-line entry point.

Subcommands:
  simulate  run the configured grid and write results.csv, report.md,
            config_echo.yaml and manifest.json into the output directory
  validate  parse and validate a config file, then stop
  render    re-emit the markdown report from a previously written CSV

The output directory defaults to $ATELAB_OUT_DIR, falling back to
./results.  Exit status is nonzero iff validation failed or a cell aborted.
"""

from __future__ import annotations

import argparse
import datetime
import logging
import os
import sys
from pathlib import Path

from ._version import __version__
from .config import SCENARIO_IDS, config_echo, emit_config, load_config, parse_config
from .errors import ConfigError, SimulationError
from .harness import run_grid
from .report import build_manifest, emit_csv, emit_manifest, emit_markdown, load_csv

log = logging.getLogger("atelab")

EXIT_OK = 0
EXIT_ABORTED_CELLS = 1
EXIT_CONFIG = 2


def _default_out_dir() -> str:
    return os.environ.get("ATELAB_OUT_DIR", "results")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="atelab",
        description="Monte-Carlo grid for counterfactual-prediction "
                    "treatment-effect estimation on synthetic data")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run the grid and emit reports")
    sim.add_argument("--config", type=Path, default=None,
                     help="YAML config file (defaults apply if omitted)")
    sim.add_argument("--seed", type=int, default=None,
                     help="override master_seed")
    sim.add_argument("--replicates", type=int, default=None,
                     help="override n_replicates")
    sim.add_argument("--scenario", action="append", default=None,
                     metavar="ID", help=f"restrict to a scenario (repeatable); "
                     f"one of {', '.join(SCENARIO_IDS)}")
    sim.add_argument("--methods", default=None,
                     help="comma-separated subset of LM,Lasso,RF")
    sim.add_argument("--out-dir", type=Path, default=None,
                     help="output directory (default $ATELAB_OUT_DIR or ./results)")
    sim.add_argument("--allow-partial", action="store_true",
                     help="emit results even if some cells aborted")
    sim.add_argument("--workers", type=int, default=1,
                     help="parallel worker processes for independent cells")

    val = sub.add_parser("validate", help="check a config file and exit")
    val.add_argument("--config", type=Path, required=True)

    ren = sub.add_parser("render", help="re-emit markdown from a results CSV")
    ren.add_argument("--csv", type=Path, required=True)
    ren.add_argument("--out", type=Path, default=None,
                     help="markdown path (default: report.md next to the CSV)")
    return parser


def _load_or_default(path):
    if path is None:
        return parse_config("")
    return load_config(path)


def _apply_overrides(configs, args):
    import dataclasses

    overrides = {}
    if args.seed is not None:
        overrides["master_seed"] = args.seed
    if args.replicates is not None:
        overrides["n_replicates"] = args.replicates
    if args.methods is not None:
        overrides["methods"] = tuple(
            m.strip() for m in args.methods.split(",") if m.strip())
    if overrides:
        configs = [dataclasses.replace(c, **overrides) for c in configs]
    if args.scenario:
        wanted = set(args.scenario)
        unknown = wanted - set(SCENARIO_IDS)
        if unknown:
            raise ConfigError(f"unknown scenario(s) {sorted(unknown)}")
        configs = [c for c in configs if c.scenario_id in wanted]
        if not configs:
            raise ConfigError("scenario filter removed every configured scenario")
    for c in configs:
        c.validate()
    return configs


def _utcnow() -> str:
    return datetime.datetime.now(datetime.timezone.utc).isoformat()


def cmd_simulate(args) -> int:
    configs = _apply_overrides(_load_or_default(args.config), args)
    out_dir = args.out_dir if args.out_dir is not None else Path(_default_out_dir())
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    n_cells = sum(len(c.ate_true_grid) * len(c.pi_grid) for c in configs)
    log.info("running %d scenario(s), %d cells, seed %d",
             len(configs), n_cells, configs[0].master_seed)
    started = _utcnow()

    def progress(done, total):
        log.info("cell %d/%d done", done, total)

    report = run_grid(configs, workers=args.workers, progress=progress)
    finished = _utcnow()

    csv_path = out_dir / "results.csv"
    md_path = out_dir / "report.md"
    echo_path = out_dir / "config_echo.yaml"
    manifest_path = out_dir / "manifest.json"

    echo = config_echo(configs)
    if report.complete or args.allow_partial:
        emit_csv(report, csv_path, allow_partial=args.allow_partial)
        emit_markdown(report, md_path, allow_partial=args.allow_partial)
        with open(echo_path, "w", encoding="utf-8") as fh:
            fh.write(emit_config(configs))
        outputs = [csv_path, md_path, echo_path]
        log.info("wrote %s, %s, %s", csv_path, md_path, echo_path)
    else:
        outputs = []
        log.error("grid incomplete; rerun with --allow-partial to emit anyway")
    manifest = build_manifest(report, echo, started, finished, outputs)
    emit_manifest(manifest, manifest_path)
    log.info("wrote %s", manifest_path)

    if not report.complete:
        aborted = [s.cell_index for s in report.statuses if s.status != "ok"]
        log.error("%d cell(s) aborted: %s", len(aborted), aborted)
        return EXIT_ABORTED_CELLS
    return EXIT_OK


def cmd_validate(args) -> int:
    configs = load_config(args.config)
    n_cells = sum(len(c.ate_true_grid) * len(c.pi_grid) for c in configs)
    print(f"ok: {len(configs)} scenario(s), {n_cells} cells, "
          f"{configs[0].n_replicates} replicates each, "
          f"seed {configs[0].master_seed}")
    return EXIT_OK


def cmd_render(args) -> int:
    report = load_csv(args.csv)
    out = args.out if args.out is not None else args.csv.parent / "report.md"
    emit_markdown(report, out)
    log.info("wrote %s", out)
    return EXIT_OK


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(message)s",
                        stream=sys.stderr)
    args = build_parser().parse_args(argv)
    handlers = {"simulate": cmd_simulate, "validate": cmd_validate,
                "render": cmd_render}
    try:
        return handlers[args.command](args)
    except ConfigError as exc:
        log.error("config error: %s", exc)
        return EXIT_CONFIG
    except SimulationError as exc:
        log.error("%s", exc)
        return EXIT_ABORTED_CELLS


if __name__ == "__main__":
    sys.exit(main())

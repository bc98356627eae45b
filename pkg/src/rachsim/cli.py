"""Command-line entry point: ``rachsim simulate`` and ``rachsim analyze``.

Precedence for simulation settings: built-in defaults, then the config file,
then command-line flags. The output directory defaults to ``$RACHSIM_OUT``
and falls back to the current directory.
"""
from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

from . import analyzer
from .assignment import AssignmentInfeasible
from .config import ConfigError, load_config_file, sweep_from_mapping
from .prach import ConfigurationError
from .sweep import events_csv, run_sweep, runs_csv, summarize

log = logging.getLogger("rachsim")

EXIT_CONFIG = 2
EXIT_INFEASIBLE = 3
EXIT_INGEST = 4
EXIT_IO = 5


def _out_dir(arg):
    path = Path(arg or os.environ.get("RACHSIM_OUT") or ".")
    path.mkdir(parents=True, exist_ok=True)
    return path


def _write(path: Path, text: str):
    path.write_text(text, encoding="utf-8", newline="")
    log.info("wrote %s", path)


def cmd_simulate(args) -> int:
    try:
        values = load_config_file(args.config) if args.config else {}
    except OSError as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ConfigError as exc:
        print(f"error: invalid config: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if args.scheme:
        values["schemes"] = ",".join(args.scheme)
    if args.cells:
        values["n_cells"] = args.cells
    if args.ues:
        values["ue_counts"] = args.ues
    if args.seed is not None:
        values["seed"] = str(args.seed)
    if args.reps is not None:
        values["repetitions"] = str(args.reps)
    try:
        spec = sweep_from_mapping(values)
    except ConfigError as exc:
        print(f"error: invalid config: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    try:
        rows, results = run_sweep(spec, jobs=args.jobs, keep_results=args.events)
    except AssignmentInfeasible as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (ConfigurationError, ValueError) as exc:
        print(f"error: invalid config: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    try:
        out = _out_dir(args.out)
        _write(out / "runs.csv", runs_csv(rows))
        _write(out / "summary.csv", summarize(rows, spec.schemes))
        if args.events:
            _write(out / "events.csv", events_csv(results))
    except OSError as exc:
        print(f"error: cannot write output: {exc}", file=sys.stderr)
        return EXIT_IO
    return 0


def cmd_analyze(args) -> int:
    try:
        records = analyzer.load_records(args.input)
    except analyzer.IngestError as exc:
        print(f"error: ingest failed at {exc}", file=sys.stderr)
        return EXIT_INGEST
    except OSError as exc:
        print(f"error: cannot read input: {exc}", file=sys.stderr)
        return EXIT_INGEST

    by = args.group_by
    formats, excluded = analyzer.format_table(records, by)
    for r in excluded:
        print(f"warning: reserved PRACH-ConfigIndex {r.prach_config_index} "
              f"(location {r.location_id}, cell {r.cell_id}) excluded from format usage",
              file=sys.stderr)
    try:
        out = _out_dir(args.out)
        _write(out / "insight1_histogram.csv", analyzer.histogram_table(records, by))
        _write(out / "insight2_formats.csv", formats)
        _write(out / "insight3_unique_ies.csv", analyzer.unique_ie_table(records, by))
    except OSError as exc:
        print(f"error: cannot write output: {exc}", file=sys.stderr)
        return EXIT_IO
    return 0


def cmd_synth(args) -> int:
    from .synthetic import generate_records

    analyzer.write_records(generate_records(args.locations, args.seed), args.output)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rachsim", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run a scenario sweep")
    sim.add_argument("--config", help="key = value scenario file")
    sim.add_argument("--scheme", action="append",
                     help="same|same:<index>|different|coloring|file:<path>; repeatable")
    sim.add_argument("--cells", help="cell count(s), comma-separated")
    sim.add_argument("--ues", help="UE counts, comma-separated")
    sim.add_argument("--seed", type=int)
    sim.add_argument("--reps", type=int)
    sim.add_argument("--out")
    sim.add_argument("--events", action="store_true", help="also write events.csv")
    sim.add_argument("--jobs", type=int, default=1, help="worker processes")
    sim.set_defaults(func=cmd_simulate)

    ana = sub.add_parser("analyze", help="dataset insights from SIB2 records")
    ana.add_argument("--input", required=True)
    ana.add_argument("--group-by", choices=("country", "mno"))
    ana.add_argument("--out")
    ana.set_defaults(func=cmd_analyze)

    syn = sub.add_parser("synth-records", help="write a synthetic record file")
    syn.add_argument("--output", required=True)
    syn.add_argument("--locations", type=int, default=40)
    syn.add_argument("--seed", type=int, default=0)
    syn.set_defaults(func=cmd_synth)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())

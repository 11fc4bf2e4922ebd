"""Command-line interface.

Subcommands:
  run <config.json | preset-name>   execute a scenario
  list-presets                      print available figure presets
  compare <dir_a> <dir_b> --metric  compare two run directories
  dump-config <preset>              print a preset's normalized JSON

Exit codes: 0 success, 2 configuration/validation failure, 3 numerical
failure.
"""

import argparse
import json
import os
import sys

from .errors import BohmwaveError, ParseError, ValidationError
from .scenarios import (
    compare_runs,
    dump_scenario,
    list_presets,
    parse_scenario,
    preset_scenario,
    run_scenario,
)

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_NUMERICAL = 3


def build_parser():
    parser = argparse.ArgumentParser(
        prog="bohmwave",
        description="Trajectory-based simulation of colliding Gaussian wave packets",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute a scenario config or preset")
    p_run.add_argument("scenario", help="path to a JSON config, or a preset name")
    p_run.add_argument("--out-dir", default=None, help="output directory")
    p_run.add_argument("--threads", type=int, default=1)
    p_run.add_argument("--no-plots", action="store_true")
    p_run.add_argument(
        "--tolerance-profile", choices=("fast", "strict"), default="fast"
    )

    sub.add_parser("list-presets", help="list known figure presets")

    p_cmp = sub.add_parser("compare", help="compare two run directories")
    p_cmp.add_argument("dir_a")
    p_cmp.add_argument("dir_b")
    p_cmp.add_argument(
        "--metric", choices=("density_L2", "trajectory_RMS"), required=True
    )

    p_dump = sub.add_parser("dump-config", help="print a preset's normalized JSON")
    p_dump.add_argument("preset")
    return parser


def _load_scenario(name_or_path):
    if os.path.isfile(name_or_path):
        with open(name_or_path) as handle:
            return parse_scenario(handle.read())
    return preset_scenario(name_or_path)


def _cmd_run(args):
    scenario = _load_scenario(args.scenario)
    out_dir = args.out_dir or os.path.join("out", scenario.name)
    result = run_scenario(
        scenario,
        out_dir=out_dir,
        plots=not args.no_plots,
        threads=args.threads,
        tolerance_profile=args.tolerance_profile,
    )
    print(f"wrote {out_dir}")
    summary = {
        k: result.analysis[k]
        for k in ("mode", "regime", "non_crossing", "transfer", "norm_drift")
        if k in result.analysis
    }
    print(json.dumps(summary, indent=1, sort_keys=True))
    return EXIT_OK


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "list-presets":
            for name in list_presets():
                print(name)
            return EXIT_OK
        if args.command == "compare":
            report = compare_runs(args.dir_a, args.dir_b, args.metric)
            print(json.dumps(report, indent=1, sort_keys=True))
            return EXIT_OK
        if args.command == "dump-config":
            sys.stdout.write(dump_scenario(preset_scenario(args.preset)))
            return EXIT_OK
        return EXIT_VALIDATION
    except (ParseError, ValidationError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (BohmwaveError, FloatingPointError, ArithmeticError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())

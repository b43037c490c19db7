"""Command line entry point.

::

    broadfocus simulate --config scenario.json --out results/
    broadfocus preset --name fig4 --out results/fig4 --trials 100 --jobs 4

Exit codes: 0 on success, 2 on a configuration error, 3 on a numerical failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys

import numpy as np

from .errors import ConfigError, ConvergenceFailure, UnknownPreset
from .harness.output import write_outputs
from .harness.presets import PRESETS, preset
from .harness.runner import run_scenario
from .harness.scenario import METHODS, load_scenario

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3

log = logging.getLogger("broadfocus")


def _methods(text):
    methods = tuple(m.strip() for m in text.split(",") if m.strip())
    bad = [m for m in methods if m not in METHODS]
    if bad or not methods:
        raise argparse.ArgumentTypeError(f"methods must be a comma-separated subset of {','.join(METHODS)}")
    return methods


def _positive_int(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="broadfocus",
                                     description="Broadband sparse-array focusing Monte Carlo simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", default=None, help="output directory for CSV files")
    common.add_argument("--trials", type=_positive_int, help="override the trial count")
    common.add_argument("--seed", type=int, help="override the master seed")
    common.add_argument("--methods", type=_methods, help="comma-separated subset of ap,scr,iss,nb")
    common.add_argument("--jobs", type=_positive_int, default=1, help="worker processes")
    common.add_argument("--plots", action="store_true", help="also write SVG figures (needs matplotlib)")
    common.add_argument("--print-config", action="store_true",
                        help="print the resolved scenario as JSON and exit")
    common.add_argument("-v", "--verbose", action="store_true")

    sim = sub.add_parser("simulate", parents=[common], help="run a scenario from a JSON config")
    sim.add_argument("--config", required=True, help="scenario JSON file")

    pre = sub.add_parser("preset", parents=[common], help="run a built-in scenario")
    pre.add_argument("--name", required=True, help=f"one of {', '.join(PRESETS)}")
    return parser


def _run(args) -> int:
    scenario = load_scenario(args.config) if args.command == "simulate" else preset(args.name)
    scenario = scenario.with_overrides(trials=args.trials, seed=args.seed, methods=args.methods)
    if args.print_config:
        print(json.dumps(scenario.to_config(), indent=2))
        return EXIT_OK
    out = args.out or f"results/{scenario.name}"

    def progress(n, total):
        if n == total or n % max(1, total // 20) == 0:
            log.info("%d/%d trials", n, total)

    with np.errstate(over="raise", invalid="ignore", divide="ignore"):
        result = run_scenario(scenario, jobs=args.jobs, progress=progress)
    paths = write_outputs(result, out)
    if args.plots:
        from .harness.plotting import plot_outputs
        paths += plot_outputs(out, scenario.sweep_axis.replace("_", " "))
    for p in paths:
        print(p)
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return _run(args)
    except (ConfigError, UnknownPreset) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except FileNotFoundError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ConvergenceFailure, np.linalg.LinAlgError, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())

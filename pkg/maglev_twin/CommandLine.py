# Copyright (c) 2026 maglev_twin contributors
#
# SPDX-License-Identifier: MIT

# -*- coding: utf-8 -*-

"""
Command line front end. Subcommands map onto the entry points of
:mod:`maglev_twin.ScenarioRunner`; exceptions map onto exit codes:

    0  success
    2  configuration error
    3  stage aborted
    4  numerical failure
"""

import argparse
import json
import logging
import sys
from typing import List, Optional, Sequence

from maglev_twin import __version__
from maglev_twin.ScenarioRunner import PLOT_TAGS, emit_plotdata, feasibility_analyses, run_scenario, sweep
from maglev_twin.model.Scenario import Scenario
from maglev_twin.util.Exceptions import ConfigurationError, NumericalInstabilityError, StageAbortedError

EXIT_OK = 0
EXIT_CONFIGURATION = 2
EXIT_STAGE_ABORTED = 3
EXIT_NUMERICAL = 4

logger = logging.getLogger(__name__)


def _split_values(text: str) -> List[str]:
    return [item.strip() for item in text.split(";" if ";" in text else ",") if item.strip()]


def build_parser() -> argparse.ArgumentParser:
    """
    :rtype: argparse.ArgumentParser
    """
    parser = argparse.ArgumentParser(prog="maglev-twin",
                                     description="Digital twin of a levitated superconducting microsphere")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--log-level", default="INFO", choices=("DEBUG", "INFO", "WARNING", "ERROR"),
                        help="root logger level (default: INFO)")
    commands = parser.add_subparsers(dest="command", required=True)

    run = commands.add_parser("run", help="run the stages of a scenario")
    run.add_argument("scenario", help="scenario file")
    run.add_argument("--output-dir", help="run directory, overrides [scenario] output_dir")

    sweep_parser = commands.add_parser("sweep", help="run a scenario once per parameter value")
    sweep_parser.add_argument("scenario", help="scenario file")
    sweep_parser.add_argument("--param", required=True, help="dotted key, e.g. interferometric_feedback.gamma_fb")
    sweep_parser.add_argument("--values", default="",
                              help="comma-separated values with optional units; separate list values with ';'")
    sweep_parser.add_argument("--output-dir", help="parent directory of the sweep")

    plotdata = commands.add_parser("plotdata", help="write the data behind a figure")
    plotdata.add_argument("manifest", help="manifest.json of a run or sweep_summary.json of a sweep")
    plotdata.add_argument("--fig", required=True, help=f"figure tag, one of {', '.join(PLOT_TAGS)}")
    plotdata.add_argument("--output-dir", help="target directory, next to the manifest by default")

    feasibility = commands.add_parser("feasibility", help="print the ground-state and thermal budgets")
    feasibility.add_argument("scenario", help="scenario file")
    return parser


def _feasibility(scenario_path: str) -> int:
    analyses, messages = feasibility_analyses(Scenario.from_file(scenario_path))
    print(json.dumps(analyses, indent=4))
    for message in messages:
        print(f"skipped: {message}")
    return EXIT_OK


def main(argv: Optional[Sequence[str]] = None) -> int:
    """
    Parses the arguments, runs the subcommand and returns the exit code.

    :param argv: arguments without the program name, ``sys.argv[1:]`` when omitted
    :type argv: Sequence[str] or None
    :rtype: int
    """
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=getattr(logging, args.log_level),
                        format="%(asctime)s %(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "run":
            manifest = run_scenario(args.scenario, args.output_dir)
            for outcome in manifest.get_stages():
                print(f"{outcome.stage}: {outcome.status}, amplitude {outcome.initial_amplitude} m -> "
                      f"{outcome.final_amplitude} m")
        elif args.command == "sweep":
            manifests = sweep(args.scenario, args.param, _split_values(args.values), args.output_dir)
            aborted = sum(manifest.get_status() == "aborted" for manifest in manifests)
            print(f"{len(manifests)} runs, {aborted} aborted")
            if aborted:
                return EXIT_STAGE_ABORTED
        elif args.command == "plotdata":
            for file_path in emit_plotdata(args.manifest, args.fig, args.output_dir):
                print(file_path)
        else:
            return _feasibility(args.scenario)
    except ConfigurationError as error:
        logger.error("%s", error)
        return EXIT_CONFIGURATION
    except StageAbortedError as error:
        logger.error("Stage aborted: %s", error)
        return EXIT_STAGE_ABORTED
    except NumericalInstabilityError as error:
        logger.error("Numerical failure: %s", error)
        return EXIT_NUMERICAL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())

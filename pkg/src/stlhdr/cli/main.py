"""Command-line entry point: ``stlhdr <command> --scenario <path|id> ...``."""
from __future__ import annotations

import argparse
import logging
import sys
from typing import List, Optional

from stlhdr.core.config import settings
from stlhdr.geometry.ellipse import DomainInvariantError
from stlhdr.geometry.reach_avoid import EnumerationCapError
from stlhdr.sampling.hdr import EstimationError
from stlhdr.system.control import LinearizationError, RiccatiConvergenceError

from . import commands

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_ESTIMATION = 1
EXIT_CONFIG = 2

_ESTIMATION_ERRORS = (
    EstimationError,
    DomainInvariantError,
    EnumerationCapError,
    LinearizationError,
    RiccatiConvergenceError,
)


def _common(parser: argparse.ArgumentParser, threads: bool = True) -> None:
    parser.add_argument("--scenario", required=True, help="Scenario JSON path or bundled scenario id")
    parser.add_argument("--seed", type=int, default=None, help="Overrides the scenario seed")
    if threads:
        parser.add_argument("--threads", type=int, default=None, help="Parallel chains / outer iterations")
    parser.add_argument("--out", default=None, help="Output directory (result.json and CSV series)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog=settings.APP_NAME,
        description="Probability that a linear stochastic closed loop satisfies an STL specification.",
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="Debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    verify = sub.add_parser("verify", help="Estimate the probability of the scenario formula")
    _common(verify)
    verify.add_argument("--negate", action="store_true", help="Estimate the probability of the negated formula")
    verify.add_argument("--export-samples", action="store_true", help="Write final-nesting trajectories")

    verify_ra = sub.add_parser("verify-ra", help="Estimate the failure probability of a reach-avoid task")
    _common(verify_ra)
    verify_ra.add_argument("--export-samples", action="store_true", help="Write final-nesting trajectories")

    mc = sub.add_parser("mc", help="Monte-Carlo baseline by closed-loop simulation")
    _common(mc, threads=False)
    mc.add_argument("--negate", action="store_true")
    mc.add_argument("--n-mc", type=int, default=None, help="Number of simulations")

    sample = sub.add_parser(
        "sample", help="Draw trajectories from the satisfying or violating set (mixture noise: given one mode draw)"
    )
    _common(sample)
    sample.add_argument("--count", type=int, required=True)
    sample.add_argument("--side", choices=["satisfy", "violate"], default="satisfy")

    fit = sub.add_parser("fit", help="Fit a trajectory Gaussian to recorded runs")
    fit.add_argument("--trajectories", required=True, help="CSV with x<t>_<i> columns, one run per row")
    fit.add_argument("--out", required=True, help="Output .json file or directory")
    fit.add_argument("--ridge", type=float, default=1e-9)

    compare = sub.add_parser("compare", help="Repeated HDR and Monte-Carlo runs")
    _common(compare)
    compare.add_argument("--runs", type=int, default=100)
    compare.add_argument("--negate", action="store_true")
    compare.add_argument("--bins", type=int, default=20)

    sub.add_parser("list", help="List bundled scenarios")
    return parser


def configure_logging(verbose: bool = False) -> None:
    level = logging.DEBUG if verbose else getattr(logging, settings.LOG_LEVEL.upper(), logging.INFO)
    logging.basicConfig(
        level=level,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )


def _dispatch(args: argparse.Namespace) -> None:
    if args.command == "list":
        for scenario_id, description in commands.cmd_list():
            print(f"{scenario_id:<24} {description}")
        return
    if args.command == "fit":
        print(commands.cmd_fit(args.trajectories, args.out, ridge=args.ridge))
        return
    if args.command == "verify":
        document = commands.cmd_verify(
            args.scenario, args.seed, args.threads, args.negate, args.out, args.export_samples
        )
    elif args.command == "verify-ra":
        document = commands.cmd_verify_ra(args.scenario, args.seed, args.threads, args.out, args.export_samples)
    elif args.command == "mc":
        document = commands.cmd_mc(args.scenario, args.seed, args.n_mc, args.negate, args.out)
    elif args.command == "sample":
        document = commands.cmd_sample(args.scenario, args.count, args.side, args.seed, args.threads, args.out)
    else:
        document = commands.cmd_compare(
            args.scenario, args.runs, args.seed, args.threads, args.negate, args.out, args.bins
        )
    print(document.model_dump_json(indent=2))


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    configure_logging(args.verbose)
    try:
        _dispatch(args)
    except _ESTIMATION_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ESTIMATION
    except (ValueError, KeyError, OSError) as exc:
        message = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"error: {message}", file=sys.stderr)
        return EXIT_CONFIG
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())

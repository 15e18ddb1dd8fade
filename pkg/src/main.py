# main.py
import argparse
import logging
import os
import sys

sys.path.append(".")

from dotenv import load_dotenv
load_dotenv()

from pydantic import ValidationError
from rich.console import Console
from rich.logging import RichHandler

from src.commands import (
    cmd_adi, cmd_analyze, cmd_estimate, cmd_optimize, cmd_reproduce,
    cmd_simulate, cmd_subscribe, cmd_sweep, simulation_config,
)
from src.demand import DomainError
from src.orderlog import OrderLogError
from src.report import emit
from src.scenario import ScenarioError, apply_overrides, load_scenario
from src.sweep import MODES, SweepSpec

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_DOMAIN = 3


# defaults from .env (fallbacks so the CLI still runs if unset)
SEED      = int(os.environ.get("SUBPLAN_SEED", "20240607"))
RUNS      = int(os.environ.get("SUBPLAN_RUNS", "10000"))
PERIODS   = int(os.environ.get("SUBPLAN_PERIODS", "48"))
WORKERS   = int(os.environ.get("SUBPLAN_WORKERS", "1"))
OUT_DIR   = os.environ.get("SUBPLAN_OUT_DIR", "out")
LOG_LEVELS = ["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"]
LOG_LEVEL = os.environ.get("SUBPLAN_LOG_LEVEL", "INFO").strip().upper()
if LOG_LEVEL not in LOG_LEVELS:
    LOG_LEVEL = "INFO"

DEFAULTS = {"seed": SEED, "runs": RUNS, "periods": PERIODS, "workers": WORKERS, "q_rounding": "nearest"}


def _configure_logging(level: str) -> None:
    logging.basicConfig(
        level=level,
        format="%(message)s",
        datefmt="[%X]",
        handlers=[RichHandler(console=Console(stderr=True), show_path=False)],
        force=True,
    )


def _common() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--scenario", help="key=value scenario file")
    common.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                        help="override a scenario key (repeatable)")
    common.add_argument("--csv", action="store_true", help="machine-readable CSV on stdout")
    common.add_argument("--seed", type=int, help="master seed (unsigned 64-bit)")
    common.add_argument("--runs", type=int, help="simulation runs S")
    common.add_argument("--periods", type=int, help="evaluation periods T")
    common.add_argument("--workers", type=int, help="processes drawing simulation runs")
    common.add_argument("--q-rounding", choices=["nearest", "up"], dest="q_rounding",
                        help="order quantity integerisation in the simulator")
    common.add_argument("--out", help="write CSV to this file or directory instead of stdout")
    common.add_argument("--log-level", default=LOG_LEVEL, dest="log_level", type=str.upper, choices=LOG_LEVELS)
    return common


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = argparse.ArgumentParser(prog="subplan", description="E-grocery subscription planning toolkit.")
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("analyze", parents=[common], help="pwu, ecu and expected profit without subscriptions")

    p = sub.add_parser("adi", parents=[common], help="value of advance demand information")
    p.add_argument("--beta", type=float)

    p = sub.add_parser("subscribe", parents=[common], help="profit and thresholds of a fixed offer")
    p.add_argument("--tau", type=float)
    p.add_argument("--beta", type=float)

    p = sub.add_parser("optimize", parents=[common], help="analytic profit-maximising discount")
    p.add_argument("--lambda", type=float, dest="lam")
    p.add_argument("--exhaustive", action="store_true", help="scan the whole range at 1e-5")

    p = sub.add_parser("simulate", parents=[common], help="Monte Carlo simulation of an offer")
    p.add_argument("--tau", type=float, help="discount (default: analytic tau*)")
    p.add_argument("--lambda", type=float, dest="lam")
    p.add_argument("--trace", help="per-run CSV trace path")

    p = sub.add_parser("sweep", parents=[common], help="one-parameter sweep")
    p.add_argument("--param", required=True, choices=["n", "pi", "c", "beta", "tau", "lambda"])
    p.add_argument("--lo", type=float, required=True)
    p.add_argument("--hi", type=float, required=True)
    grid = p.add_mutually_exclusive_group(required=True)
    grid.add_argument("--step", type=float)
    grid.add_argument("--count", type=int)
    p.add_argument("--mode", choices=list(MODES), default="baseline")

    p = sub.add_parser("reproduce", parents=[common], help="published tables and figure series")
    p.add_argument("target", help="table1..table3, fig2..fig9, discount_curve, basic or all")
    p.add_argument("--n-range", type=int, nargs=2, metavar=("LO", "HI"), dest="n_range")

    p = sub.add_parser("estimate", parents=[common], help="buying probabilities from an order log")
    p.add_argument("--log", required=True, dest="log_path")
    p.add_argument("--category")
    p.add_argument("--segment", help="comma-separated customer ids (default: every customer in the log)")
    p.add_argument("--customer", help="emit the category frequency table of this customer")
    p.add_argument("--window", type=int, help="observation periods (default: distinct periods in the log)")
    return parser


def _scenario(args):
    if not args.scenario:
        raise ScenarioError("--scenario is required for this command")
    scenario = load_scenario(args.scenario)
    if args.set:
        scenario = apply_overrides(scenario, args.set)
    return scenario


def _flags(args) -> dict:
    return {k: getattr(args, k) for k in ("seed", "runs", "periods", "workers", "q_rounding")}


def run(args) -> list:
    cmd = args.command
    if cmd == "estimate":
        segment = [s.strip() for s in args.segment.split(",") if s.strip()] if args.segment else None
        return cmd_estimate(args.log_path, args.category, segment, args.window, args.customer)
    if cmd == "reproduce":
        return cmd_reproduce(args.target, simulation_config(None, _flags(args), DEFAULTS), args.n_range)

    scenario = _scenario(args)
    if cmd == "analyze":
        return cmd_analyze(scenario)
    if cmd == "adi":
        return cmd_adi(scenario, args.beta)
    if cmd == "subscribe":
        return cmd_subscribe(scenario, args.tau, args.beta)
    if cmd == "optimize":
        return cmd_optimize(scenario, args.lam, args.exhaustive)

    config = simulation_config(scenario, _flags(args), DEFAULTS)
    if cmd == "simulate":
        return cmd_simulate(scenario, config, args.tau, args.lam, args.trace)
    spec = SweepSpec(parameter=args.param, lo=args.lo, hi=args.hi, step=args.step, count=args.count)
    return cmd_sweep(scenario, spec, args.mode, config)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    _configure_logging(args.log_level)
    log = logging.getLogger("subplan")
    try:
        tables = run(args)
        out = args.out
        if out is None and args.command == "reproduce" and args.target == "all":
            out = OUT_DIR
        emit(tables, as_csv=args.csv, out=out)
    except (ScenarioError, OrderLogError, ValidationError) as e:
        log.error("[error] %s", e)
        return EXIT_INPUT
    except DomainError as e:
        log.error("[error] %s", e)
        return EXIT_DOMAIN
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())

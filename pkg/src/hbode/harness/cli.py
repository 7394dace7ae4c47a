"""Command-line entry point: ``hbode run|sweep|verify|bound|plot``."""

import argparse
import sys
from fractions import Fraction

from ..errors import HbodeError
from . import runner
from .config import load_config


def _number(text):
    # accepts "1/3" as well as decimals
    return float(Fraction(text))


def _add_run_options(sp):
    sp.add_argument("--config", help="key = value config file")
    sp.add_argument("--problem")
    sp.add_argument("--dim")
    sp.add_argument("--x0", help="'standard' or 'random:SEED:SCALE'")
    sp.add_argument("--T", help="horizon(s): '1000', '100,1000' or 'logspace:2:4:5'")
    sp.add_argument("--alpha", help="friction; default follows the schedule")
    sp.add_argument("--h", help="step size or 'auto'")
    sp.add_argument("--method", choices=["RK4", "SemiImplicitEuler"])
    sp.add_argument("--stride", help="steps between checkpoints")
    sp.add_argument("--out", help="output directory")
    sp.add_argument("--workers", help="parallel processes for sweeps")


def _config(args):
    keys = ("problem", "dim", "x0", "T", "alpha", "h", "method", "stride",
            "out", "workers")
    return load_config(args.config, {k: getattr(args, k) for k in keys})


def build_parser():
    parser = argparse.ArgumentParser(
        prog="hbode",
        description="Integrate the heavy-ball ODE and check its convergence bounds.")
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("run", help="one horizon: checkpoint CSV and summary")
    _add_run_options(sp)
    sp = sub.add_parser("sweep", help="grid of horizons: bound table and rates")
    _add_run_options(sp)
    sp = sub.add_parser("verify", help="identity and inequality checks")
    _add_run_options(sp)
    sp.add_argument("--avg-alpha-scale", type=float, default=1.0,
                    help=argparse.SUPPRESS)

    sp = sub.add_parser("bound", help="print the friction schedule and bounds")
    sp.add_argument("--L2", type=_number, required=True)
    sp.add_argument("--delta-f", type=_number, required=True)
    sp.add_argument("--T", type=_number, required=True)

    sp = sub.add_parser("plot", help="SVG figures from run or sweep CSVs")
    sp.add_argument("csv", nargs="+")
    sp.add_argument("--out", help="output directory (default: next to each CSV)")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        if args.command == "bound":
            return runner.cmd_bound(args.L2, args.delta_f, args.T)
        if args.command == "plot":
            from .plotting import plot_csv
            for path in args.csv:
                print(f"wrote {plot_csv(path, args.out)}")
            return 0
        cfg = _config(args)
        if args.command == "run":
            return runner.cmd_run(cfg)
        if args.command == "sweep":
            return runner.cmd_sweep(cfg)
        return runner.cmd_verify(cfg, avg_alpha_scale=args.avg_alpha_scale)
    except (HbodeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())

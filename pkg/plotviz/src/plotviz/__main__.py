"""Batch figure rendering from the command line.

    plotviz mqc   --csv mqc_signal.csv --summary mqc_summary.json --out fig.png
    plotviz sweep --csv sweep.csv --fits fits.json --out fig.pdf
"""

import argparse
import sys

from .figures import FigureSpec, plot_mqc, plot_sweep


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="plotviz")
    sub = parser.add_subparsers(dest="command", required=True)

    mqc = sub.add_parser("mqc", help="signal plot with analytic overlays")
    mqc.add_argument("--csv", required=True)
    mqc.add_argument("--summary", required=True)
    mqc.add_argument("--out", required=True)
    mqc.add_argument("--title")

    sweep = sub.add_parser("sweep", help="log-log cost bands with fits")
    sweep.add_argument("--csv", required=True)
    sweep.add_argument("--fits", required=True)
    sweep.add_argument("--out", required=True)
    sweep.add_argument("--title")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "mqc":
            plot_mqc(FigureSpec("mqc_signal", args.csv, args.summary, args.out,
                                title=args.title))
        else:
            plot_sweep(FigureSpec("cnot_sweep", args.csv, args.fits, args.out,
                                  title=args.title))
    except (ValueError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())

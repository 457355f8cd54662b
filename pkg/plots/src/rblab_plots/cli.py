"""Command-line entry points: plot-kl-gap and plot-dist."""

from __future__ import annotations

import argparse
import sys

from .figures import FigureSpec, plot_distributions, plot_kl_gap


def main_kl_gap(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="plot-kl-gap",
        description="Render KL-Gap trend panels from aggregate sweep CSVs")
    parser.add_argument("--inputs", nargs="+", required=True,
                        help="aggregate CSVs, one panel each")
    parser.add_argument("--out", required=True, help="output image path")
    parser.add_argument("--dpi", type=int, default=120)
    args = parser.parse_args(argv)
    try:
        path = plot_kl_gap(FigureSpec(input_paths=tuple(args.inputs),
                                      output_path=args.out, dpi=args.dpi))
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(path)
    return 0


def main_dist(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="plot-dist",
        description="Scatter anchor/synthetic data with model density contours")
    parser.add_argument("--anchor", required=True, help="anchor dataset CSV")
    parser.add_argument("--gen", required=True, help="synthetic dataset CSV")
    parser.add_argument("--gt", nargs="+", required=True,
                        help="model files to draw contours for")
    parser.add_argument("--out", required=True, help="output image path")
    parser.add_argument("--dpi", type=int, default=120)
    args = parser.parse_args(argv)
    try:
        path = plot_distributions(args.anchor, args.gen, tuple(args.gt),
                                  args.out, dpi=args.dpi)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main_kl_gap())

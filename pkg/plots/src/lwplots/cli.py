"""plot <kind> --in <csv> [--pair A,B | --estimators ...] --out <img>"""

from __future__ import annotations

import argparse
import sys

from .figures import FigureSpec, render
from .records import TableError


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="plot", description="Render figures from lwshrink loss CSVs"
    )
    parser.add_argument("kind", choices=("surface_diff", "convergence_curves"))
    parser.add_argument("--in", dest="input_csv", required=True, help="loss table CSV")
    parser.add_argument("--pair", help="two estimator ids, comma separated (surface_diff)")
    parser.add_argument(
        "--estimators", help="estimator ids to draw, comma separated (convergence_curves)"
    )
    parser.add_argument("--out", required=True, help="output image path (PNG + SVG emitted)")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    pair = None
    if args.pair is not None:
        names = tuple(tok.strip() for tok in args.pair.split(",") if tok.strip())
        if len(names) != 2:
            print("error: --pair needs exactly two estimator ids", file=sys.stderr)
            return 2
        pair = names
    estimators = None
    if args.estimators is not None:
        estimators = tuple(tok.strip() for tok in args.estimators.split(",") if tok.strip())
    try:
        spec = FigureSpec(args.input_csv, args.kind, args.out, pair, estimators)
        _, paths = render(spec)
    except (TableError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print("wrote " + ", ".join(paths))
    return 0


def entrypoint() -> None:
    sys.exit(main())

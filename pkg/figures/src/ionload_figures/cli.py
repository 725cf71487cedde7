"""`render` command: one figure per invocation.

    render --kind power_sweep --in data.csv --fit fit.txt --out fig.png

Exit codes: 0 success, 1 bad input file (missing, wrong schema, empty),
2 usage error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .csvio import FormatError
from .render import KINDS, FigureSpec, render

EXIT_OK = 0
EXIT_ERROR = 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="render",
        description="Render a figure from ionload CSV output",
    )
    parser.add_argument("--kind", required=True, choices=KINDS)
    parser.add_argument("--in", dest="input", required=True, metavar="CSV")
    parser.add_argument(
        "--fit",
        metavar="REPORT",
        help="fit report overlay (saturation curve or Poisson lambda)",
    )
    parser.add_argument("--out", required=True, metavar="PNG")
    parser.add_argument("--dpi", type=int, default=120)
    parser.add_argument("--title", help="override the default title")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    spec = FigureSpec(
        kind=args.kind,
        input_csv=Path(args.input),
        output=Path(args.out),
        fit_report=Path(args.fit) if args.fit else None,
        dpi=args.dpi,
        title=args.title,
    )
    try:
        result = render(spec)
    except (FileNotFoundError, FormatError, ValueError) as exc:
        print(f"render: {exc}", file=sys.stderr)
        return EXIT_ERROR
    print(f"{args.kind} -> {result.output}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())

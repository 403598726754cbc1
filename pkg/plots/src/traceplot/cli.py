"""Command-line entry point: trace CSVs in, one two-panel image out."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import PlotSpec, render


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="traceplot",
        description="Render objective-value and cumulative-additions panels "
                    "from benchmark trace CSVs.")
    parser.add_argument("traces", nargs="+", type=Path,
                        help="trace CSV files produced by the harness")
    parser.add_argument("--out", type=Path, default=Path("figure.png"),
                        help="output image path (default figure.png)")
    parser.add_argument("--label", action="append", metavar="NAME",
                        help="legend label, once per trace "
                             "(default: algorithm name from the trace)")
    parser.add_argument("--logy", action="store_true",
                        help="log-scale the cumulative-additions axis")
    args = parser.parse_args(argv)

    try:
        spec = PlotSpec(inputs=tuple(args.traces),
                        labels=tuple(args.label) if args.label else None,
                        out=args.out, logy=args.logy)
        out = render(spec)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(out)
    return 0


if __name__ == "__main__":
    sys.exit(main())

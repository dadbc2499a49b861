"""Figure CLI: greenran-plot --kind <k> --in <paths> --out <file> [--bins N].

Exit codes: 0 ok, 1 bad arguments or schema mismatch, 2 render failure.
"""

import argparse
import sys

from .render import KINDS, FigureSpec, render
from .schemas import SchemaError


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="greenran-plot", description=__doc__)
    parser.add_argument("--kind", required=True, choices=KINDS)
    parser.add_argument(
        "--in", dest="inputs", required=True, nargs="+",
        help="input files: batch_runs.csv, per_second.csv, or summary.json",
    )
    parser.add_argument("--out", required=True, help="output image (or text for EETable)")
    parser.add_argument("--bins", type=int, default=10)
    parser.add_argument("--window", type=int, default=3600, help="series window in seconds")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    spec = FigureSpec(
        kind=args.kind,
        inputs=tuple(args.inputs),
        output=args.out,
        bins=args.bins,
        window_s=args.window,
    )
    try:
        result = render(spec)
    except (SchemaError, FileNotFoundError, ValueError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(f"wrote {result.output}")
    return 0


if __name__ == "__main__":
    sys.exit(main())

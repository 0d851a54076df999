"""Command line front end: memflow-plot <kind> --in <csv> [--in2 <csv>] --out <img>.

Exit codes: 0 success, 2 schema or usage error.
"""

from __future__ import annotations

import argparse
import sys

from .figures import plot_convergence, plot_decay, plot_envelopes
from .schemas import SchemaError


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="memflow-plot", description=__doc__)
    parser.add_argument("kind", choices=["decay", "convergence", "envelope"])
    parser.add_argument("--in", dest="input", required=True, help="primary input CSV")
    parser.add_argument("--in2", dest="input2", default=None,
                        help="optional second CSV (decay: sandwich report)")
    parser.add_argument("--out", required=True, help="output image path")
    args = parser.parse_args(argv)

    try:
        if args.kind == "decay":
            plot_decay(args.input, args.out, sandwich_csv=args.input2)
        elif args.kind == "convergence":
            _, slope = plot_convergence(args.input, args.out)
            print(f"slope = {slope:.15g}")
        else:
            plot_envelopes(args.input, args.out)
    except SchemaError as exc:
        print(f"schema error: {exc}", file=sys.stderr)
        return 2
    print(f"wrote {args.out}")
    return 0


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()

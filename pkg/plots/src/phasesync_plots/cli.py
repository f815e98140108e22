"""Command line wrapper: render <csv> <metric> <out-image>."""

from __future__ import annotations

import argparse
import sys

from .heatmap import SweepDataError, render


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="render",
        description="Render one sweep metric as an (n, sigma) heatmap.",
    )
    parser.add_argument("csv", help="sweep CSV file produced by the solver package")
    parser.add_argument("metric", help="CSV column to aggregate, e.g. cert_pass")
    parser.add_argument("out_image", help="output image path, e.g. heatmap.png")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        data = render(args.csv, args.metric, args.out_image)
    except OSError as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    except SweepDataError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    for n, rel in data.partial_cells:
        print(
            f"warning: cell n={n}, sigma/sqrt(n)={rel:g} has incomplete trials; dropped",
            file=sys.stderr,
        )
    print(f"wrote {args.out_image}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())

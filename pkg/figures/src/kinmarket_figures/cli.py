"""Command line interface.

    figures --kind bollinger-overlay --in out/ensemble.csv out/bands.csv \
            --out bands.png
    figures --kind mean-vs-time-with-band --in out/run_0.csv \
            --summary out/summary.json --out mean.png
"""

from __future__ import annotations

import argparse
import sys

from .render import FIGURE_KINDS, FigureSpec, render


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="figures",
        description="render figures from kinmarket CSV outputs")
    parser.add_argument("--kind", required=True, choices=FIGURE_KINDS)
    parser.add_argument("--in", dest="inputs", nargs="+", required=True,
                        help="input CSV file(s)")
    parser.add_argument("--out", required=True, help="output PNG path")
    parser.add_argument("--labels", nargs="*", default=[],
                        help="curve labels matching the inputs")
    parser.add_argument("--title", default="")
    parser.add_argument("--summary",
                        help="summary.json supplying W(t) and R for band plots")
    parser.add_argument("--band-W", type=float,
                        help="constant band center when no summary is given")
    parser.add_argument("--band-R", type=float,
                        help="band half-width when no summary is given")
    args = parser.parse_args(argv)
    spec = FigureSpec(kind=args.kind, inputs=args.inputs, labels=args.labels,
                      title=args.title, summary=args.summary,
                      band_W=args.band_W, band_R=args.band_R)
    path = render(spec, args.out)
    print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())

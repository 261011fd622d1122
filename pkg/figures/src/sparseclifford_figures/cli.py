"""figures <kind> --in <csv> --out <png/svg>: plot sparseclifford CSV tables."""

import argparse
import sys

from .render import RENDERERS, render
from .schema import SchemaError


def build_parser():
    parser = argparse.ArgumentParser(
        prog="figures",
        description="Render publication-style figures from ensemble CSV tables")
    sub = parser.add_subparsers(dest="kind", required=True)

    common = dict()
    for kind in RENDERERS:
        p = sub.add_parser(kind, **common)
        p.add_argument("--in", dest="in_path", required=True, help="input CSV")
        p.add_argument("--out", dest="out_path", required=True,
                       help="output image (.png or .svg)")
        p.add_argument("--overlay", default=None,
                       help="scaling CSV with guide values (t0, v_s)")
        if kind == "entropy":
            p.add_argument("--geometry", choices=["linear", "treelike"], default=None)
            p.add_argument("--slice-t", dest="slice_t", type=int, default=None,
                           help="plot a single time slice instead of the heatmap")
        if kind == "lightcone":
            p.add_argument("--reorder", choices=["none", "monna"], default="none",
                           help="site-axis ordering")
    return parser


def cli_main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    options = {k: v for k, v in vars(args).items()
               if k not in ("kind", "in_path", "out_path")}
    try:
        out = render(args.kind, args.in_path, args.out_path, **options)
    except (SchemaError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(out)
    return 0


def main():
    raise SystemExit(cli_main())


if __name__ == "__main__":
    main()

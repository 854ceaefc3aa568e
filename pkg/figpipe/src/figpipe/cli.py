"""Command-line front end: figpipe render --kind <k> --in <csv> --out <img>."""

import argparse
import sys

from .data import DataError
from .render import FIGURE_KINDS, FigureSpec, SpecError, render


class _Parser(argparse.ArgumentParser):
    """argparse exits with 2 on usage errors; keep every failure at 1."""

    def error(self, message: str) -> None:
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="figpipe", description="Render figures from sweep outputs.")
    sub = parser.add_subparsers(dest="command", required=True)

    rend = sub.add_parser("render", help="render one figure from a CSV input")
    rend.add_argument("--kind", required=True, choices=FIGURE_KINDS)
    rend.add_argument("--in", dest="input", required=True, metavar="CSV",
                      help="results CSV (r2-comparison, slope) or snapshot CSV (projection)")
    rend.add_argument("--out", dest="output", required=True, metavar="IMAGE",
                      help="output image; format inferred from extension (.png/.svg/.pdf)")
    rend.add_argument("--manifest", default=None, metavar="JSON",
                      help="run manifest (default: manifest.json next to the input CSV)")
    rend.add_argument("--xscale", choices=("log", "linear"), default=None,
                      help="override the per-kind default x scale")
    rend.add_argument("--yscale", choices=("log", "linear"), default=None,
                      help="override the per-kind default y scale")
    rend.add_argument("--xrange", nargs=2, type=float, default=None,
                      metavar=("LO", "HI"))
    rend.add_argument("--yrange", nargs=2, type=float, default=None,
                      metavar=("LO", "HI"))
    rend.add_argument("--dpi", type=int, default=150)
    return parser


def _scale_flag(value: str | None) -> bool | None:
    if value is None:
        return None
    return value == "log"


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)

    spec = FigureSpec(
        kind=args.kind,
        input_path=args.input,
        output_path=args.output,
        manifest_path=args.manifest,
        log_x=_scale_flag(args.xscale),
        log_y=_scale_flag(args.yscale),
        x_range=tuple(args.xrange) if args.xrange is not None else None,
        y_range=tuple(args.yrange) if args.yrange is not None else None,
        dpi=args.dpi,
    )
    try:
        written = render(spec)
    except (DataError, SpecError) as exc:
        print(f"figpipe: error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"figpipe: error: {exc}", file=sys.stderr)
        return 2
    print(f"wrote {written}")
    return 0


if __name__ == "__main__":
    sys.exit(main())

"""Command-line front end: ``epgrav-figs render --fig N --in DIR --out PATH``.

Exit codes: 0 success, 2 bad arguments, 3 data problem (missing column,
malformed CSV), 4 output I/O failure.
"""

from __future__ import annotations

import argparse
import sys

from .errors import FigsError
from .figures import FIGURE_IDS, FigureSpec, render


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="epgrav-figs")
    sub = parser.add_subparsers(dest="command", required=True)
    p_render = sub.add_parser("render", help="render one figure from CSVs")
    p_render.add_argument("--fig", type=int, required=True,
                          choices=FIGURE_IDS, help="figure id")
    p_render.add_argument("--in", dest="in_dir", required=True,
                          help="directory holding the input CSV files")
    p_render.add_argument("--out", dest="out_path", required=True,
                          help="output image path (.png, .pdf, .svg)")
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    spec = FigureSpec(figure=args.fig, in_dir=args.in_dir,
                      out_path=args.out_path)
    try:
        out = render(spec)
    except FigsError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    print(out)
    return 0


def entry() -> None:
    raise SystemExit(main())

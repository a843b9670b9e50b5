"""Script entry: soifig SPECFILE --out IMAGE."""

import argparse
import sys

from . import __version__
from .render import render
from .spec import RenderError, load_spec


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="soifig",
        description="Render figures from simulator CSV artifacts.",
    )
    parser.add_argument("specfile", help="flat key = value figure description")
    parser.add_argument("--out", required=True, help="output image path")
    parser.add_argument("--version", action="version",
                        version=f"%(prog)s {__version__}")
    args = parser.parse_args(argv)
    try:
        spec = load_spec(args.specfile, args.out)
        points = render(spec)
    except RenderError as exc:
        print(f"soifig: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"soifig: cannot write {args.out}: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {args.out} ({len(points)} points)")
    return 0


if __name__ == "__main__":
    sys.exit(main())

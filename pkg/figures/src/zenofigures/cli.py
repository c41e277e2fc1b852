"""render-figure: turn a JSON recipe plus simulator output into an image."""

from __future__ import annotations

import argparse
import sys

from .render import SchemaError, render_recipe


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="render-figure",
        description="Render a figure panel from simulator CSV/JSON output",
    )
    parser.add_argument("--recipe", required=True, help="JSON recipe path")
    parser.add_argument("--out", required=True, help="output image path")
    args = parser.parse_args(argv)
    try:
        render_recipe(args.recipe, args.out)
    except SchemaError as exc:
        print(f"schema error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())

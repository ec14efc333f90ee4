"""Batch renderer: `plots --spec <file> --out <dir>`.

The spec file is JSON: a single figure spec object or a list of them.
Each object carries kind, csv, out (image filename, resolved under
--out) and optional title/options.  Exit codes: 0 success, 1 usage,
2 bad spec or bad input data.
"""

import argparse
import json
import sys
from pathlib import Path

from .figures import FigureSpec, render

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_SPEC = 2


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise _UsageError(message)


def load_specs(path):
    """Parse the spec file into a list of FigureSpec."""
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except FileNotFoundError:
        raise ValueError(f"spec file not found: {path}")
    except json.JSONDecodeError as exc:
        raise ValueError(f"spec file {path} is not valid JSON: {exc}")
    if isinstance(raw, dict):
        raw = [raw]
    if not isinstance(raw, list) or not raw:
        raise ValueError("spec file must hold a figure spec or a list of them")
    specs = []
    for i, entry in enumerate(raw):
        if not isinstance(entry, dict):
            raise ValueError(f"spec entry {i} is not an object")
        allowed = {"kind", "csv", "out", "title", "options"}
        unknown = set(entry) - allowed
        if unknown:
            raise ValueError(f"spec entry {i} has unknown keys: {sorted(unknown)}")
        missing = {"kind", "csv", "out"} - set(entry)
        if missing:
            raise ValueError(f"spec entry {i} is missing keys: {sorted(missing)}")
        specs.append(FigureSpec(**entry))
    return specs


def cli_main(argv=None):
    parser = _Parser(prog="plots")
    parser.add_argument("--spec", required=True, help="JSON figure spec file")
    parser.add_argument("--out", required=True, help="output directory")
    parser.add_argument("--quiet", action="store_true")
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    out_dir = Path(args.out)
    try:
        specs = load_specs(args.spec)
        for spec in specs:
            spec.out = str(out_dir / spec.out)
            path, _ = render(spec)
            if not args.quiet:
                print(f"wrote {path}")
    except ValueError as exc:
        print(f"spec error: {exc}", file=sys.stderr)
        return EXIT_SPEC
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_SPEC
    return EXIT_OK


def main():
    sys.exit(cli_main())


if __name__ == "__main__":
    main()

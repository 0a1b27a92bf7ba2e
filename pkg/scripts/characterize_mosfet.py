#!/usr/bin/env python3
"""Produce the standard MOSFET characterization set (CSV per sweep).

Writes idvg/idvd/cv/gummel CSVs into --outdir using the same subcommands
the `synapsim` entry point exposes, so the artifacts match the CLI's.
"""

import argparse
import pathlib

from synapsim.cli import main as cli


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--outdir", default="out", type=pathlib.Path)
    ap.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                    help="model overrides forwarded to every sweep")
    args = ap.parse_args()
    args.outdir.mkdir(parents=True, exist_ok=True)

    fwd = [v for pair in args.set for v in ("--set", pair)]
    for sub in ("idvg", "idvd", "cv", "gummel"):
        rc = cli([sub, "--out", str(args.outdir / f"{sub}.csv"), *fwd])
        if rc:
            raise SystemExit(rc)


if __name__ == "__main__":
    main()

#!/usr/bin/env python3
"""RRAM and floating-gate experiment set.

Writes the bipolar hysteresis loop, the 1T1R compliance-tuning curve and
a floating-gate program/weaken staircase into --outdir, then prints the
headline figures (loop span, tuning levels, read-current excursion).
"""

import argparse
import pathlib

import numpy as np

from synapsim.cli import main as cli


def _column(path, name):
    lines = [ln for ln in path.read_text().splitlines()
             if ln and not ln.startswith("#")]
    idx = lines[0].split(",").index(name)
    return np.array([float(ln.split(",")[idx]) for ln in lines[1:]])


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--outdir", default="out", type=pathlib.Path)
    args = ap.parse_args()
    args.outdir.mkdir(parents=True, exist_ok=True)

    loop = args.outdir / "rram_iv.csv"
    tune = args.outdir / "rram_tune.csv"
    fgp = args.outdir / "fg_pulse.csv"
    for argv in ((["rram-iv", "--out", str(loop)]),
                 (["rram-tune", "--out", str(tune)]),
                 (["fg-pulse", "--out", str(fgp)])):
        rc = cli(argv)
        if rc:
            raise SystemExit(rc)

    x = _column(loop, "x")
    reads = _column(tune, "i_read")
    i_fg = _column(fgp, "i_read")
    levels = 1 + int(np.sum(np.diff(reads) / reads[:-1] > 0.02))
    print(f"hysteresis X span: {x.min():.3f} .. {x.max():.3f}")
    print(f"tuning curve: {levels} read levels >2% apart over "
          f"{reads.size} gate settings")
    print(f"floating gate read current: {i_fg.min():.3e} .. "
          f"{i_fg.max():.3e} A over the pulse staircase")


if __name__ == "__main__":
    main()

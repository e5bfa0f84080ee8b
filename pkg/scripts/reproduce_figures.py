"""
Run every preset at full size and print a steady-state summary.

    python scripts/reproduce_figures.py --out results/

The preset sweep (Doppler 10, 66, 128 Hz) runs as a sweep. Afterwards
``scripts/plot_curves.py results/`` draws the figures.
"""

import argparse
import sys
from pathlib import Path

import numpy as np

from adaptnet import config as cfg
from adaptnet import csvio
from adaptnet.cli import main as cli_main


def summary(out):
    for path in sorted(out.glob("steady_*.csv")):
        t = csvio.read_table(path)
        sim = np.array([csvio.parse_db(v) for v in t["msd_sim_db"]])
        th = np.array([csvio.parse_db(v) for v in t["msd_theory_db"]])
        gap = np.array([csvio.parse_db(v) for v in t["msd_gap_db"]])
        line = f"{path.stem[7:]:36s} sim MSD {np.mean(sim):9.3f} dB"
        if not np.all(np.isnan(th)):
            line += f"   theory {np.mean(th):9.3f} dB   max |gap| {np.max(np.abs(gap)):.3f} dB"
        print(line)


def main():
    p = argparse.ArgumentParser(description=__doc__.split("\n\n")[0])
    p.add_argument("--out", default="results")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int)
    args = p.parse_args()
    extra = ["--seed", str(args.seed), "--out", args.out]
    if args.threads:
        extra += ["--threads", str(args.threads)]
    status = 0
    for name in cfg.PRESETS:
        print(f"running {name}", flush=True)
        status = max(status, cli_main(["--preset", name, *extra]))
    summary(Path(args.out))
    return status


if __name__ == "__main__":
    sys.exit(main())

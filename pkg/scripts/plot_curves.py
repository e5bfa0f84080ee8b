"""
Plot learning curves and steady-state tables written by ``adaptnet``.

    python scripts/plot_curves.py results/ --out figures/

For every ``curves_<name>.csv`` this draws the MSD and EMSE of a few nodes
against iteration. For every ``steady_<name>.csv`` with theory values it
draws theory and simulation per node. Needs matplotlib.
"""

import argparse
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from adaptnet import csvio  # noqa: E402


def plot_curves(path, out_dir, nodes=(1, 10, 20)):
    msd, emse, _ = csvio.read_curves(path)
    nodes = [k for k in nodes if k <= msd.shape[1]] or [1]
    fig, axes = plt.subplots(1, 2, figsize=(10, 3.8), sharex=True)
    for ax, data, label in zip(axes, (msd, emse), ("MSD", "EMSE")):
        for k in nodes:
            ax.plot(data[:, k - 1], lw=0.8, label=f"node {k}")
        ax.set_xlabel("iteration")
        ax.set_ylabel(f"{label} (dB)")
        ax.grid(alpha=0.3)
    axes[0].legend(fontsize=8)
    name = path.stem.removeprefix("curves_")
    fig.suptitle(name)
    fig.tight_layout()
    fig.savefig(out_dir / f"{name}_curves.png", dpi=130)
    plt.close(fig)


def plot_steady(path, out_dir):
    table = csvio.read_table(path)
    th = np.array([csvio.parse_db(v) for v in table["msd_theory_db"]])
    if np.all(np.isnan(th)):
        return
    node = np.array(table["node"], dtype=int)
    fig, axes = plt.subplots(1, 2, figsize=(10, 3.8), sharex=True)
    for ax, metric in zip(axes, ("msd", "emse")):
        ax.plot(node, [csvio.parse_db(v) for v in table[f"{metric}_theory_db"]], "k-",
                label="theory")
        ax.plot(node, [csvio.parse_db(v) for v in table[f"{metric}_sim_db"]], "o",
                ms=4, label="simulation")
        ax.set_xlabel("node")
        ax.set_ylabel(f"steady-state {metric.upper()} (dB)")
        ax.grid(alpha=0.3)
    axes[0].legend(fontsize=8)
    name = path.stem.removeprefix("steady_")
    fig.suptitle(name)
    fig.tight_layout()
    fig.savefig(out_dir / f"{name}_steady.png", dpi=130)
    plt.close(fig)


def main():
    p = argparse.ArgumentParser(description=__doc__.split("\n\n")[0])
    p.add_argument("results", type=Path)
    p.add_argument("--out", type=Path, default=Path("figures"))
    args = p.parse_args()
    args.out.mkdir(parents=True, exist_ok=True)
    for path in sorted(args.results.glob("curves_*.csv")):
        plot_curves(path, args.out)
    for path in sorted(args.results.glob("steady_*.csv")):
        plot_steady(path, args.out)


if __name__ == "__main__":
    main()

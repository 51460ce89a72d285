"""Radial eigenfunction profiles for the two disk figures, optionally plotted."""

import argparse
import csv
from pathlib import Path

from robinspec import harness


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default="results/figures")
    ap.add_argument("--plot", action="store_true", help="also write PNGs with matplotlib")
    args = ap.parse_args()
    paths = harness.emit_figures(args.out)
    if not args.plot:
        return
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    for path in paths:
        with open(path) as fh:
            rows = list(csv.DictReader(fh))
        r = [float(x["r"]) for x in rows]
        fig, ax = plt.subplots(figsize=(5, 4))
        for col in rows[0]:
            if col != "r":
                ax.plot(r, [float(x[col]) for x in rows], label=col)
        ax.set_xlabel("r")
        ax.legend(fontsize=7)
        fig.savefig(Path(path).with_suffix(".png"), dpi=120)
        plt.close(fig)


if __name__ == "__main__":
    main()

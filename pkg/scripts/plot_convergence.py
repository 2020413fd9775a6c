#!/usr/bin/env python3
"""Plot sweep results (needs matplotlib, installed via the 'plots' extra).

Each sweep_plot.dat holds: unknowns, h1_error, l2_lambda_error, and the
reference curves 10*h_X and 10*sqrt(k).  One PNG per input file.
"""

import argparse
import sys
from pathlib import Path

import numpy as np


def plot_file(path, out_path):
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    data = np.loadtxt(path)
    data = np.atleast_2d(data)
    unknowns = data[:, 0]
    fig, ax = plt.subplots(figsize=(6, 4.5))
    ax.loglog(unknowns, data[:, 1], "o-", label="H1 error")
    ax.loglog(unknowns, data[:, 2], "s-", label="L2(Gamma) multiplier error")
    ax.loglog(unknowns, data[:, 3], "--", color="gray", label="10 h")
    ax.loglog(unknowns, data[:, 4], ":", color="gray", label="10 k^{1/2}")
    ax.set_xlabel("number of unknowns")
    ax.set_ylabel("error")
    ax.legend()
    ax.grid(True, which="both", alpha=0.3)
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)
    print(f"wrote {out_path}")


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("paths", nargs="+", help="sweep_plot.dat files")
    args = parser.parse_args()
    for raw in args.paths:
        path = Path(raw)
        plot_file(path, path.with_suffix(".png"))
    return 0


if __name__ == "__main__":
    sys.exit(main())

#!/usr/bin/env python3
"""Plot an interference fringe from a `spinmz fringe` CSV.

Usage:
    spinmz fringe --n 4 --ideal --out fringe.csv
    python scripts/plot_fringe.py fringe.csv
"""

import sys

import matplotlib.pyplot as plt

from spinmz.cli import load_table


def main(path):
    table = load_table(path)
    phi = table.column("phi")
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(phi, table.column("p1"), "o", ms=3, label="simulated")
    ax.plot(phi, table.column("p1_analytic"), "-", lw=1,
            label="sin^2(N phi / 2)")
    ax.set_xlabel("phi  [rad]")
    ax.set_ylabel("P1")
    ax.legend()
    fig.tight_layout()
    out = path.rsplit(".", 1)[0] + ".png"
    fig.savefig(out, dpi=150)
    print(f"wrote {out}")


if __name__ == "__main__":
    main(sys.argv[1])

#!/usr/bin/env python3
"""Plot FM-population evolutions from a `spinmz populations` CSV.

Usage:
    spinmz populations --n 2,4,6,8 --tau 5 --out populations.csv
    python scripts/plot_populations.py populations.csv
"""

import sys

import matplotlib.pyplot as plt

from spinmz.cli import load_table


def main(path):
    table = load_table(path)
    t = table.column("t")
    fig, ax = plt.subplots(figsize=(6, 4))
    for name in table.columns:
        if name.startswith("p_sum_"):
            ax.plot(t, table.column(name), label=name.removeprefix("p_sum_"))
    ax.set_xlabel("t  [1/J0]")
    ax.set_ylabel("p_up + p_down")
    ax.set_ylim(0, 1.05)
    ax.legend()
    fig.tight_layout()
    out = path.rsplit(".", 1)[0] + ".png"
    fig.savefig(out, dpi=150)
    print(f"wrote {out}")


if __name__ == "__main__":
    main(sys.argv[1])

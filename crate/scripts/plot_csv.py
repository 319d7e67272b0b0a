#!/usr/bin/env python3
"""Plot any CSV written by `logweyl` (spectrum, flow trajectory, fit points).

Lines starting with '#' are header comments; a '# columns: a,b,c' line names
the columns. The first column is the x axis unless --x is given. A
single-column file (a spectrum) is drawn as the staircase N(lambda).

    python3 scripts/plot_csv.py run.csv -o run.png
"""
import argparse

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402


def load(path):
    names, rows = None, []
    with open(path) as f:
        for line in f:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                body = line[1:].strip()
                if body.startswith("columns:"):
                    names = [c.strip() for c in body.split(":", 1)[1].split(",")]
                continue
            rows.append([float(v) for v in line.split(",")])
    data = np.array(rows, ndmin=2)
    if names is None:
        names = [f"col{i}" for i in range(data.shape[1])]
    return names, data


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("csv")
    ap.add_argument("-o", "--output", default=None)
    ap.add_argument("--x", default=None, help="column used as the x axis")
    ap.add_argument("--logx", action="store_true")
    args = ap.parse_args()

    names, data = load(args.csv)
    fig, ax = plt.subplots(figsize=(7, 4.5))
    if data.shape[1] == 1:
        lam = np.sort(data[:, 0])
        ax.step(lam, np.arange(1, len(lam) + 1), where="post")
        ax.set_xlabel("lambda")
        ax.set_ylabel("N(lambda)")
    else:
        xi = names.index(args.x) if args.x else 0
        for i, name in enumerate(names):
            if i != xi:
                ax.plot(data[:, xi], data[:, i], label=name)
        ax.set_xlabel(names[xi])
        ax.legend()
    if args.logx:
        ax.set_xscale("log")
    fig.tight_layout()
    fig.savefig(args.output or args.csv.rsplit(".", 1)[0] + ".png", dpi=120)


if __name__ == "__main__":
    main()

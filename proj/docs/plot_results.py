#!/usr/bin/env python3
"""Plot the CSV outputs of the rcspin CLI.

Usage:
    plot_results.py ensemble fig1.csv [more.csv ...] [-o out.png]
    plot_results.py tli      fig2.csv [more.csv ...] [-o out.png]
    plot_results.py levels   rstat.csv [more.csv ...] [-o out.png]
    plot_results.py series   z2run_return.csv [-o out.png]
    plot_results.py density  cone_density.csv [-o out.png]

`ensemble`, `tli`, and `levels` accept several files (e.g. one per chain
length) and overlay them. `series` plots every row of a return-probability
file; `density` draws the site-resolved occupation as a space-time map.
"""

import argparse
import csv
import sys

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402


def read_table(path):
    """Read a header+rows CSV into a dict of float columns."""
    with open(path, newline="") as handle:
        reader = csv.DictReader(handle)
        columns = {name: [] for name in reader.fieldnames}
        for row in reader:
            for name, value in row.items():
                columns[name].append(float(value))
    return columns


def read_series(path):
    """Read a times-header series file into (times, [rows])."""
    with open(path, newline="") as handle:
        rows = [[float(x) for x in line] for line in csv.reader(handle) if line]
    return rows[0], rows[1:]


def label_for(path, table):
    n = int(table["N"][0]) if "N" in table and table["N"] else None
    return f"N = {n}" if n is not None else path


def plot_ensemble(paths, axes=None):
    fig, (top, bottom) = plt.subplots(2, 1, sharex=True, figsize=(6, 7))
    for path in paths:
        t = read_table(path)
        name = label_for(path, t)
        top.errorbar(t["mu_over_N"], t["p"], yerr=t["p_err"], marker="o",
                     capsize=2, label=name)
        bottom.errorbar(t["mu_over_N"], t["rho_mean"], yerr=t["rho_stderr"],
                        marker="s", capsize=2, label=name)
    top.set_ylabel("p (probability of hosting an LLS)")
    bottom.set_ylabel(r"$\rho$ (LLS fraction of the sector)")
    bottom.set_xlabel(r"$\mu/N$")
    bottom.set_yscale("log")
    for ax in (top, bottom):
        ax.grid(alpha=0.3)
        ax.legend()
    return fig


def plot_tli(paths, axes=None):
    fig, (top, bottom) = plt.subplots(2, 1, sharex=True, figsize=(6, 7))
    for path in paths:
        t = read_table(path)
        name = label_for(path, t)
        top.plot(t["mu_over_N"], t["mean_mc_over_N"], marker="o", label=name)
        bottom.plot(t["mu_over_N"], t["mean_mc_over_DH"], marker="s", label=name)
    top.set_ylabel(r"$\langle m_c \rangle / N$")
    bottom.set_ylabel(r"$\langle m_c \rangle / D_H$")
    bottom.set_xlabel(r"$\mu/N$")
    bottom.set_yscale("log")
    for ax in (top, bottom):
        ax.grid(alpha=0.3)
        ax.legend()
    return fig


def plot_levels(paths, axes=None):
    fig, ax = plt.subplots(figsize=(6, 4))
    for path in paths:
        t = read_table(path)
        ax.errorbar(t["mu_over_N"], t["mean_r"], yerr=t["stderr"], marker="o",
                    capsize=2, label=label_for(path, t))
    ax.axhline(0.5359, color="tab:green", ls="--", lw=1, label="orthogonal class")
    ax.axhline(0.3863, color="tab:red", ls=":", lw=1, label="uncorrelated")
    ax.set_xlabel(r"$\mu/N$")
    ax.set_ylabel(r"$\langle r \rangle$")
    ax.grid(alpha=0.3)
    ax.legend()
    return fig


def plot_series(paths, axes=None):
    fig, ax = plt.subplots(figsize=(7, 4))
    for path in paths:
        times, rows = read_series(path)
        for k, row in enumerate(rows):
            label = path if len(rows) == 1 else f"{path}[{k}]"
            ax.plot(times, row, lw=1, label=label)
    ax.set_xlabel("t")
    ax.set_ylabel("L(t)")
    ax.set_ylim(-0.02, 1.02)
    ax.grid(alpha=0.3)
    if sum(1 for _ in paths) <= 6:
        ax.legend()
    return fig


def plot_density(paths, axes=None):
    figs = plt.subplots(len(paths), 1, figsize=(7, 3.2 * len(paths)), squeeze=False)
    fig, axes_grid = figs
    for ax, path in zip(axes_grid[:, 0], paths):
        times, rows = read_series(path)
        image = ax.imshow(rows, aspect="auto", origin="lower",
                          extent=(times[0], times[-1], -0.5, len(rows) - 0.5),
                          cmap="viridis", vmin=0.0, vmax=1.0)
        fig.colorbar(image, ax=ax, label=r"$\langle n_i \rangle$")
        ax.set_xlabel("t")
        ax.set_ylabel("site")
        ax.set_title(path, fontsize=9)
    return fig


PLOTTERS = {
    "ensemble": plot_ensemble,
    "tli": plot_tli,
    "levels": plot_levels,
    "series": plot_series,
    "density": plot_density,
}


def main():
    parser = argparse.ArgumentParser(description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("kind", choices=sorted(PLOTTERS))
    parser.add_argument("csv", nargs="+", help="CSV file(s) produced by rcspin")
    parser.add_argument("-o", "--out", default=None,
                        help="output image (default: <first csv>.png)")
    args = parser.parse_args()

    fig = PLOTTERS[args.kind](args.csv)
    out = args.out or args.csv[0].rsplit(".", 1)[0] + ".png"
    fig.tight_layout()
    fig.savefig(out, dpi=160)
    print(f"wrote {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())

#!/usr/bin/env python3
"""Plot fidelity vs collision number from `pmme thermalize` CSV output.

Usage: plot_fidelity.py fidelity.csv [-o fidelity.png] [--threshold 0.99]
"""

import argparse
import sys

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import pandas as pd  # noqa: E402

LABELS = {
    "markov": "Markovian",
    "pm-early": "post-Markovian, early measurement",
    "pm-intermediate": "post-Markovian, intermediate measurement",
}
STYLES = {"markov": "-", "pm-early": "--", "pm-intermediate": "-."}


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("csv", help="output of `pmme thermalize`")
    parser.add_argument("-o", "--output", default="fidelity.png", help="PNG path (default: fidelity.png)")
    parser.add_argument("--threshold", type=float, default=0.99, help="horizontal reference line")
    args = parser.parse_args()

    data = pd.read_csv(args.csv, comment="#")
    missing = {"n", "scenario", "fidelity"} - set(data.columns)
    if missing:
        print(f"{args.csv}: missing columns {sorted(missing)}", file=sys.stderr)
        return 2

    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    for scenario, rows in data.groupby("scenario", sort=False):
        ax.plot(rows["n"], rows["fidelity"], STYLES.get(scenario, ":"), label=LABELS.get(scenario, scenario))
    ax.axhline(args.threshold, color="0.6", lw=0.8, ls=":")
    ax.set_xlabel("collision number n")
    ax.set_ylabel(r"fidelity $F(\rho_n, \eta)$")
    ax.set_ylim(top=1.005)
    ax.legend(loc="lower right")
    fig.tight_layout()
    fig.savefig(args.output, dpi=150)
    print(f"wrote {args.output}")
    return 0


if __name__ == "__main__":
    sys.exit(main())

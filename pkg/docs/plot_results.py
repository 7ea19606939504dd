"""Plot CSV output from the blochopt CLI.

Examples:
    blochopt optimize --out results
    python3 docs/plot_results.py results

Produces populations.png (ground/excited occupations: controlled, free, and
target curves) and coherence.png (decoherence factor, controlled vs free)
next to the CSV files.  Requires matplotlib, which the package itself does
not depend on.
"""

import csv
import sys
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt


def read_csv(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    header = rows[0]
    cols = {name: [float(r[i]) for r in rows[1:]] for i, name in enumerate(header)}
    return cols


def main():
    outdir = Path(sys.argv[1]) if len(sys.argv) > 1 else Path("out")
    traj_path = outdir / "trajectory.csv"
    if not traj_path.exists():
        raise SystemExit(f"no trajectory.csv under {outdir}; run `blochopt optimize` first")
    data = read_csv(traj_path)
    t = data["t"]

    fig, ax = plt.subplots(figsize=(8, 5))
    ax.plot(t, data["p_g"], "r-", label="ground (controlled)")
    ax.plot(t, data["p_e"], "b-", label="excited (controlled)")
    ax.plot(t, data["pg_free"], "r--", alpha=0.7, label="ground (free)")
    ax.plot(t, data["pe_free"], "b--", alpha=0.7, label="excited (free)")
    ax.plot(t, data["pg_target"], "r:", alpha=0.7, label="ground (target)")
    ax.plot(t, data["pe_target"], "b:", alpha=0.7, label="excited (target)")
    ax.set_xlabel("t")
    ax.set_ylabel("occupation probability")
    ax.legend(fontsize=8)
    ax.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(outdir / "populations.png", dpi=150)
    print(f"wrote {outdir / 'populations.png'}")

    fig2, ax2 = plt.subplots(figsize=(8, 4))
    ax2.plot(t, data["Lambda"], label="controlled")
    free_path = outdir / "free.csv"
    if free_path.exists():
        free = read_csv(free_path)
        ax2.plot(free["t"], free["Lambda"], "--", label="free")
    ax2.set_xlabel("t")
    ax2.set_ylabel("decoherence factor")
    ax2.legend()
    ax2.grid(alpha=0.3)
    fig2.tight_layout()
    fig2.savefig(outdir / "coherence.png", dpi=150)
    print(f"wrote {outdir / 'coherence.png'}")


if __name__ == "__main__":
    main()

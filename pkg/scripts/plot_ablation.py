"""Bar chart of an ablation summary produced by `bcx ablate --out summary.json`.

Usage: python scripts/plot_ablation.py summary.json [out.png]
"""
import json
import sys

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt


def main():
    summary = json.load(open(sys.argv[1], encoding="utf-8"))
    out = sys.argv[2] if len(sys.argv) > 2 else "ablation.png"
    names = list(summary)
    means = [summary[n]["fidelity_mean"] or 0.0 for n in names]
    errs = [summary[n]["fidelity_stderr"] for n in names]
    fig, ax = plt.subplots(figsize=(1.2 * len(names) + 2, 4))
    ax.bar(names, means, yerr=errs, capsize=4, color="#4878d0")
    ax.set_ylabel("% fidelity")
    ax.set_ylim(0, 1)
    ax.set_title("counterfactual fidelity by configuration")
    plt.xticks(rotation=20, ha="right")
    fig.tight_layout()
    fig.savefig(out, dpi=150)
    print(f"wrote {out}")


if __name__ == "__main__":
    main()

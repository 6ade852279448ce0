"""Figure rendering for report paths; every function writes a PNG and
returns its path."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402


def plot_precision_bars(report: dict, path, title="retrieval precision"):
    ks = sorted(int(k.split("@")[1]) for k in report if k.startswith("p@"))
    vals = [report[f"p@{k}"] for k in ks]
    errs = [report.get(f"std@{k}", 0.0) for k in ks]
    fig, ax = plt.subplots(figsize=(4.5, 3))
    ax.bar([f"P@{k}" for k in ks], vals,
           yerr=errs if any(errs) else None, color="#4878a8")
    ax.set_ylim(0, 1.05)
    ax.set_ylabel("precision")
    ax.set_title(f"{title} ({report.get('evaluated', 0)} evaluated, "
                 f"{report.get('skipped', 0)} skipped)")
    for i, v in enumerate(vals):
        ax.text(i, v + 0.02, f"{v:.3f}", ha="center", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def plot_spectra(eigs1, eigs2, k_used, score, path,
                 labels=("space 1", "space 2")):
    fig, ax = plt.subplots(figsize=(5, 3))
    ax.plot(range(1, len(eigs1) + 1), eigs1, "o-", label=labels[0], ms=3)
    ax.plot(range(1, len(eigs2) + 1), eigs2, "s-", label=labels[1], ms=3)
    ax.axvline(k_used, color="gray", ls="--", lw=1, label=f"k={k_used}")
    ax.set_xlabel("eigenvalue rank")
    ax.set_ylabel("Laplacian eigenvalue")
    ax.set_title(f"score = {score:.4g}")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def plot_iteration_metric(values, path, ylabel="BLEU",
                          title="back-translation progress"):
    fig, ax = plt.subplots(figsize=(4.5, 3))
    ax.plot(range(len(values)), values, "o-")
    ax.set_xticks(range(len(values)))
    ax.set_xlabel("iteration")
    ax.set_ylabel(ylabel)
    ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def plot_mos_bars(summary: dict, path):
    configs = sorted(summary["correctness"])
    means = [summary["correctness"][c]["mean"] for c in configs]
    stds = [summary["correctness"][c]["std"] for c in configs]
    fig, ax = plt.subplots(figsize=(5, 3))
    ax.bar(configs, means, yerr=stds, color="#6a9f58", capsize=3)
    ax.set_ylim(0, 5.2)
    ax.axhline(4.0, color="gray", ls="--", lw=1)
    ax.set_ylabel("correctness MOS")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path

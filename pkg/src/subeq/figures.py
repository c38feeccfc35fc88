"""Matplotlib figure rendering for pipeline reports.

Figures are written next to the CSV/JSON outputs; the Agg backend keeps
rendering headless and deterministic.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402


def pressure_figure(result: dict, path) -> None:
    fig, ax = plt.subplots(figsize=(6, 4))
    n = result["n_values"]
    ax.plot(n, result["estimates"], "o-", label="(1/n) log Z_n")
    ax.axhline(result["upper_bound"], color="C1", ls="--", label="upper bound")
    if result.get("lower_bound") is not None:
        ax.axhline(result["lower_bound"], color="C2", ls="--",
                   label="periodic lower bound")
    if result.get("extrapolated") is not None:
        ax.axhline(result["extrapolated"], color="C3", ls=":",
                   label="extrapolated")
    ax.set_xlabel("n")
    ax.set_ylabel("pressure estimate")
    ax.legend(loc="best", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def weights_figure(result: dict, path) -> None:
    words = sorted(result["weights"])
    masses = [result["weights"][w] for w in words]
    fig, ax = plt.subplots(figsize=(max(6, len(words) * 0.12), 4))
    ax.bar(range(len(words)), masses)
    ax.set_xlabel(f"level-{result['level']} words (lexicographic)")
    ax.set_ylabel("weight")
    if len(words) <= 32:
        ax.set_xticks(range(len(words)))
        ax.set_xticklabels(words, rotation=90, fontsize=6)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def lps_figure(result: dict, path) -> None:
    ratios = sorted(result["ratios"].values())
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(ratios, "o", ms=3)
    ax.axhline(1.0, color="k", lw=0.5)
    if result.get("bound") is not None:
        ax.axhline(result["bound"], color="C1", ls="--", label="C^2 bound")
        ax.axhline(1 / result["bound"], color="C1", ls="--")
        ax.legend(fontsize=8)
    ax.set_xlabel("pair (sorted)")
    ax.set_ylabel("w2(JI) / (w-(J) w+(I))")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def holonomy_figure(result: dict, path) -> None:
    inc = result["increments"]
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.semilogy(range(1, len(inc) + 1),
                [max(v, 1e-18) for v in inc], "o-")
    ax.set_xlabel("approximation step")
    ax.set_ylabel("increment norm")
    ax.set_title(f"fitted ratio {result['fitted_ratio']:.3g}")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def scan_figure(result: dict, path, value_key: str, ylabel: str) -> None:
    items = sorted(result["per_atom"].items())
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.bar(range(len(items)), [v for _, v in items])
    ax.axhline(result["epsilon"], color="C1", ls="--", label="epsilon")
    ax.set_xlabel("atom")
    ax.set_ylabel(ylabel)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)

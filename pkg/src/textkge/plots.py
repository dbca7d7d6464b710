"""Matplotlib figures rendered to files alongside the JSON/TSV reports."""

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402


def _save(fig, out_dir, name) -> str:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / name
    fig.savefig(path, dpi=150, bbox_inches="tight")
    plt.close(fig)
    return str(path)


def entity_length_histogram(lengths, out_dir) -> str:
    fig, ax = plt.subplots(figsize=(5, 3.2))
    ax.hist(lengths, bins=range(1, max(lengths) + 2), color="#4878a8",
            edgecolor="white", align="left")
    ax.set_xlabel("entity length (words)")
    ax.set_ylabel("entities")
    return _save(fig, out_dir, "entity_lengths.png")


def loss_curve(history, out_dir) -> str:
    epochs = [row["epoch"] for row in history]
    fig, ax = plt.subplots(figsize=(5, 3.2))
    ax.plot(epochs, [row["train_loss"] for row in history], label="train loss")
    if history and "dev_mrr" in history[0]:
        ax2 = ax.twinx()
        ax2.plot(epochs, [row["dev_mrr"] for row in history],
                 color="#b85450", label="dev MRR")
        ax2.set_ylabel("dev MRR")
    ax.set_xlabel("epoch")
    ax.set_ylabel("train loss")
    return _save(fig, out_dir, "training_curve.png")


def rank_histogram(ranks, out_dir) -> str:
    fig, ax = plt.subplots(figsize=(5, 3.2))
    ax.hist(ranks, bins=min(50, max(ranks)), color="#4878a8",
            edgecolor="white")
    ax.set_yscale("log")
    ax.set_xlabel("filtered rank of gold target")
    ax.set_ylabel("tuples")
    return _save(fig, out_dir, "rank_histogram.png")


def overlap_bars(report, out_dir) -> str:
    fig, ax = plt.subplots(figsize=(4, 3.2))
    ax.bar(["in training", "not in training"],
           [report.in_training, report.not_in_training],
           color=["#4878a8", "#b85450"])
    ax.set_ylabel("generated targets")
    return _save(fig, out_dir, "generated_overlap.png")

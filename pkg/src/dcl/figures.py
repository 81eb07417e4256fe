"""Figure rendering for run and comparison reports.

Every report path that writes CSV also drops PNG counterparts next to it:
the scheduler curves a run was configured with, its training trajectory,
and grouped bars for method comparisons.  Rendering is headless (Agg) and
deterministic in content, though PNG bytes are not part of any
reproducibility contract; the CSVs are the canonical record.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

_STYLE = {
    "figure.dpi": 120,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "axes.spines.top": False,
    "axes.spines.right": False,
}


def save_scheduler_curves(sampling, loss_weight, epochs: int, path) -> Path:
    """Plot g and f over the whole epoch range."""
    xs = np.arange(epochs + 1)
    with plt.rc_context(_STYLE):
        fig, ax = plt.subplots(figsize=(6, 4))
        if sampling is not None:
            ax.plot(xs, [sampling(int(x)) for x in xs], label="sampling g(l)", lw=2)
        ax.plot(xs, [loss_weight(int(x)) for x in xs], label="loss weight f(l)", lw=2)
        ax.set_xlabel("epoch")
        ax.set_ylabel("scheduler value")
        ax.set_title("curriculum schedules")
        ax.legend()
        fig.tight_layout()
        path = Path(path)
        fig.savefig(path)
        plt.close(fig)
    return path


def save_training_curves(epoch_reports, path) -> Path:
    """Training loss and validation balanced accuracy per epoch."""
    xs = [r.epoch for r in epoch_reports]
    with plt.rc_context(_STYLE):
        fig, (ax_loss, ax_acc) = plt.subplots(1, 2, figsize=(10, 4))
        ax_loss.plot(xs, [r.train_loss for r in epoch_reports], lw=2, color="tab:red")
        ax_loss.set_xlabel("epoch")
        ax_loss.set_ylabel("train loss")
        ax_loss.set_title("training loss")
        ax_acc.plot(xs, [r.val_mean_balanced for r in epoch_reports], lw=2, color="tab:blue",
                    label="balanced")
        ax_acc.plot(xs, [r.val_mean_biased for r in epoch_reports], lw=1.5, color="tab:gray",
                    ls="--", label="biased")
        ax_acc.set_xlabel("epoch")
        ax_acc.set_ylabel("val mean accuracy")
        ax_acc.set_title("validation accuracy")
        ax_acc.legend()
        fig.tight_layout()
        path = Path(path)
        fig.savefig(path)
        plt.close(fig)
    return path


def save_comparison_bars(group_names, method_rows: dict[str, list[float]], path,
                         ylabel: str = "mean balanced accuracy") -> Path:
    """Grouped bars: one cluster per ratio group, one bar per method."""
    methods = list(method_rows)
    x = np.arange(len(group_names))
    width = 0.8 / max(len(methods), 1)
    with plt.rc_context(_STYLE):
        fig, ax = plt.subplots(figsize=(7, 4.5))
        for i, method in enumerate(methods):
            offset = (i - (len(methods) - 1) / 2) * width
            ax.bar(x + offset, method_rows[method], width, label=method)
        ax.set_xticks(x)
        ax.set_xticklabels(group_names)
        ax.set_xlabel("imbalance ratio group")
        ax.set_ylabel(ylabel)
        ax.set_ylim(0.4, 1.0)
        ax.set_title("method comparison by imbalance group")
        ax.legend()
        fig.tight_layout()
        path = Path(path)
        fig.savefig(path)
        plt.close(fig)
    return path

"""Figure rendering for condition summaries.

The delimited CSV remains the data contract; these charts are a convenience
layer over the saved summaries (score by condition, per-map normalized scores,
and the team-size sweep).
"""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .harness import ConditionSummary, mean_ci

CONDITION_ORDER = ("nToM-nToM", "ToM-nToM", "ToM-ToM")


def _ordered(summaries: Sequence[ConditionSummary]) -> list[ConditionSummary]:
    def rank(label: str):
        return (
            CONDITION_ORDER.index(label) if label in CONDITION_ORDER else len(CONDITION_ORDER),
            label,
        )

    return sorted(summaries, key=lambda s: rank(s.label))


def plot_condition_means(
    summaries: Sequence[ConditionSummary], out_path: str | Path
) -> Path:
    """Pooled mean score per condition with 95% confidence intervals."""
    summaries = _ordered(summaries)
    labels = [s.label for s in summaries]
    means, err_lo, err_hi = [], [], []
    for s in summaries:
        mean, _sd, lo, hi = mean_ci(s.pooled_scores)
        means.append(mean)
        err_lo.append(mean - lo)
        err_hi.append(hi - mean)
    fig, ax = plt.subplots(figsize=(1.6 + 1.1 * len(labels), 4.0))
    ax.bar(labels, means, yerr=[err_lo, err_hi], capsize=4, color="#4878a8")
    ax.set_ylabel("Average score")
    ax.set_title("Score by condition (pooled over maps, 95% CI)")
    ax.tick_params(axis="x", rotation=20)
    fig.tight_layout()
    out_path = Path(out_path)
    fig.savefig(out_path, dpi=150)
    plt.close(fig)
    return out_path


def plot_normalized_by_map(
    summaries: Sequence[ConditionSummary],
    out_path: str | Path,
    baseline_label: str = "nToM-nToM",
) -> Path:
    """Per-map scores normalized so the baseline condition sits at 1.0."""
    summaries = _ordered(summaries)
    baseline = next(s for s in summaries if s.label == baseline_label)
    maps = baseline.maps
    width = 0.8 / len(summaries)
    fig, ax = plt.subplots(figsize=(1.5 + 1.6 * len(maps), 4.0))
    for i, summary in enumerate(summaries):
        xs = [m + i * width for m in range(len(maps))]
        ys = [
            summary.map_stats(name).mean / (baseline.map_stats(name).mean or 1.0)
            for name in maps
        ]
        ax.bar(xs, ys, width=width, label=summary.label)
    ax.axhline(1.0, color="grey", lw=0.8, ls="--")
    ax.set_xticks([m + width * (len(summaries) - 1) / 2 for m in range(len(maps))])
    ax.set_xticklabels(maps)
    ax.set_ylabel(f"Score / {baseline_label}")
    ax.set_title("Normalized score by condition, per map")
    ax.legend(fontsize=8)
    fig.tight_layout()
    out_path = Path(out_path)
    fig.savefig(out_path, dpi=150)
    plt.close(fig)
    return out_path


def plot_sweep(
    summaries: Sequence[ConditionSummary], out_path: str | Path
) -> Path:
    """Pooled score grouped by team size, shaded by the number of
    intention-aware seats."""
    by_size: dict[int, list[ConditionSummary]] = {}
    for s in summaries:
        by_size.setdefault(len(s.roster), []).append(s)
    fig, ax = plt.subplots(figsize=(7, 4))
    x = 0
    ticks, tick_labels = [], []
    cmap = plt.get_cmap("viridis")
    for size in sorted(by_size):
        group = sorted(by_size[size], key=lambda s: sum(r == "tom" for r in s.roster))
        start = x
        for s in group:
            n_tom = sum(r == "tom" for r in s.roster)
            mean, _sd, lo, hi = mean_ci(s.pooled_scores)
            ax.bar(
                x,
                mean,
                yerr=[[mean - lo], [hi - mean]],
                capsize=3,
                color=cmap(n_tom / max(size, 1)),
            )
            x += 1
        ticks.append((start + x - 1) / 2)
        tick_labels.append(f"{size} agents")
        x += 1
    ax.set_xticks(ticks)
    ax.set_xticklabels(tick_labels)
    ax.set_ylabel("Average score")
    ax.set_title("Team size sweep (darker = fewer intention-aware seats)")
    fig.tight_layout()
    out_path = Path(out_path)
    fig.savefig(out_path, dpi=150)
    plt.close(fig)
    return out_path


def render_report(summary_dir: str | Path, out_dir: str | Path) -> list[Path]:
    """Render every applicable figure from the ``*.json`` summaries in a
    directory."""
    summary_dir = Path(summary_dir)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    summaries = [ConditionSummary.load(p) for p in sorted(summary_dir.glob("*.json"))]
    if not summaries:
        raise FileNotFoundError(f"no summary .json files in {summary_dir}")
    written = [plot_condition_means(summaries, out_dir / "condition_means.png")]
    if any(s.label == "nToM-nToM" for s in summaries):
        written.append(
            plot_normalized_by_map(summaries, out_dir / "normalized_by_map.png")
        )
    if len({len(s.roster) for s in summaries}) > 1:
        written.append(plot_sweep(summaries, out_dir / "sweep.png"))
    return written

"""Trend figures for aggregated metrics: one chart per metric column.

Each figure plots the metric against the hierarchy level with one
trajectory per entity, and is written next to the delimited output.
"""

from __future__ import annotations

from pathlib import Path
from typing import Any, Mapping, Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .metrics import CSV_METRIC_COLUMNS


def render_metric_figures(
    agg_rows: Sequence[Mapping[str, Any]], out_dir: str | Path
) -> list[Path]:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    entities = sorted({row["entity"] for row in agg_rows})
    written: list[Path] = []
    for column in CSV_METRIC_COLUMNS:
        fig, ax = plt.subplots(figsize=(6.0, 4.0))
        for entity in entities:
            points = sorted(
                (int(row["level"]), row[column])
                for row in agg_rows
                if row["entity"] == entity and row[column] is not None
            )
            if not points:
                continue
            ax.plot(
                [p[0] for p in points],
                [p[1] for p in points],
                marker="o",
                label=str(entity),
            )
        ax.set_xlabel("level")
        ax.set_ylabel(column)
        ax.set_title(f"{column} across levels")
        ax.grid(True, alpha=0.3)
        if entities:
            ax.legend()
        path = out_dir / f"fig_{column.lower()}.png"
        fig.savefig(path, dpi=120, metadata={"Software": None})
        plt.close(fig)
        written.append(path)
    return written

"""Evaluation reports: JSON with provenance, CSV rows, matplotlib figures."""
from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

REPORT_SCHEMA_VERSION = 1


@dataclass
class MetricReport:
    aggregates: dict
    per_sample: list = field(default_factory=list)
    providers: dict = field(default_factory=dict)
    config: dict = field(default_factory=dict)
    schema_version: int = REPORT_SCHEMA_VERSION

    def to_json(self) -> dict:
        return {"schema_version": self.schema_version,
                "aggregates": self.aggregates,
                "per_sample": self.per_sample,
                "providers": self.providers,
                "config": self.config}


def write_report(report: MetricReport, json_path, csv_path=None,
                 figure_path=None) -> None:
    json_path = Path(json_path)
    json_path.parent.mkdir(parents=True, exist_ok=True)
    with open(json_path, "w") as f:
        json.dump(report.to_json(), f, indent=1, sort_keys=True)
    if csv_path is not None and report.per_sample:
        keys = sorted({k for row in report.per_sample for k in row})
        with open(csv_path, "w", newline="") as f:
            writer = csv.DictWriter(f, fieldnames=keys)
            writer.writeheader()
            writer.writerows(report.per_sample)
    if figure_path is not None:
        render_metric_figure(report.aggregates, figure_path)


def render_metric_figure(aggregates: dict, out_path) -> None:
    names = sorted(k for k, v in aggregates.items()
                   if isinstance(v, (int, float)))
    values = [aggregates[k] for k in names]
    fig, ax = plt.subplots(figsize=(max(4, 1.2 * len(names)), 3.2))
    ax.bar(range(len(names)), values, color="#4878a8")
    ax.set_xticks(range(len(names)))
    ax.set_xticklabels(names, rotation=20, ha="right", fontsize=8)
    for i, v in enumerate(values):
        ax.text(i, v, f"{v:.3g}", ha="center", va="bottom", fontsize=8)
    ax.set_ylabel("value")
    ax.set_title("evaluation aggregates")
    fig.tight_layout()
    fig.savefig(out_path, dpi=120)
    plt.close(fig)


def render_sweep_figure(rows: list, out_path) -> None:
    """rows: {body, hole_fraction, miou} -> restoration quality vs hole size."""
    bodies = sorted({r["body"] for r in rows})
    fig, ax = plt.subplots(figsize=(4.8, 3.4))
    for body in bodies:
        pts = sorted((r["hole_fraction"], r["miou"])
                     for r in rows if r["body"] == body)
        ax.plot([p[0] for p in pts], [p[1] for p in pts],
                marker="o", label=body)
    ax.set_xlabel("hole fraction")
    ax.set_ylabel("mIoU")
    ax.set_ylim(0, 1.02)
    ax.legend()
    ax.set_title("restoration quality vs hole size")
    fig.tight_layout()
    fig.savefig(out_path, dpi=120)
    plt.close(fig)

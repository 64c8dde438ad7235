"""Report materialization: per-kind CSV tables, raw per-utterance JSONL,
run metadata, and optional rendered figures."""

from __future__ import annotations

import csv
import json
import os
from collections import defaultdict

from .errors import EmptyReportSet, IoFailure
from .metrics import MTER_PAIR_NORMALIZATION, TER_NORMALIZATION

CSV_COLUMNS = [
    "condition_id", "k", "layer_or_source_tag", "scale", "window",
    "metric", "value", "n_items",
]


def reports_to_rows(reports):
    rows = []
    for report in reports:
        for metric in sorted(report.values):
            rows.append({
                "condition_id": report.condition_id,
                "k": report.k,
                "layer_or_source_tag": report.source_tag,
                "scale": report.scale,
                "window": report.window,
                "metric": metric,
                "value": report.values[metric],
                "n_items": report.n_items,
            })
    rows.sort(key=lambda r: (r["condition_id"], r["metric"]))
    return rows


def emit_report(reports, raw_records, out_dir, formats=("csv", "jsonl"),
                config=None, figures=False):
    """Write reports and raw records under out_dir; returns written paths."""
    if not reports:
        raise EmptyReportSet("refusing to emit an empty report set")
    os.makedirs(out_dir, exist_ok=True)
    written = []
    by_kind = defaultdict(list)
    for report in reports:
        by_kind[report.kind].append(report)

    try:
        if "csv" in formats:
            for kind in sorted(by_kind):
                path = os.path.join(out_dir, f"{kind}.csv")
                rows = reports_to_rows(by_kind[kind])
                with open(path, "w", newline="", encoding="utf-8") as fh:
                    writer = csv.DictWriter(fh, fieldnames=CSV_COLUMNS)
                    writer.writeheader()
                    for row in rows:
                        out = dict(row)
                        out["value"] = repr(float(row["value"]))
                        out["scale"] = repr(float(row["scale"]))
                        writer.writerow(out)
                written.append(path)
        if "jsonl" in formats:
            path = os.path.join(out_dir, "raw_records.jsonl")
            with open(path, "w", encoding="utf-8") as fh:
                for rec in raw_records:
                    fh.write(json.dumps(rec, sort_keys=True) + "\n")
            written.append(path)

        metadata = {
            "ter_normalization": TER_NORMALIZATION,
            "mter_pair_normalization": MTER_PAIR_NORMALIZATION,
            "zero_variance_comparison": "not significant, p reported as 1.0",
        }
        if config is not None:
            metadata["config"] = config.to_dict()
            metadata["seed"] = config.seed
            metadata["dedup_for_mter"] = config.dedup_for_mter
        path = os.path.join(out_dir, "run_metadata.json")
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(metadata, fh, sort_keys=True, indent=2)
            fh.write("\n")
        written.append(path)
    except OSError as exc:
        raise IoFailure(f"cannot write report to {out_dir}: {exc}") from exc

    if figures:
        from . import plots
        for kind in sorted(by_kind):
            fig_path = os.path.join(out_dir, f"{kind}.png")
            if plots.render_rows(reports_to_rows(by_kind[kind]), kind, fig_path):
                written.append(fig_path)
    return written


def write_comparison_csv(rows, path):
    columns = ["kind", "k", "source_tag", "scale", "window", "metric",
               "mean_a", "mean_b", "t", "p", "significant", "n"]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=columns)
        writer.writeheader()
        for row in rows:
            out = dict(row)
            for key in ("mean_a", "mean_b", "t", "p", "scale"):
                out[key] = repr(float(row[key]))
            writer.writerow(out)


def read_report_csv(path):
    """Parse a per-kind report CSV back into row dicts."""
    rows = []
    with open(path, "r", newline="", encoding="utf-8") as fh:
        for raw in csv.DictReader(fh):
            rows.append({
                "condition_id": raw["condition_id"],
                "k": int(raw["k"]),
                "layer_or_source_tag": raw["layer_or_source_tag"],
                "scale": float(raw["scale"]),
                "window": int(raw["window"]),
                "metric": raw["metric"],
                "value": float(raw["value"]),
                "n_items": int(raw["n_items"]),
            })
    return rows

"""Model comparison tables, training-curve rendering, and the combined
evaluation bundle.

The reporter is strictly a formatting layer: every numeric cell is copied
from the metrics/quality modules, never recomputed, and rendered tables
carry percents at two decimals while CSVs keep full precision.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from .charts import Series, render_line_chart
from .errors import (
    DuplicateModel,
    EmptyInput,
    NonMonotoneEpochs,
    SchemaViolation,
)
from .metrics import ConfusionMatrix, StatsReport, stats_report

EPOCH_KEYS = ("model", "epoch", "train_acc", "train_loss", "val_acc", "val_loss")
SUMMARY_KEYS = ("model", "train_acc", "train_loss", "val_acc", "val_loss",
                "test_acc", "test_loss")
TABLE_COLUMNS = ("Train_Acc", "Train_Loss", "Val_Acc", "Val_Loss",
                 "Test_Acc", "Test_Loss")


@dataclass(frozen=True)
class EpochLogEntry:
    model: str
    epoch: int
    train_acc: float
    train_loss: float
    val_acc: float
    val_loss: float


@dataclass(frozen=True)
class RunSummary:
    model: str
    train_acc: float
    train_loss: float
    val_acc: float
    val_loss: float
    test_acc: float
    test_loss: float


def _check_fraction(value: float, key: str, lineno: int) -> float:
    if not 0.0 <= value <= 1.0:
        raise SchemaViolation(f"line {lineno}: {key} outside [0, 1]: {value}", lineno)
    return value


def _check_loss(value: float, key: str, lineno: int) -> float:
    if value < 0.0:
        raise SchemaViolation(f"line {lineno}: {key} must be >= 0: {value}", lineno)
    return value


def _parse_jsonl(path: str | Path, keys: Sequence[str]):
    for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
        if not line.strip():
            continue
        try:
            doc = json.loads(line)
        except json.JSONDecodeError as exc:
            raise SchemaViolation(f"line {lineno}: invalid JSON: {exc}", lineno) from exc
        if not isinstance(doc, dict):
            raise SchemaViolation(f"line {lineno}: expected an object", lineno)
        for key in keys:
            if key not in doc:
                raise SchemaViolation(f"line {lineno}: missing {key!r}", lineno)
        yield lineno, doc


def load_epoch_logs(path: str | Path) -> list[EpochLogEntry]:
    """Parse + validate an epoch-log JSONL file (strictly increasing epochs)."""
    entries: list[EpochLogEntry] = []
    last_epoch: dict[str, int] = {}
    for lineno, doc in _parse_jsonl(path, EPOCH_KEYS):
        try:
            entry = EpochLogEntry(
                model=str(doc["model"]),
                epoch=int(doc["epoch"]),
                train_acc=_check_fraction(float(doc["train_acc"]), "train_acc", lineno),
                train_loss=_check_loss(float(doc["train_loss"]), "train_loss", lineno),
                val_acc=_check_fraction(float(doc["val_acc"]), "val_acc", lineno),
                val_loss=_check_loss(float(doc["val_loss"]), "val_loss", lineno),
            )
        except (TypeError, ValueError) as exc:
            raise SchemaViolation(f"line {lineno}: {exc}", lineno) from exc
        if entry.epoch < 1:
            raise SchemaViolation(f"line {lineno}: epoch must be >= 1", lineno)
        prev = last_epoch.get(entry.model)
        if prev is not None and entry.epoch <= prev:
            raise NonMonotoneEpochs(
                f"model {entry.model!r}: epoch {entry.epoch} after {prev} (line {lineno})"
            )
        last_epoch[entry.model] = entry.epoch
        entries.append(entry)
    return entries


def load_summaries(path: str | Path) -> list[RunSummary]:
    summaries: list[RunSummary] = []
    for lineno, doc in _parse_jsonl(path, SUMMARY_KEYS):
        try:
            summaries.append(RunSummary(
                model=str(doc["model"]),
                train_acc=_check_fraction(float(doc["train_acc"]), "train_acc", lineno),
                train_loss=_check_loss(float(doc["train_loss"]), "train_loss", lineno),
                val_acc=_check_fraction(float(doc["val_acc"]), "val_acc", lineno),
                val_loss=_check_loss(float(doc["val_loss"]), "val_loss", lineno),
                test_acc=_check_fraction(float(doc["test_acc"]), "test_acc", lineno),
                test_loss=_check_loss(float(doc["test_loss"]), "test_loss", lineno),
            ))
        except (TypeError, ValueError) as exc:
            raise SchemaViolation(f"line {lineno}: {exc}", lineno) from exc
    return summaries


@dataclass
class ComparisonTable:
    """Run summaries ranked by test accuracy (best first)."""

    rows: list[RunSummary]

    @property
    def best(self) -> RunSummary:
        return self.rows[0]

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["Model", *TABLE_COLUMNS, "Best"])
        for i, row in enumerate(self.rows):
            writer.writerow([
                row.model, repr(row.train_acc), repr(row.train_loss),
                repr(row.val_acc), repr(row.val_loss), repr(row.test_acc),
                repr(row.test_loss), "yes" if i == 0 else "",
            ])
        return buf.getvalue()

    def to_markdown(self) -> str:
        lines = ["| Model | " + " | ".join(TABLE_COLUMNS) + " |",
                 "|" + "---|" * (len(TABLE_COLUMNS) + 1)]
        for i, row in enumerate(self.rows):
            name = f"**{row.model}**" if i == 0 else row.model
            lines.append(
                f"| {name} | {100 * row.train_acc:.2f} | {row.train_loss:.4f} "
                f"| {100 * row.val_acc:.2f} | {row.val_loss:.4f} "
                f"| {100 * row.test_acc:.2f} | {row.test_loss:.4f} |"
            )
        return "\n".join(lines) + "\n"


def comparison_table(summaries: Sequence[RunSummary]) -> ComparisonTable:
    """Sort by test_acc desc, then test_loss asc, then model name."""
    if not summaries:
        raise EmptyInput("no run summaries")
    seen = set()
    for s in summaries:
        if s.model in seen:
            raise DuplicateModel(f"duplicate model name: {s.model!r}")
        seen.add(s.model)
    rows = sorted(summaries, key=lambda s: (-s.test_acc, s.test_loss, s.model))
    return ComparisonTable(rows)


def curves_csv(entries: Sequence[EpochLogEntry], kind: str) -> str:
    """CSV twin of the plotted series; full precision for exact round-trips."""
    train_key, val_key = (("train_acc", "val_acc") if kind == "accuracy"
                          else ("train_loss", "val_loss"))
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["model", "epoch", train_key, val_key])
    for e in entries:
        writer.writerow([e.model, e.epoch, repr(getattr(e, train_key)),
                         repr(getattr(e, val_key))])
    return buf.getvalue()


def render_curves(
    entries: Sequence[EpochLogEntry], kind: str
) -> tuple[str, str]:
    """Return (svg document, csv twin) for "accuracy" or "loss" curves."""
    if kind not in ("accuracy", "loss"):
        raise ValueError(f"kind must be 'accuracy' or 'loss', got {kind!r}")
    if not entries:
        raise EmptyInput("no epoch log entries")

    train_key, val_key = (("train_acc", "val_acc") if kind == "accuracy"
                          else ("train_loss", "val_loss"))
    models: dict[str, list[EpochLogEntry]] = {}
    for e in entries:
        models.setdefault(e.model, []).append(e)

    series: list[Series] = []
    for model in sorted(models):
        rows = models[model]
        xs = tuple(float(e.epoch) for e in rows)
        series.append(Series(f"{model} train", xs,
                             tuple(getattr(e, train_key) for e in rows)))
        series.append(Series(f"{model} val", xs,
                             tuple(getattr(e, val_key) for e in rows)))
    svg = render_line_chart(series, "epoch", kind, title=f"{kind} over epochs")
    return svg, curves_csv(entries, kind)


def aggregate_row_csv(stats: StatsReport) -> str:
    """Single headline row: accuracy, macro FPR/FNR/FDR, kappa, MCC, MAE, RMSE."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["accuracy", "fpr", "fnr", "fdr", "kappa", "mcc", "mae", "rmse"])
    t = stats.totals
    writer.writerow([repr(t.accuracy), repr(t.macro_fpr), repr(t.macro_fnr),
                     repr(t.macro_fdr), repr(t.kappa), repr(t.mcc),
                     repr(t.mae), repr(t.rmse)])
    return buf.getvalue()


def evaluation_report(
    cm: ConfusionMatrix,
    summaries: Sequence[RunSummary] | None = None,
    epoch_logs: Sequence[EpochLogEntry] | None = None,
) -> dict[str, str]:
    """Assemble the full document bundle as {filename: content}."""
    stats = stats_report(cm)
    bundle: dict[str, str] = {
        "stats.csv": stats.to_csv(),
        "stats.txt": stats.to_text(),
        "aggregate_row.csv": aggregate_row_csv(stats),
    }
    if summaries:
        table = comparison_table(summaries)
        bundle["comparison.csv"] = table.to_csv()
        bundle["comparison.md"] = table.to_markdown()
    if epoch_logs:
        for kind in ("accuracy", "loss"):
            svg, twin = render_curves(epoch_logs, kind)
            bundle[f"{kind}_curve.svg"] = svg
            bundle[f"{kind}_curve.csv"] = twin
    return bundle


def write_bundle(bundle: dict[str, str], out_dir: str | Path) -> list[Path]:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for name in sorted(bundle):
        path = out_dir / name
        path.write_text(bundle[name])
        written.append(path)
    return written

"""Confusion matrix and the full classification-statistics suite.

All statistics are kept as fractions in [0, 1] (or [-1, 1] for the
correlation-style scores); percent formatting belongs to the report
layer. Degenerate 0/0 ratios evaluate to 0.0 and are flagged rather than
raised so batch evaluation stays total.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import (
    EmptyInput,
    EmptyMatrix,
    IndexOutOfRange,
    SchemaViolation,
    UnknownLabel,
)


@dataclass(frozen=True)
class PredictionRecord:
    sample_id: str
    true_label: str
    pred_label: str
    probs: tuple[float, ...] | None = None


@dataclass
class ConfusionMatrix:
    """Rows = true class, columns = predicted class."""

    labels: list[str]
    counts: np.ndarray  # (K, K) int64

    @property
    def n(self) -> int:
        return int(self.counts.sum())

    @property
    def k(self) -> int:
        return len(self.labels)


@dataclass(frozen=True)
class PerClassCounts:
    tp: int
    fp: int
    fn: int
    tn: int


@dataclass(frozen=True)
class ClassStats:
    precision: float
    recall: float
    specificity: float
    f1: float
    fpr: float
    fnr: float
    fdr: float
    degenerate: frozenset[str] = frozenset()


@dataclass(frozen=True)
class AggregateStats:
    accuracy: float
    macro_precision: float
    macro_recall: float
    macro_f1: float
    macro_specificity: float
    macro_fpr: float
    macro_fnr: float
    macro_fdr: float
    micro_precision: float
    micro_recall: float
    micro_f1: float
    kappa: float
    mcc: float
    mae: float
    rmse: float


def build_confusion(
    records: Sequence[PredictionRecord], labels: Sequence[str]
) -> ConfusionMatrix:
    if not records:
        raise EmptyInput("no prediction records")
    labels = list(labels)
    index = {name: i for i, name in enumerate(labels)}
    counts = np.zeros((len(labels), len(labels)), dtype=np.int64)
    for rec in records:
        if rec.true_label not in index:
            raise UnknownLabel(f"true label {rec.true_label!r} (sample {rec.sample_id})")
        if rec.pred_label not in index:
            raise UnknownLabel(f"predicted label {rec.pred_label!r} (sample {rec.sample_id})")
        counts[index[rec.true_label], index[rec.pred_label]] += 1
    return ConfusionMatrix(labels, counts)


def per_class_counts(cm: ConfusionMatrix, c: int) -> PerClassCounts:
    if not 0 <= c < cm.k:
        raise IndexOutOfRange(f"class index {c} outside 0..{cm.k - 1}")
    tp = int(cm.counts[c, c])
    fp = int(cm.counts[:, c].sum()) - tp
    fn = int(cm.counts[c, :].sum()) - tp
    tn = cm.n - tp - fp - fn
    return PerClassCounts(tp, fp, fn, tn)


def _ratio(num: int, den: int, name: str, degenerate: set[str]) -> float:
    if den == 0:
        degenerate.add(name)
        return 0.0
    return num / den


def class_stats(counts: PerClassCounts) -> ClassStats:
    tp, fp, fn, tn = counts.tp, counts.fp, counts.fn, counts.tn
    degenerate: set[str] = set()
    precision = _ratio(tp, tp + fp, "precision", degenerate)
    recall = _ratio(tp, tp + fn, "recall", degenerate)
    specificity = _ratio(tn, tn + fp, "specificity", degenerate)
    if precision + recall == 0:
        degenerate.add("f1")
        f1 = 0.0
    else:
        f1 = 2 * precision * recall / (precision + recall)
    fpr = _ratio(fp, fp + tn, "fpr", degenerate)
    fnr = _ratio(fn, fn + tp, "fnr", degenerate)
    fdr = _ratio(fp, fp + tp, "fdr", degenerate)
    return ClassStats(precision, recall, specificity, f1, fpr, fnr, fdr,
                      frozenset(degenerate))


def aggregate(cm: ConfusionMatrix) -> AggregateStats:
    """Accuracy, macro/micro averages, kappa, MCC, and index-based MAE/RMSE."""
    n = cm.n
    if n == 0:
        raise EmptyMatrix("confusion matrix has no observations")
    counts = cm.counts.astype(np.float64)
    trace = float(np.trace(counts))
    accuracy = trace / n

    per_class = [class_stats(per_class_counts(cm, c)) for c in range(cm.k)]
    macro = {
        stat: sum(getattr(s, stat) for s in per_class) / cm.k
        for stat in ("precision", "recall", "f1", "specificity", "fpr", "fnr", "fdr")
    }

    tp_sum = trace
    fp_sum = float(counts.sum() - trace)  # column residue == row residue
    micro_p = tp_sum / (tp_sum + fp_sum)
    micro_r = micro_p
    micro_f1 = micro_p

    rowsum = counts.sum(axis=1)
    colsum = counts.sum(axis=0)
    p_o = accuracy
    p_e = float(np.dot(rowsum, colsum)) / (n * n)
    if p_e == 1.0:
        kappa = 1.0 if p_o == 1.0 else 0.0
    else:
        kappa = (p_o - p_e) / (1.0 - p_e)

    mcc_num = n * trace - float(np.dot(rowsum, colsum))
    mcc_den = math.sqrt((n * n - float(np.dot(colsum, colsum)))
                        * (n * n - float(np.dot(rowsum, rowsum))))
    mcc = 0.0 if mcc_den == 0 else mcc_num / mcc_den

    idx = np.arange(cm.k, dtype=np.float64)
    dist = np.abs(idx[:, None] - idx[None, :])
    mae = float((counts * dist).sum()) / n
    rmse = math.sqrt(float((counts * dist * dist).sum()) / n)

    return AggregateStats(
        accuracy=accuracy,
        macro_precision=macro["precision"],
        macro_recall=macro["recall"],
        macro_f1=macro["f1"],
        macro_specificity=macro["specificity"],
        macro_fpr=macro["fpr"],
        macro_fnr=macro["fnr"],
        macro_fdr=macro["fdr"],
        micro_precision=micro_p,
        micro_recall=micro_r,
        micro_f1=micro_f1,
        kappa=kappa,
        mcc=mcc,
        mae=mae,
        rmse=rmse,
    )


def label_error(
    records: Sequence[PredictionRecord], labels: Sequence[str]
) -> tuple[float, float]:
    """MAE / RMSE over class indices in the declared label order."""
    if not records:
        raise EmptyInput("no prediction records")
    index = {name: i for i, name in enumerate(labels)}
    diffs = []
    for rec in records:
        if rec.true_label not in index or rec.pred_label not in index:
            missing = rec.true_label if rec.true_label not in index else rec.pred_label
            raise UnknownLabel(f"label {missing!r} (sample {rec.sample_id})")
        diffs.append(index[rec.true_label] - index[rec.pred_label])
    arr = np.asarray(diffs, dtype=np.float64)
    return float(np.mean(np.abs(arr))), float(math.sqrt(np.mean(arr * arr)))


def prob_error(
    records: Sequence[PredictionRecord], labels: Sequence[str]
) -> tuple[float, float] | None:
    """Probability-based MAE / RMSE against the one-hot truth.

    Only defined when every record carries a probability vector; returns
    None otherwise. Reported alongside (never instead of) the index-based
    variant.
    """
    if not records or any(rec.probs is None for rec in records):
        return None
    index = {name: i for i, name in enumerate(labels)}
    abs_sum = 0.0
    sq_sum = 0.0
    count = 0
    for rec in records:
        if len(rec.probs) != len(labels):
            raise SchemaViolation(
                f"sample {rec.sample_id}: probs length {len(rec.probs)} "
                f"!= class count {len(labels)}"
            )
        onehot = np.zeros(len(labels))
        onehot[index[rec.true_label]] = 1.0
        dev = np.asarray(rec.probs, dtype=np.float64) - onehot
        abs_sum += float(np.abs(dev).sum())
        sq_sum += float((dev * dev).sum())
        count += dev.size
    return abs_sum / count, math.sqrt(sq_sum / count)


def load_predictions(path: str | Path) -> list[PredictionRecord]:
    """Parse a predictions JSONL file, reporting the offending line on error."""
    records = []
    for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
        if not line.strip():
            continue
        try:
            doc = json.loads(line)
        except json.JSONDecodeError as exc:
            raise SchemaViolation(f"line {lineno}: invalid JSON: {exc}", lineno) from exc
        if not isinstance(doc, dict):
            raise SchemaViolation(f"line {lineno}: expected an object", lineno)
        for key in ("sample_id", "true_label", "pred_label"):
            if key not in doc or not isinstance(doc[key], str):
                raise SchemaViolation(f"line {lineno}: missing/invalid {key!r}", lineno)
        probs = doc.get("probs")
        if probs is not None:
            if (not isinstance(probs, list)
                    or not all(isinstance(p, (int, float)) for p in probs)
                    or any(p < 0 or p > 1 for p in probs)):
                raise SchemaViolation(f"line {lineno}: invalid 'probs'", lineno)
            probs = tuple(float(p) for p in probs)
        records.append(PredictionRecord(doc["sample_id"], doc["true_label"],
                                        doc["pred_label"], probs))
    return records


_AGG_FIELDS = (
    "accuracy", "macro_precision", "macro_recall", "macro_f1",
    "macro_specificity", "macro_fpr", "macro_fnr", "macro_fdr",
    "micro_precision", "micro_recall", "micro_f1", "kappa", "mcc",
    "mae", "rmse",
)


def stats_report(cm: ConfusionMatrix) -> "StatsReport":
    per_class = {name: class_stats(per_class_counts(cm, i))
                 for i, name in enumerate(cm.labels)}
    return StatsReport(cm.labels, per_class, aggregate(cm))


@dataclass
class StatsReport:
    """Per-class and aggregate statistics with CSV / aligned-text renderings."""

    labels: list[str]
    per_class: dict[str, ClassStats]
    totals: AggregateStats
    extra_aggregates: dict[str, float] = field(default_factory=dict)

    _CLASS_COLS = ("precision", "recall", "specificity", "f1", "fpr", "fnr", "fdr")

    def aggregate_items(self) -> list[tuple[str, float]]:
        items = [(name, getattr(self.totals, name)) for name in _AGG_FIELDS]
        items.extend(sorted(self.extra_aggregates.items()))
        return items

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["scope", "class", "metric", "value"])
        for name in self.labels:
            stats = self.per_class[name]
            for col in self._CLASS_COLS:
                writer.writerow(["class", name, col, repr(getattr(stats, col))])
            if stats.degenerate:
                writer.writerow(["class", name, "degenerate",
                                 ";".join(sorted(stats.degenerate))])
        for name, value in self.aggregate_items():
            writer.writerow(["aggregate", "", name, repr(value)])
        return buf.getvalue()

    def to_text(self) -> str:
        lines = []
        header = f"{'class':<16}" + "".join(f"{c:>13}" for c in self._CLASS_COLS)
        lines.append(header)
        lines.append("-" * len(header))
        for name in self.labels:
            stats = self.per_class[name]
            row = f"{name:<16}" + "".join(
                f"{100 * getattr(stats, c):>12.2f}%" for c in self._CLASS_COLS)
            lines.append(row)
        lines.append("")
        for name, value in self.aggregate_items():
            if name in ("kappa", "mcc", "mae", "rmse") or name in self.extra_aggregates:
                lines.append(f"{name:<20} {value:>12.4f}")
            else:
                lines.append(f"{name:<20} {100 * value:>11.2f}%")
        return "\n".join(lines) + "\n"

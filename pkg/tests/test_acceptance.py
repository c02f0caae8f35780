"""Acceptance suite: one test per release criterion, each printing a
single PASS line with the pinned tolerance it enforced.

Run with `pytest tests/test_acceptance.py -v -s`.
"""

import csv
import io
import json
import math
import time
from pathlib import Path

import numpy as np
import pytest

from mrikit.cli import main
from mrikit.dataset import (
    DatasetManifest,
    SampleRecord,
    scan_dataset,
    stratified_split,
    save_split,
)
from mrikit.enhance import (
    PipelineConfig,
    clahe,
    clahe_tile_mappings,
    median_filter,
    morphological_opening,
    run_pipeline,
)
from mrikit.image import decode_image
from mrikit.metrics import (
    ConfusionMatrix,
    aggregate,
    build_confusion,
    class_stats,
    load_predictions,
    per_class_counts,
    stats_report,
)
from mrikit.quality import fidelity, ssim
from mrikit.report import EpochLogEntry, RunSummary, comparison_table, render_curves

from conftest import (
    FIVE_RUNS,
    build_corpus,
    write_epoch_logs,
    write_predictions,
    write_summaries,
)
from oracles import (
    binary_mcc,
    histogram_equalize_naive,
    median_filter_naive,
    opening_naive,
    ssim_direct,
    stats_from_pairs,
)


def report(line: str) -> None:
    print(f"\nACCEPTANCE PASS: {line}")


def random_sizes(rng, n, lo=8, hi=64):
    return [(int(rng.integers(lo, hi + 1)), int(rng.integers(lo, hi + 1)))
            for _ in range(n)]


def test_filter_oracles():
    """median (k in {3,5}) and opening (SE in {3,5}) match brute force, < 10 s."""
    rng = np.random.default_rng(101)
    t0 = time.perf_counter()
    for h, w in random_sizes(rng, 50):
        img = rng.integers(0, 256, (h, w), dtype=np.uint8)
        for k in (3, 5):
            assert np.array_equal(median_filter(img, k), median_filter_naive(img, k))
            assert np.array_equal(morphological_opening(img, k), opening_naive(img, k))
    elapsed = time.perf_counter() - t0
    assert elapsed < 10.0, f"filter oracle pass took {elapsed:.1f}s"
    report(f"filter oracles pixel-exact on 50 random images ({elapsed:.1f}s < 10s)")


def test_opening_algebra():
    """opening is exactly idempotent and anti-extensive on 100 random images."""
    rng = np.random.default_rng(202)
    for h, w in random_sizes(rng, 100, lo=4, hi=48):
        img = rng.integers(0, 256, (h, w), dtype=np.uint8)
        s = 3 if (h + w) % 2 else 5
        opened = morphological_opening(img, s)
        assert np.array_equal(morphological_opening(opened, s), opened)
        assert np.all(opened <= img)
    report("opening idempotence + anti-extensivity exact on 100 random images")


def test_clahe_properties():
    """constant invariance, monotone tile mappings, 1x1-tile equalization oracle."""
    rng = np.random.default_rng(303)
    # constant-image invariance across clip settings
    for value, clip in ((0, 2.0), (77, 0.5), (255, 1000.0)):
        img = np.full((32, 32), value, dtype=np.uint8)
        out = clahe(img, PipelineConfig(clahe_tiles_x=4, clahe_tiles_y=4,
                                        clahe_clip=clip))
        assert len(np.unique(out)) == 1

    # monotone non-decreasing per-tile mappings on random images
    for _ in range(10):
        img = rng.integers(0, 256, (64, 64), dtype=np.uint8)
        luts = clahe_tile_mappings(img, PipelineConfig(clahe_tiles_x=8,
                                                       clahe_tiles_y=8,
                                                       clahe_clip=2.0))
        assert np.all(np.diff(luts.astype(np.int32), axis=2) >= 0)
        assert luts.min() >= 0 and luts.max() <= 255

    # 1x1-tile unclipped CLAHE == direct histogram equalization, exactly
    img = np.empty((8, 8), dtype=np.uint8)
    img[:, :4] = 100
    img[:, 4:] = 150
    cfg = PipelineConfig(clahe_tiles_x=1, clahe_tiles_y=1, clahe_clip=1e9)
    out = clahe(img, cfg)
    assert np.all(out[:, :4] == 128) and np.all(out[:, 4:] == 255)
    assert np.array_equal(out, histogram_equalize_naive(img))
    rand = rng.integers(0, 256, (24, 24), dtype=np.uint8)
    assert np.array_equal(clahe(rand, cfg.with_overrides()),
                          histogram_equalize_naive(rand))
    report("CLAHE constant invariance, monotone mappings, 1x1-tile oracle exact "
           "(100/150 -> 128/255)")


def test_quality_identities():
    """ssim(x,x)=1, mse(x,x)=0, rmse^2=mse @1e-9, PSNR 48.1308 +/- 1e-3, oracle @1e-9."""
    rng = np.random.default_rng(404)
    for _ in range(100):
        h, w = int(rng.integers(11, 48)), int(rng.integers(11, 48))
        x = rng.integers(0, 256, (h, w), dtype=np.uint8)
        mse, rmse, psnr = fidelity(x, x)
        assert mse == 0.0 and math.isinf(psnr)
        assert ssim(x, x) == 1.0
        y = rng.integers(0, 256, (h, w), dtype=np.uint8)
        mse, rmse, _ = fidelity(x, y)
        if mse > 0:
            assert abs(rmse * rmse - mse) <= 1e-9 * mse

    a = np.full((16, 16), 100, dtype=np.uint8)
    b = np.full((16, 16), 101, dtype=np.uint8)
    assert fidelity(a, b)[2] == pytest.approx(48.1308, abs=1e-3)

    for _ in range(3):
        x = rng.integers(0, 256, (32, 32), dtype=np.uint8)
        y = rng.integers(0, 256, (32, 32), dtype=np.uint8)
        assert ssim(x, y) == pytest.approx(ssim_direct(x, y), abs=1e-9)
    report("quality identities + PSNR 48.1308 dB +/- 1e-3 + SSIM oracle @ 1e-9")


def test_metrics_oracle():
    """1000 random 4x4 matrices match pair-expansion brute force @ 1e-9."""
    rng = np.random.default_rng(505)
    labels = ["a", "b", "c", "d"]
    checked = 0
    while checked < 1000:
        counts = rng.integers(0, 101, (4, 4)).astype(np.int64)
        if counts.sum() == 0:
            continue
        checked += 1
        cm = ConfusionMatrix(labels, counts)
        agg = aggregate(cm)
        oracle = stats_from_pairs(
            [(i, j) for i in range(4) for j in range(4)
             for _ in range(int(counts[i, j]))], 4)
        assert abs(agg.accuracy - oracle["accuracy"]) <= 1e-9
        assert abs(agg.kappa - oracle["kappa"]) <= 1e-9
        assert abs(agg.mcc - oracle["mcc"]) <= 1e-9
        assert abs(agg.mae - oracle["mae"]) <= 1e-9
        assert abs(agg.rmse - oracle["rmse"]) <= 1e-9
        for name in ("precision", "recall", "f1", "specificity", "fpr", "fnr", "fdr"):
            assert abs(getattr(agg, f"macro_{name}") - oracle["macro"][name]) <= 1e-9
        assert abs(agg.micro_precision - oracle["micro_precision"]) <= 1e-9
        assert abs(agg.micro_f1 - oracle["micro_f1"]) <= 1e-9
        for c in range(4):
            mine = class_stats(per_class_counts(cm, c))
            for name in ("precision", "recall", "specificity", "f1", "fpr", "fnr", "fdr"):
                assert abs(getattr(mine, name) - oracle["per_class"][c][name]) <= 1e-9
        # single-label identity: micro P = micro R = micro F1 = accuracy
        assert abs(agg.micro_precision - agg.accuracy) <= 1e-12
        assert abs(agg.micro_recall - agg.accuracy) <= 1e-12
        assert abs(agg.micro_f1 - agg.accuracy) <= 1e-12

    # binary MCC equals the multi-class formula for K = 2
    for _ in range(200):
        counts = rng.integers(0, 101, (2, 2)).astype(np.int64)
        if counts.sum() == 0:
            continue
        cm = ConfusionMatrix(["a", "b"], counts)
        pc = per_class_counts(cm, 0)
        assert abs(aggregate(cm).mcc - binary_mcc(pc.tp, pc.tn, pc.fp, pc.fn)) <= 1e-12

    hand = aggregate(ConfusionMatrix(["a", "b"],
                                     np.array([[50, 10], [5, 35]], dtype=np.int64)))
    assert hand.accuracy == pytest.approx(0.85, abs=1e-12)
    assert hand.kappa == pytest.approx(0.69388, abs=1e-5)
    assert hand.mcc == pytest.approx(0.69752, abs=1e-5)
    report("metrics oracle on 1000 random 4x4 matrices @ 1e-9; micro identity @ 1e-12; "
           "binary MCC @ 1e-12; hand case 0.85/0.69388/0.69752")


def test_split_contract(tmp_path):
    """class-count floor rule, same-seed byte identity, disjoint/exhaustive."""
    counts = {"glioma": 1621, "meningioma": 1645, "notumor": 2000, "pituitary": 1757}
    samples = [SampleRecord(f"{c}/{i:05d}.jpg", c, 32, 32, "0" * 64)
               for c in sorted(counts) for i in range(counts[c])]
    manifest = DatasetManifest(classes=sorted(counts), samples=samples)
    split = stratified_split(manifest, (0.7, 0.1, 0.2), seed=42)
    got = {c: [0, 0, 0] for c in counts}
    for s in manifest.samples:
        got[s.class_label][("train", "val", "test").index(split.assignment[s.id])] += 1
    expected = {
        "glioma": [1134, 162, 325],
        "meningioma": [1151, 164, 330],
        "notumor": [1400, 200, 400],
        "pituitary": [1229, 175, 353],
    }
    assert got == expected
    totals = [sum(v[i] for v in got.values()) for i in range(3)]
    # per-class test counts sum to 1408: the class sizes total 7023, one more
    # than the oft-quoted 7022 for this corpus
    assert totals == [4914, 701, 1408]

    p1, p2 = tmp_path / "s1.json", tmp_path / "s2.json"
    save_split(stratified_split(manifest, (0.7, 0.1, 0.2), seed=42), p1)
    save_split(stratified_split(manifest, (0.7, 0.1, 0.2), seed=42), p2)
    assert p1.read_bytes() == p2.read_bytes()

    rng = np.random.default_rng(606)
    for _ in range(100):
        rand_counts = {f"c{i}": int(rng.integers(1, 60))
                       for i in range(int(rng.integers(1, 6)))}
        m = DatasetManifest(
            classes=sorted(rand_counts),
            samples=[SampleRecord(f"{c}/{i}.png", c, 8, 8, "0" * 64)
                     for c in sorted(rand_counts) for i in range(rand_counts[c])])
        sp = stratified_split(m, (0.7, 0.1, 0.2), seed=int(rng.integers(1 << 63)))
        ids = {s.id for s in m.samples}
        parts = [set(sp.partition_ids(p)) for p in ("train", "val", "test")]
        assert parts[0] | parts[1] | parts[2] == ids
        assert len(parts[0]) + len(parts[1]) + len(parts[2]) == len(ids)
    report("split contract: floor-rule per-class counts (4914/701/1408 over 7023), "
           "same-seed byte-identical, disjoint+exhaustive on 100 random manifests")


def _tree_bytes(root: Path) -> dict[str, bytes]:
    return {p.relative_to(root).as_posix(): p.read_bytes()
            for p in sorted(root.rglob("*")) if p.is_file()}


def test_end_to_end_determinism(tmp_path):
    """`all` twice on a 12-image fixture is byte-identical; cells re-derivable."""
    corpus = build_corpus(tmp_path / "corpus")
    manifest = scan_dataset(corpus)
    preds = tmp_path / "preds.jsonl"
    write_predictions(preds, manifest.samples)
    summaries = tmp_path / "summaries.jsonl"
    epochs = tmp_path / "epochs.jsonl"
    write_summaries(summaries)
    write_epoch_logs(epochs)

    outs = []
    for name in ("run1", "run2"):
        out = tmp_path / name
        rc = main(["all", "--root", str(corpus), "--out", str(out),
                   "--ratios", "0.5,0.25,0.25", "--seed", "9",
                   "--clahe-tiles", "4,4",
                   "--predictions", str(preds),
                   "--summaries", str(summaries),
                   "--epoch-logs", str(epochs)])
        assert rc == 0
        outs.append(out)
    assert _tree_bytes(outs[0]) == _tree_bytes(outs[1])

    out = outs[0]
    for name in ("manifest.json", "split.json", "quality.csv", "metrics.csv",
                 "traces.json"):
        assert (out / name).is_file(), name
    assert len(list((out / "processed").rglob("*.png"))) == 12

    # every metrics.csv cell re-derives from the metrics module to 1e-12
    records = load_predictions(preds)
    labels = sorted({r.true_label for r in records} | {r.pred_label for r in records})
    rep = stats_report(build_confusion(records, labels))
    cells = {}
    for row in csv.DictReader(io.StringIO((out / "metrics.csv").read_text())):
        cells[(row["scope"], row["class"], row["metric"])] = row["value"]
    for cname in labels:
        stats = rep.per_class[cname]
        for metric in ("precision", "recall", "specificity", "f1", "fpr", "fnr", "fdr"):
            assert abs(float(cells[("class", cname, metric)])
                       - getattr(stats, metric)) <= 1e-12
    for metric, value in rep.aggregate_items():
        assert abs(float(cells[("aggregate", "", metric)]) - value) <= 1e-12

    # every quality.csv row re-derives from the pipeline + quality modules
    cfg = PipelineConfig(clahe_tiles_x=4, clahe_tiles_y=4)
    quality_rows = {row["image_id"]: row for row in
                    csv.DictReader(io.StringIO((out / "quality.csv").read_text()))}
    assert len(quality_rows) == 12
    for sample in manifest.samples[:4]:
        src = decode_image((corpus / sample.id).read_bytes())
        processed, _ = run_pipeline(src, cfg)
        mse, rmse, psnr = fidelity(src, processed)
        row = quality_rows[sample.id]
        assert abs(float(row["mse"]) - mse) <= 1e-12
        assert abs(float(row["ssim"]) - ssim(src, processed)) <= 1e-12
    report("end-to-end determinism: byte-identical reruns; report cells "
           "re-derivable @ 1e-12")


def test_report_shape():
    """five synthetic runs render best-first; curve CSV twin round-trips exactly."""
    table = comparison_table([RunSummary(*run) for run in FIVE_RUNS])
    assert table.best.model == "ResNet50"
    assert table.best.test_acc == max(r[5] for r in FIVE_RUNS)
    csv_rows = table.to_csv().strip().splitlines()
    assert csv_rows[0] == "Model,Train_Acc,Train_Loss,Val_Acc,Val_Loss,Test_Acc,Test_Loss,Best"
    assert len(csv_rows) == 6
    assert csv_rows[1].startswith("ResNet50") and csv_rows[1].endswith("yes")

    entries = []
    rng = np.random.default_rng(707)
    acc = 0.3
    for e in range(1, 101):
        acc = min(0.999, acc + float(rng.random()) * 0.01)
        entries.append(EpochLogEntry("ResNet50", e, acc, 1.0 / e,
                                     max(0.0, acc - 0.02), 1.1 / e))
    svg, twin = render_curves(entries, "accuracy")
    assert ">100<" in svg
    parsed = list(csv.DictReader(io.StringIO(twin)))
    assert [int(r["epoch"]) for r in parsed] == list(range(1, 101))
    for row, entry in zip(parsed, entries):
        assert float(row["train_acc"]) == entry.train_acc
        assert float(row["val_acc"]) == entry.val_acc
    report("report shape: best-first ranking over five runs; 100-epoch curve "
           "CSV twin round-trips exactly")

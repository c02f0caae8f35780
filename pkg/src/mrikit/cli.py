"""Command-line driver: scan -> split -> preprocess -> verify -> evaluate
-> report, runnable per stage or end to end via `all`.

Exit codes: 0 success, 1 stage failure (single-line diagnostic on
stderr), 2 usage error. Given the same argv, input tree and seed, all
emitted files are byte-identical between runs.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
import warnings
from pathlib import Path

from . import dataset as ds
from . import metrics as mx
from . import report as rp
from .enhance import PipelineConfig, run_pipeline_stages
from .errors import EmptyInput, ToolError
from .image import decode_image, encode_image, resize_bilinear
from .quality import reports_to_csv, verify_batch

PROG = "mrikit"
VERIFY_STAGES = ("median", "opening", "clahe", "final")


def _read_config_file(path: str) -> dict[str, str]:
    """Parse the `key = value` config format (# comments, blank lines ok)."""
    values: dict[str, str] = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ToolError(f"config {path}:{lineno}: expected 'key = value'")
        key, value = line.split("=", 1)
        values[key.strip()] = value.strip()
    return values


def _pipeline_config(args) -> PipelineConfig:
    """Defaults <- config file <- explicit flags (flags win)."""
    cfg = PipelineConfig()
    if getattr(args, "config", None):
        file_vals = _read_config_file(args.config)
        mapping = {
            "median": ("median_kernel", int),
            "se": ("opening_se_side", int),
            "clahe-clip": ("clahe_clip", float),
        }
        overrides = {}
        for key, (field, conv) in mapping.items():
            if key in file_vals:
                overrides[field] = conv(file_vals[key])
        if "clahe-tiles" in file_vals:
            tx, ty = (int(v) for v in file_vals["clahe-tiles"].split(","))
            overrides["clahe_tiles_x"] = tx
            overrides["clahe_tiles_y"] = ty
        if "clahe" in file_vals:
            overrides["clahe_enabled"] = file_vals["clahe"].lower() in ("on", "true", "1", "yes")
        cfg = cfg.with_overrides(**overrides)
    flag_overrides = {}
    if getattr(args, "median", None) is not None:
        flag_overrides["median_kernel"] = args.median
    if getattr(args, "se", None) is not None:
        flag_overrides["opening_se_side"] = args.se
    if getattr(args, "clahe_clip", None) is not None:
        flag_overrides["clahe_clip"] = args.clahe_clip
    if getattr(args, "clahe_tiles", None) is not None:
        tx, ty = (int(v) for v in args.clahe_tiles.split(","))
        flag_overrides["clahe_tiles_x"] = tx
        flag_overrides["clahe_tiles_y"] = ty
    if getattr(args, "no_clahe", False):
        flag_overrides["clahe_enabled"] = False
    return cfg.with_overrides(**flag_overrides).validated()


def _parse_resize(text: str | None) -> tuple[int, int] | None:
    if text is None:
        return None
    w, h = (int(v) for v in text.split(","))
    return w, h


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog=PROG,
        description="Grayscale MRI preprocessing, verification, splitting "
                    "and classifier-evaluation toolkit.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("scan", help="ingest a directory-per-class corpus")
    p.add_argument("--root", required=True)
    p.add_argument("--out", required=True)

    p = sub.add_parser("split", help="seeded stratified train/val/test split")
    p.add_argument("--manifest", required=True)
    p.add_argument("--ratios", default="0.7,0.1,0.2",
                   help="t,v,s triple or TRAIN:TEST shorthand")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--materialize", help="copy files into DIR/{train,val,test}/")
    p.add_argument("--root", help="corpus root (required with --materialize)")

    p = sub.add_parser("preprocess", help="run the enhancement chain")
    p.add_argument("--manifest", required=True)
    p.add_argument("--root", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--config", help="key = value config file")
    p.add_argument("--median", type=int)
    p.add_argument("--se", type=int)
    p.add_argument("--clahe-tiles", metavar="X,Y")
    p.add_argument("--clahe-clip", type=float)
    p.add_argument("--no-clahe", action="store_true")
    p.add_argument("--resize", metavar="W,H",
                   help="resize inputs before the chain")
    p.add_argument("--save-stages", action="store_true",
                   help="also write per-stage outputs")

    p = sub.add_parser("verify", help="fidelity metrics for image pairs")
    p.add_argument("--pairs", required=True,
                   help="CSV with header image_id,ref,test (file paths)")
    p.add_argument("--out", required=True)

    p = sub.add_parser("evaluate", help="classification statistics from predictions")
    p.add_argument("--predictions", required=True)
    p.add_argument("--labels", help="comma-separated ordered class list")
    p.add_argument("--out", required=True)

    p = sub.add_parser("report", help="comparison table, curves, stats bundle")
    p.add_argument("--summaries")
    p.add_argument("--epoch-logs")
    p.add_argument("--predictions")
    p.add_argument("--labels")
    p.add_argument("--out", required=True)

    p = sub.add_parser("all", help="scan, split, preprocess, verify, evaluate, report")
    p.add_argument("--root", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--ratios", default="0.7,0.1,0.2")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--config")
    p.add_argument("--median", type=int)
    p.add_argument("--se", type=int)
    p.add_argument("--clahe-tiles", metavar="X,Y")
    p.add_argument("--clahe-clip", type=float)
    p.add_argument("--no-clahe", action="store_true")
    p.add_argument("--resize", metavar="W,H")
    p.add_argument("--verify-stage", choices=VERIFY_STAGES, default="final")
    p.add_argument("--materialize", action="store_true",
                   help="also copy split trees under OUT/split/")
    p.add_argument("--predictions")
    p.add_argument("--summaries")
    p.add_argument("--epoch-logs")
    return parser


def parse_args(argv=None) -> argparse.Namespace:
    return build_parser().parse_args(argv)


def _emit_warnings(caught) -> None:
    for w in caught:
        print(f"{PROG}: warning: {w.message}", file=sys.stderr)


def cmd_scan(args) -> int:
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        manifest = ds.scan_dataset(args.root)
    _emit_warnings(caught)
    ds.save_manifest(manifest, args.out)
    counts = ", ".join(f"{k}: {v}" for k, v in manifest.counts.items())
    print(f"scanned {len(manifest.samples)} samples ({counts}) -> {args.out}")
    return 0


def cmd_split(args) -> int:
    manifest = ds.load_manifest(args.manifest)
    ratios = ds.parse_ratios(args.ratios)
    split = ds.stratified_split(manifest, ratios, args.seed)
    ds.save_split(split, args.out)
    sizes = {p: len(split.partition_ids(p)) for p in ds.PARTITIONS}
    print(f"split {sizes['train']}/{sizes['val']}/{sizes['test']} -> {args.out}")
    if args.materialize:
        if not args.root:
            raise ToolError("--materialize requires --root")
        counts = ds.materialize_split(split, manifest, args.root, args.materialize)
        total = sum(sum(c.values()) for c in counts.values())
        print(f"materialized {total} files under {args.materialize}")
    return 0


def _preprocess_tree(
    manifest: ds.DatasetManifest,
    root: Path,
    out_dir: Path,
    cfg: PipelineConfig,
    resize: tuple[int, int] | None,
    save_stages: bool = False,
) -> tuple[dict[str, dict[str, "object"]], dict]:
    """Run the chain over every manifest sample; returns stage buffers + traces."""
    stage_outputs: dict[str, dict[str, object]] = {}
    traces = {}
    for sample in manifest.samples:
        img = decode_image((root / sample.id).read_bytes())
        if resize is not None and img.shape != (resize[1], resize[0]):
            print(f"{PROG}: warning: resizing {sample.id} "
                  f"{img.shape[1]}x{img.shape[0]} -> {resize[0]}x{resize[1]}",
                  file=sys.stderr)
            img = resize_bilinear(img, resize[0], resize[1])
        outputs, trace = run_pipeline_stages(img, cfg)
        final_stage = trace.stages[-1].stage
        dst = out_dir / Path(sample.id).with_suffix(".png")
        dst.parent.mkdir(parents=True, exist_ok=True)
        dst.write_bytes(encode_image(outputs[final_stage], "png"))
        if save_stages:
            for stage, buf in outputs.items():
                sdst = out_dir / "stages" / stage / Path(sample.id).with_suffix(".png")
                sdst.parent.mkdir(parents=True, exist_ok=True)
                sdst.write_bytes(encode_image(buf, "png"))
        stage_outputs[sample.id] = {"input": img, **outputs, "final": outputs[final_stage]}
        traces[sample.id] = trace.to_jsonable()
    return stage_outputs, traces


def cmd_preprocess(args) -> int:
    manifest = ds.load_manifest(args.manifest)
    cfg = _pipeline_config(args)
    out_dir = Path(args.out)
    _, traces = _preprocess_tree(manifest, Path(args.root), out_dir, cfg,
                                 _parse_resize(args.resize), args.save_stages)
    (out_dir / "traces.json").write_text(
        json.dumps(traces, indent=2, sort_keys=True) + "\n")
    print(f"processed {len(manifest.samples)} images -> {out_dir}")
    return 0


def cmd_verify(args) -> int:
    pairs = []
    with open(args.pairs, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or not {"image_id", "ref", "test"} <= set(reader.fieldnames):
            raise ToolError("pairs CSV must have header image_id,ref,test")
        for row in reader:
            ref = decode_image(Path(row["ref"]).read_bytes())
            test = decode_image(Path(row["test"]).read_bytes())
            pairs.append((row["image_id"], ref, test))
    reports = verify_batch(pairs)
    Path(args.out).write_text(reports_to_csv(reports))
    print(f"verified {len(reports)} pairs -> {args.out}")
    return 0


def _labels_for(records, labels_arg: str | None) -> list[str]:
    if labels_arg:
        return [name.strip() for name in labels_arg.split(",") if name.strip()]
    return sorted({r.true_label for r in records} | {r.pred_label for r in records})


def cmd_evaluate(args) -> int:
    records = mx.load_predictions(args.predictions)
    if not records:
        raise EmptyInput("predictions file is empty")
    labels = _labels_for(records, args.labels)
    cm = mx.build_confusion(records, labels)
    stats = mx.stats_report(cm)
    probs = mx.prob_error(records, labels)
    if probs is not None:
        stats.extra_aggregates["prob_mae"] = probs[0]
        stats.extra_aggregates["prob_rmse"] = probs[1]
    Path(args.out).write_text(stats.to_csv())
    print(f"evaluated {len(records)} predictions over {len(labels)} classes "
          f"-> {args.out} (accuracy {stats.totals.accuracy:.4f})")
    return 0


def cmd_report(args) -> int:
    if not (args.summaries or args.epoch_logs or args.predictions):
        raise ToolError("report needs --summaries, --epoch-logs or --predictions")
    out_dir = Path(args.out)
    bundle: dict[str, str] = {}
    if args.predictions:
        records = mx.load_predictions(args.predictions)
        if not records:
            raise EmptyInput("predictions file is empty")
        labels = _labels_for(records, args.labels)
        cm = mx.build_confusion(records, labels)
        stats = mx.stats_report(cm)
        bundle["stats.csv"] = stats.to_csv()
        bundle["stats.txt"] = stats.to_text()
        bundle["aggregate_row.csv"] = rp.aggregate_row_csv(stats)
    if args.summaries:
        table = rp.comparison_table(rp.load_summaries(args.summaries))
        bundle["comparison.csv"] = table.to_csv()
        bundle["comparison.md"] = table.to_markdown()
    if args.epoch_logs:
        entries = rp.load_epoch_logs(args.epoch_logs)
        for kind in ("accuracy", "loss"):
            svg, twin = rp.render_curves(entries, kind)
            bundle[f"{kind}_curve.svg"] = svg
            bundle[f"{kind}_curve.csv"] = twin
    written = rp.write_bundle(bundle, out_dir)
    print(f"report bundle: {len(written)} files -> {out_dir}")
    return 0


def cmd_all(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    # scan
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        manifest = ds.scan_dataset(args.root)
    _emit_warnings(caught)
    ds.save_manifest(manifest, out / "manifest.json")

    # split
    split = ds.stratified_split(manifest, ds.parse_ratios(args.ratios), args.seed)
    ds.save_split(split, out / "split.json")
    if args.materialize:
        ds.materialize_split(split, manifest, args.root, out / "split")

    # preprocess
    cfg = _pipeline_config(args)
    stage_outputs, traces = _preprocess_tree(
        manifest, Path(args.root), out / "processed", cfg,
        _parse_resize(args.resize))
    (out / "traces.json").write_text(
        json.dumps(traces, indent=2, sort_keys=True) + "\n")

    # verify: chain input vs the selected stage output
    stage = args.verify_stage
    if stage == "clahe" and not cfg.clahe_enabled:
        raise ToolError("--verify-stage clahe with CLAHE disabled")
    pairs = [(sid, bufs["input"], bufs["final" if stage == "final" else stage])
             for sid, bufs in sorted(stage_outputs.items())]
    (out / "quality.csv").write_text(reports_to_csv(verify_batch(pairs)))

    # evaluate + report (when interchange files are supplied)
    ran = ["scan", "split", "preprocess", "verify"]
    if args.predictions:
        eval_args = argparse.Namespace(predictions=args.predictions, labels=None,
                                       out=str(out / "metrics.csv"))
        cmd_evaluate(eval_args)
        ran.append("evaluate")
    if args.predictions or args.summaries or args.epoch_logs:
        report_args = argparse.Namespace(
            summaries=args.summaries, epoch_logs=args.epoch_logs,
            predictions=args.predictions, labels=None, out=str(out / "report"))
        cmd_report(report_args)
        ran.append("report")
    print(f"pipeline complete ({' -> '.join(ran)}) -> {out}")
    return 0


_COMMANDS = {
    "scan": cmd_scan,
    "split": cmd_split,
    "preprocess": cmd_preprocess,
    "verify": cmd_verify,
    "evaluate": cmd_evaluate,
    "report": cmd_report,
    "all": cmd_all,
}


def execute(args) -> int:
    try:
        return _COMMANDS[args.command](args)
    except ToolError as exc:
        print(f"{PROG}: error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"{PROG}: error: IoFailure: {exc}", file=sys.stderr)
        return 1


def main(argv=None) -> int:
    return execute(parse_args(argv))


if __name__ == "__main__":
    sys.exit(main())

"""Corpus ingestion and seeded stratified splitting.

Layout contract: `<root>/<class_name>/<image files>`. Classes are the
immediate subdirectories, ordered lexicographically so label indices are
stable across runs and machines. Splitting shuffles each class with a
Fisher-Yates pass driven by a SplitMix64 stream that is domain-separated
per class name, then assigns floor(r_train*n) / floor(r_val*n) /
remainder samples to train / val / test.
"""

from __future__ import annotations

import hashlib
import json
import math
import shutil
import warnings
from dataclasses import dataclass, field
from pathlib import Path

from .errors import BadRatios, EmptyManifest, IoFailure, MalformedImage, NoClassesFound, UnsupportedFormat
from .image import decode_image

PARTITIONS = ("train", "val", "test")

# extensions probed during scan; anything else is ignored silently
IMAGE_SUFFIXES = {".jpg", ".jpeg", ".png", ".bmp"}


class ScanWarning(UserWarning):
    """Non-fatal dataset scan findings (skipped files, empty classes)."""


@dataclass(frozen=True)
class SampleRecord:
    id: str           # posix relative path, unique within the manifest
    class_label: str
    width: int
    height: int
    content_hash: str  # sha256 hex of the file bytes


@dataclass
class DatasetManifest:
    classes: list[str]
    samples: list[SampleRecord] = field(default_factory=list)

    @property
    def counts(self) -> dict[str, int]:
        c = {name: 0 for name in self.classes}
        for s in self.samples:
            c[s.class_label] += 1
        return c

    def ids_by_class(self) -> dict[str, list[str]]:
        out: dict[str, list[str]] = {name: [] for name in self.classes}
        for s in self.samples:
            out[s.class_label].append(s.id)
        return out

    def to_jsonable(self) -> dict:
        return {
            "classes": list(self.classes),
            "samples": [
                {"id": s.id, "class": s.class_label, "width": s.width,
                 "height": s.height, "sha256": s.content_hash}
                for s in self.samples
            ],
        }

    @classmethod
    def from_jsonable(cls, doc: dict) -> "DatasetManifest":
        samples = [
            SampleRecord(d["id"], d["class"], int(d["width"]), int(d["height"]), d["sha256"])
            for d in doc["samples"]
        ]
        return cls(classes=list(doc["classes"]), samples=samples)


@dataclass
class SplitAssignment:
    ratios: tuple[float, float, float]
    seed: int
    assignment: dict[str, str]  # sample id -> train|val|test

    def partition_ids(self, partition: str) -> list[str]:
        return sorted(i for i, p in self.assignment.items() if p == partition)

    def to_jsonable(self) -> dict:
        return {
            "seed": self.seed,
            "ratios": list(self.ratios),
            "assignment": {k: self.assignment[k] for k in sorted(self.assignment)},
        }

    @classmethod
    def from_jsonable(cls, doc: dict) -> "SplitAssignment":
        r = doc["ratios"]
        return cls((float(r[0]), float(r[1]), float(r[2])), int(doc["seed"]),
                   dict(doc["assignment"]))


def scan_dataset(root: str | Path) -> DatasetManifest:
    """Walk a directory-per-class corpus into a manifest.

    Undecodable files are reported through a ScanWarning and skipped;
    empty class directories warn but remain in the class list.
    """
    root = Path(root)
    if not root.is_dir():
        raise NoClassesFound(f"dataset root does not exist: {root}")
    class_dirs = sorted(p for p in root.iterdir() if p.is_dir())
    if not class_dirs:
        raise NoClassesFound(f"no class subdirectories under {root}")

    manifest = DatasetManifest(classes=[p.name for p in class_dirs])
    for cdir in class_dirs:
        n_before = len(manifest.samples)
        for path in sorted(cdir.iterdir()):
            if not path.is_file() or path.suffix.lower() not in IMAGE_SUFFIXES:
                continue
            data = path.read_bytes()
            try:
                img = decode_image(data)
            except (MalformedImage, UnsupportedFormat) as exc:
                warnings.warn(f"skipping undecodable file {path}: {exc}", ScanWarning)
                continue
            rel = path.relative_to(root).as_posix()
            manifest.samples.append(SampleRecord(
                id=rel,
                class_label=cdir.name,
                width=img.shape[1],
                height=img.shape[0],
                content_hash=hashlib.sha256(data).hexdigest(),
            ))
        if len(manifest.samples) == n_before:
            warnings.warn(f"class directory is empty: {cdir}", ScanWarning)
    manifest.samples.sort(key=lambda s: s.id)
    return manifest


class SplitMix64:
    """Tiny 64-bit deterministic generator (SplitMix64), bit-stable forever."""

    MASK = (1 << 64) - 1

    def __init__(self, seed: int):
        self.state = seed & self.MASK

    def next(self) -> int:
        self.state = (self.state + 0x9E3779B97F4A7C15) & self.MASK
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & self.MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & self.MASK
        return z ^ (z >> 31)


def _class_stream(seed: int, class_name: str) -> SplitMix64:
    digest = hashlib.sha256(f"{seed}:{class_name}".encode("utf-8")).digest()
    return SplitMix64(int.from_bytes(digest[:8], "big"))


def _fisher_yates(items: list[str], rng: SplitMix64) -> None:
    for i in range(len(items) - 1, 0, -1):
        j = rng.next() % (i + 1)
        items[i], items[j] = items[j], items[i]


def parse_ratios(text: str) -> tuple[float, float, float]:
    """Parse "t,v,s" triples or "90:10"-style train:test shorthands.

    "70:30" maps to (0.7, 0.1, 0.2): the source protocol defines the 30%
    remainder as 10% validation + 20% test. Other colon pairs keep
    validation at zero.
    """
    text = text.strip()
    if ":" in text:
        parts = [float(p) for p in text.split(":")]
        if len(parts) != 2:
            raise BadRatios(f"expected TRAIN:TEST shorthand, got {text!r}")
        train, rest = parts[0] / 100.0, parts[1] / 100.0
        if text.replace(" ", "") == "70:30":
            return (0.7, 0.1, 0.2)
        return (train, 0.0, rest)
    parts = [float(p) for p in text.split(",")]
    if len(parts) != 3:
        raise BadRatios(f"expected three comma-separated ratios, got {text!r}")
    return (parts[0], parts[1], parts[2])


def stratified_split(
    manifest: DatasetManifest,
    ratios: tuple[float, float, float],
    seed: int,
) -> SplitAssignment:
    """Per-class shuffle + floor-rule assignment; fully deterministic."""
    if not manifest.samples:
        raise EmptyManifest("manifest has no samples")
    r_train, r_val, r_test = (float(r) for r in ratios)
    if r_train <= 0 or r_test <= 0 or r_val < 0:
        raise BadRatios(f"ratios must be positive (val may be 0): {ratios}")
    if abs((r_train + r_val + r_test) - 1.0) > 1e-9:
        raise BadRatios(f"ratios must sum to 1: {ratios}")

    assignment: dict[str, str] = {}
    for class_name, ids in manifest.ids_by_class().items():
        ids = sorted(ids)
        _fisher_yates(ids, _class_stream(seed, class_name))
        n = len(ids)
        # +1e-9 guards against representation noise in r*n (contract is the
        # mathematical floor of the exact product)
        n_train = math.floor(r_train * n + 1e-9)
        n_val = math.floor(r_val * n + 1e-9)
        for sid in ids[:n_train]:
            assignment[sid] = "train"
        for sid in ids[n_train:n_train + n_val]:
            assignment[sid] = "val"
        for sid in ids[n_train + n_val:]:
            assignment[sid] = "test"
    return SplitAssignment((r_train, r_val, r_test), int(seed), assignment)


def materialize_split(
    assignment: SplitAssignment,
    manifest: DatasetManifest,
    src_root: str | Path,
    out_root: str | Path,
) -> dict[str, dict[str, int]]:
    """Copy files into out_root/{train,val,test}/<class>/; returns counts."""
    src_root = Path(src_root)
    out_root = Path(out_root)
    by_id = {s.id: s for s in manifest.samples}
    counts: dict[str, dict[str, int]] = {p: {c: 0 for c in manifest.classes}
                                         for p in PARTITIONS}
    try:
        for sid in sorted(assignment.assignment):
            partition = assignment.assignment[sid]
            record = by_id[sid]
            src = src_root / sid
            dst = out_root / partition / record.class_label / Path(sid).name
            dst.parent.mkdir(parents=True, exist_ok=True)
            shutil.copyfile(src, dst)
            counts[partition][record.class_label] += 1
    except OSError as exc:
        raise IoFailure(f"failed to materialize split: {exc}") from exc
    return counts


def save_manifest(manifest: DatasetManifest, path: str | Path) -> None:
    Path(path).write_text(json.dumps(manifest.to_jsonable(), indent=2,
                                     sort_keys=True) + "\n")


def load_manifest(path: str | Path) -> DatasetManifest:
    return DatasetManifest.from_jsonable(json.loads(Path(path).read_text()))


def save_split(split: SplitAssignment, path: str | Path) -> None:
    Path(path).write_text(json.dumps(split.to_jsonable(), indent=2,
                                     sort_keys=True) + "\n")


def load_split(path: str | Path) -> SplitAssignment:
    return SplitAssignment.from_jsonable(json.loads(Path(path).read_text()))

import json
from pathlib import Path

import numpy as np
import pytest
from PIL import Image

CLASSES = ("glioma", "meningioma", "notumor", "pituitary")


def random_image(rng: np.random.Generator, h: int, w: int) -> np.ndarray:
    return rng.integers(0, 256, (h, w), dtype=np.uint8)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240811)


def _write_image(path: Path, arr: np.ndarray, fmt: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    Image.fromarray(arr, mode="L").save(path, format=fmt)


def build_corpus(root: Path, per_class: int = 3, size: int = 32,
                 seed: int = 7, classes=CLASSES) -> Path:
    """Directory-per-class corpus of deterministic random grayscale images."""
    rng = np.random.default_rng(seed)
    formats = ["JPEG", "PNG", "BMP"]
    for ci, cname in enumerate(classes):
        for i in range(per_class):
            arr = random_image(rng, size, size)
            fmt = formats[(ci + i) % len(formats)]
            suffix = {"JPEG": ".jpg", "PNG": ".png", "BMP": ".bmp"}[fmt]
            _write_image(root / cname / f"img_{i:03d}{suffix}", arr, fmt)
    return root


@pytest.fixture
def corpus(tmp_path) -> Path:
    return build_corpus(tmp_path / "corpus")


def write_predictions(path: Path, manifest_samples, flip_every: int = 5,
                      classes=CLASSES) -> int:
    """Predictions JSONL for a manifest: mostly correct, every Nth flipped."""
    lines = []
    for i, sample in enumerate(manifest_samples):
        true = sample.class_label
        if i % flip_every == flip_every - 1:
            pred = classes[(classes.index(true) + 1) % len(classes)]
        else:
            pred = true
        lines.append(json.dumps({
            "sample_id": sample.id, "true_label": true, "pred_label": pred,
        }))
    path.write_text("\n".join(lines) + "\n")
    return len(lines)


FIVE_RUNS = [
    # model, train_acc, train_loss, val_acc, val_loss, test_acc, test_loss
    ("VGG19", 0.9663, 0.21, 0.9593, 0.21, 0.9522, 0.25),
    ("VGG16", 0.9621, 0.20, 0.9695, 0.12, 0.9612, 0.20),
    ("DenseNet121", 0.9741, 0.19, 0.9723, 0.28, 0.9721, 0.31),
    ("ResNet50", 0.9998, 0.23, 0.9954, 0.32, 0.9954, 0.37),
    ("YOLOv4", 0.9123, 0.39, 0.9121, 0.392, 0.9121, 0.94),
]


def write_summaries(path: Path, runs=FIVE_RUNS) -> None:
    keys = ("model", "train_acc", "train_loss", "val_acc", "val_loss",
            "test_acc", "test_loss")
    path.write_text("\n".join(json.dumps(dict(zip(keys, run))) for run in runs) + "\n")


def write_epoch_logs(path: Path, models=("ResNet50", "VGG16"), epochs: int = 5) -> None:
    lines = []
    for m_i, model in enumerate(models):
        for e in range(1, epochs + 1):
            lines.append(json.dumps({
                "model": model,
                "epoch": e,
                "train_acc": round(0.5 + 0.08 * e + 0.01 * m_i, 6),
                "train_loss": round(1.0 / e, 6),
                "val_acc": round(0.45 + 0.08 * e + 0.01 * m_i, 6),
                "val_loss": round(1.2 / e, 6),
            }))
    path.write_text("\n".join(lines) + "\n")

"""Full-reference image fidelity metrics: MSE, RMSE, PSNR and SSIM.

PSNR uses the 8-bit peak (255) and reports math.inf for identical images.
SSIM is the canonical 11x11 Gaussian-window (sigma 1.5) variant with
C1=(0.01*255)^2, C2=(0.03*255)^2, aggregated over the fully-overlapping
(valid) region only, so it carries no border policy of its own.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from scipy.ndimage import correlate1d

from .errors import DimensionMismatch, ImageTooSmall
from .validation import check_gray_image, check_same_shape

PSNR_PEAK = 255.0
SSIM_WINDOW = 11
SSIM_SIGMA = 1.5
SSIM_C1 = (0.01 * 255.0) ** 2
SSIM_C2 = (0.03 * 255.0) ** 2


@dataclass(frozen=True)
class QualityReport:
    """One reference-vs-processed comparison row."""

    image_id: str
    mse: float
    rmse: float
    psnr_db: float  # math.inf when mse == 0
    ssim: float


def fidelity(ref: np.ndarray, test: np.ndarray) -> tuple[float, float, float]:
    """Return (mse, rmse, psnr_db) between two same-sized gray images."""
    ref = check_gray_image(ref, "reference")
    test = check_gray_image(test, "test")
    check_same_shape(ref, test)
    diff = ref.astype(np.float64) - test.astype(np.float64)
    mse = float(np.mean(diff * diff))
    rmse = math.sqrt(mse)
    psnr = math.inf if mse == 0.0 else 10.0 * math.log10(PSNR_PEAK**2 / mse)
    return mse, rmse, psnr


def _gaussian_window(size: int = SSIM_WINDOW, sigma: float = SSIM_SIGMA) -> np.ndarray:
    half = (size - 1) / 2.0
    x = np.arange(size, dtype=np.float64) - half
    g = np.exp(-(x**2) / (2.0 * sigma**2))
    return g / g.sum()


def ssim(ref: np.ndarray, test: np.ndarray) -> float:
    """Mean local structural similarity over the valid region."""
    ref = check_gray_image(ref, "reference")
    test = check_gray_image(test, "test")
    check_same_shape(ref, test)
    h, w = ref.shape
    if h < SSIM_WINDOW or w < SSIM_WINDOW:
        raise ImageTooSmall(
            f"ssim needs both dims >= {SSIM_WINDOW}, got {w}x{h}"
        )

    g = _gaussian_window()
    r = SSIM_WINDOW // 2

    def wmean(a: np.ndarray) -> np.ndarray:
        # separable weighted window sum; border rows/cols discarded below,
        # so the pad mode never reaches the output
        out = correlate1d(a, g, axis=0, mode="constant")
        out = correlate1d(out, g, axis=1, mode="constant")
        return out[r:h - r, r:w - r]

    x = ref.astype(np.float64)
    y = test.astype(np.float64)
    mu_x = wmean(x)
    mu_y = wmean(y)
    var_x = wmean(x * x) - mu_x * mu_x
    var_y = wmean(y * y) - mu_y * mu_y
    cov = wmean(x * y) - mu_x * mu_y

    num = (2 * mu_x * mu_y + SSIM_C1) * (2 * cov + SSIM_C2)
    den = (mu_x**2 + mu_y**2 + SSIM_C1) * (var_x + var_y + SSIM_C2)
    return float(np.mean(num / den))


def verify_batch(
    pairs: Iterable[tuple[str, np.ndarray, np.ndarray]]
) -> list[QualityReport]:
    """fidelity + ssim per (image_id, reference, processed) pair, order kept."""
    reports = []
    for image_id, ref, test in pairs:
        try:
            mse, rmse, psnr = fidelity(ref, test)
            s = ssim(ref, test)
        except (DimensionMismatch, ImageTooSmall, ValueError) as exc:
            raise type(exc)(f"{image_id}: {exc}") from exc
        reports.append(QualityReport(image_id, mse, rmse, psnr, s))
    return reports


def reports_to_csv(reports: Sequence[QualityReport]) -> str:
    """Serialize reports; infinite PSNR renders as the literal token `inf`."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["image_id", "mse", "rmse", "psnr_db", "ssim"])
    for rep in reports:
        psnr = "inf" if math.isinf(rep.psnr_db) else repr(rep.psnr_db)
        writer.writerow([rep.image_id, repr(rep.mse), repr(rep.rmse), psnr, repr(rep.ssim)])
    return buf.getvalue()

"""Input validation helpers shared by the estimator classes and the
functional API.

A "gray image" throughout the toolkit is a 2-D numpy array of dtype uint8,
row-major, top-left origin. These checks centralize coercion so every
operation can assume a canonical buffer.
"""

from __future__ import annotations

import numpy as np

from .errors import DimensionMismatch, EvenKernel, EvenStructuringElement


def check_gray_image(img, name: str = "image") -> np.ndarray:
    """Validate and return a canonical uint8 grayscale buffer.

    Accepts any array-like; rejects wrong dimensionality, empty axes,
    non-integral dtypes and out-of-range values rather than silently
    casting.
    """
    arr = np.asarray(img)
    if arr.ndim != 2:
        raise ValueError(f"{name} must be 2-D (h, w), got ndim={arr.ndim}")
    if arr.size == 0 or arr.shape[0] == 0 or arr.shape[1] == 0:
        raise ValueError(f"{name} has an empty axis: shape={arr.shape}")
    if arr.dtype == np.uint8:
        return arr
    if not np.issubdtype(arr.dtype, np.integer):
        raise ValueError(f"{name} must have an integer dtype, got {arr.dtype}")
    if arr.min() < 0 or arr.max() > 255:
        raise ValueError(f"{name} values outside [0, 255]")
    return arr.astype(np.uint8)


def check_same_shape(ref: np.ndarray, test: np.ndarray) -> None:
    if ref.shape != test.shape:
        raise DimensionMismatch(
            f"shape mismatch: reference {ref.shape} vs test {test.shape}"
        )


def check_odd(value: int, what: str = "kernel") -> int:
    """Windowed stages require odd, centered windows."""
    value = int(value)
    exc = EvenKernel if what == "kernel" else EvenStructuringElement
    if value < 1 or value % 2 == 0:
        raise exc(f"{what} size must be an odd integer >= 1, got {value}")
    return value


def round_half_up(values: np.ndarray) -> np.ndarray:
    """Round to nearest integer, ties away from zero (values are >= 0 here)."""
    return np.floor(np.asarray(values, dtype=np.float64) + 0.5)

"""Decode, encode and resize raster images into canonical 8-bit grayscale.

All downstream stages operate on 2-D uint8 numpy arrays. Decoding accepts
JPEG, PNG and BMP; color inputs are collapsed with the integer Rec.601
luma (round-half-up) so byte-level goldens stay stable across platforms.
"""

from __future__ import annotations

import io
import re

import numpy as np
from PIL import Image, UnidentifiedImageError

from .errors import MalformedImage, UnsupportedFormat, ZeroDimension
from .validation import check_gray_image

SUPPORTED_FORMATS = ("JPEG", "PNG", "BMP")

_JPEG_QUALITY_RE = re.compile(r"^jpe?g(?:-quality-(\d+))?$")


def _luma_rec601(rgb: np.ndarray) -> np.ndarray:
    # integer half-up rounding of (0.299 R + 0.587 G + 0.114 B)
    r = rgb[..., 0].astype(np.int32)
    g = rgb[..., 1].astype(np.int32)
    b = rgb[..., 2].astype(np.int32)
    return ((299 * r + 587 * g + 114 * b + 500) // 1000).astype(np.uint8)


def decode_image(data: bytes) -> np.ndarray:
    """Decode a JPEG/PNG/BMP payload to a 2-D uint8 grayscale array."""
    try:
        pil = Image.open(io.BytesIO(data))
        pil.load()
    except (UnidentifiedImageError, OSError, ValueError) as exc:
        raise MalformedImage(f"cannot decode image bytes: {exc}") from exc

    if pil.format not in SUPPORTED_FORMATS:
        raise UnsupportedFormat(f"unsupported image format: {pil.format}")

    mode = pil.mode
    if mode == "L":
        return check_gray_image(np.asarray(pil), "decoded image")
    if mode == "1":
        return check_gray_image(np.asarray(pil.convert("L")), "decoded image")
    if mode in ("I", "I;16", "I;16B", "I;16L", "F"):
        raise UnsupportedFormat(f"16-bit / float pixel depth not supported: {mode}")
    rgb = np.asarray(pil.convert("RGB"))
    return check_gray_image(_luma_rec601(rgb), "decoded image")


def encode_image(img: np.ndarray, fmt: str = "png") -> bytes:
    """Encode a grayscale buffer.

    `fmt` is "png" (lossless, the default interchange format) or
    "jpeg" / "jpeg-quality-N" for lossy output.
    """
    img = check_gray_image(img)
    pil = Image.fromarray(img, mode="L")
    buf = io.BytesIO()
    fmt_l = fmt.strip().lower()
    if fmt_l == "png":
        pil.save(buf, format="PNG")
        return buf.getvalue()
    m = _JPEG_QUALITY_RE.match(fmt_l)
    if m:
        quality = int(m.group(1)) if m.group(1) is not None else 95
        if not 1 <= quality <= 100:
            raise UnsupportedFormat(f"jpeg quality out of range: {quality}")
        pil.save(buf, format="JPEG", quality=quality)
        return buf.getvalue()
    raise UnsupportedFormat(f"unsupported encode format: {fmt!r}")


def resize_bilinear(img: np.ndarray, width: int, height: int) -> np.ndarray:
    """Resize with bilinear interpolation on half-pixel-centered samples.

    Source coordinate of output pixel j is (j + 0.5) * in/out - 0.5; the
    four neighbors are edge-clamped, interpolated in float64, rounded
    half-up and clipped to [0, 255].
    """
    img = check_gray_image(img)
    width, height = int(width), int(height)
    if width <= 0 or height <= 0:
        raise ZeroDimension(f"target size must be positive, got {width}x{height}")
    in_h, in_w = img.shape
    if (in_w, in_h) == (width, height):
        return img.copy()

    src = img.astype(np.float64)

    def axis_coords(n_out: int, n_in: int):
        # multiply before dividing: keeps the mapping bit-identical to a
        # scalar (j + 0.5) * in / out - 0.5 evaluation
        pos = (np.arange(n_out, dtype=np.float64) + 0.5) * n_in / n_out - 0.5
        lo = np.floor(pos)
        frac = pos - lo
        i0 = np.clip(lo, 0, n_in - 1).astype(np.intp)
        i1 = np.clip(lo + 1, 0, n_in - 1).astype(np.intp)
        return i0, i1, frac

    x0, x1, fx = axis_coords(width, in_w)
    y0, y1, fy = axis_coords(height, in_h)

    top = src[np.ix_(y0, x0)] * (1 - fx) + src[np.ix_(y0, x1)] * fx
    bot = src[np.ix_(y1, x0)] * (1 - fx) + src[np.ix_(y1, x1)] * fx
    out = top * (1 - fy)[:, None] + bot * fy[:, None]
    return np.clip(np.floor(out + 0.5), 0, 255).astype(np.uint8)

"""scikit-learn compatible wrappers around the enhancement stages.

Each transformer is stateless (`fit` only validates parameters and
returns self) and accepts either a single 2-D uint8 image or a sequence
of them, returning the matching structure, so the stages compose with
sklearn pipelines and grid search via the usual get_params machinery.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from .enhance import (
    PipelineConfig,
    StageTrace,
    clahe,
    median_filter,
    morphological_opening,
    run_pipeline,
)
from .validation import check_gray_image


def _apply(fn, X):
    if isinstance(X, np.ndarray) and X.ndim == 2:
        return fn(X)
    if isinstance(X, np.ndarray) and X.ndim == 3:
        return np.stack([fn(img) for img in X])
    return [fn(check_gray_image(img)) for img in X]


class MedianFilter(BaseEstimator, TransformerMixin):
    """Exact square-window median filter with edge replication."""

    def __init__(self, kernel_size=3):
        self.kernel_size = kernel_size

    def fit(self, X=None, y=None):
        PipelineConfig(median_kernel=self.kernel_size).validated()
        return self

    def transform(self, X):
        return _apply(lambda img: median_filter(img, self.kernel_size), X)


class MorphologicalOpening(BaseEstimator, TransformerMixin):
    """Grayscale opening (erosion then dilation) with a flat square element."""

    def __init__(self, se_side=3):
        self.se_side = se_side

    def fit(self, X=None, y=None):
        PipelineConfig(opening_se_side=self.se_side).validated()
        return self

    def transform(self, X):
        return _apply(lambda img: morphological_opening(img, self.se_side), X)


class Clahe(BaseEstimator, TransformerMixin):
    """Contrast limited adaptive histogram equalization."""

    def __init__(self, tiles_x=8, tiles_y=8, clip=2.0):
        self.tiles_x = tiles_x
        self.tiles_y = tiles_y
        self.clip = clip

    def _config(self) -> PipelineConfig:
        return PipelineConfig(clahe_tiles_x=self.tiles_x,
                              clahe_tiles_y=self.tiles_y,
                              clahe_clip=self.clip)

    def fit(self, X=None, y=None):
        self._config().validated()
        return self

    def transform(self, X):
        cfg = self._config()
        return _apply(lambda img: clahe(img, cfg), X)


class EnhancementPipeline(BaseEstimator, TransformerMixin):
    """Full median -> opening -> CLAHE chain as one transformer.

    `transform_with_trace` exposes the per-stage checksum audit for a
    single image; plain `transform` fits the sklearn protocol.
    """

    def __init__(self, median_kernel=3, opening_se_side=3, clahe_enabled=True,
                 clahe_tiles_x=8, clahe_tiles_y=8, clahe_clip=2.0):
        self.median_kernel = median_kernel
        self.opening_se_side = opening_se_side
        self.clahe_enabled = clahe_enabled
        self.clahe_tiles_x = clahe_tiles_x
        self.clahe_tiles_y = clahe_tiles_y
        self.clahe_clip = clahe_clip

    def _config(self) -> PipelineConfig:
        return PipelineConfig(
            median_kernel=self.median_kernel,
            opening_se_side=self.opening_se_side,
            clahe_enabled=self.clahe_enabled,
            clahe_tiles_x=self.clahe_tiles_x,
            clahe_tiles_y=self.clahe_tiles_y,
            clahe_clip=self.clahe_clip,
        )

    def fit(self, X=None, y=None):
        self._config().validated()
        return self

    def transform(self, X):
        cfg = self._config()
        return _apply(lambda img: run_pipeline(img, cfg)[0], X)

    def transform_with_trace(self, img) -> tuple[np.ndarray, StageTrace]:
        return run_pipeline(check_gray_image(img), self._config())

"""The 93-feature schema and per-painting extraction."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import curvature, segmentation, spectral, texture
from .corpus import PreprocessedImage

ENERGY_NAMES = tuple(
    f"{feat}_{ch}" for ch in spectral.CHANNELS for feat in spectral.ENERGY_FEATURES
)
ENTROPY_NAMES = tuple(f"local_entropy_w{w}" for w in spectral.ENTROPY_WINDOWS)
HARALICK_NAMES = tuple(
    f"{feat}_adj{a}" for a in texture.OFFSETS for feat in texture.HARALICK_FEATURES
)
CURVATURE_NAMES = curvature.CURVATURE_FEATURES
SHAPE_NAMES = segmentation.SHAPE_FEATURES

GROUPS = {
    "energy": ENERGY_NAMES,
    "entropy": ENTROPY_NAMES,
    "haralick": HARALICK_NAMES,
    "curvature": CURVATURE_NAMES,
    "shape": SHAPE_NAMES,
}
FEATURE_NAMES: tuple[str, ...] = sum(GROUPS.values(), ())
N_FEATURES = len(FEATURE_NAMES)

assert N_FEATURES == 93 and len(set(FEATURE_NAMES)) == 93


@dataclass(frozen=True)
class ExtractionConfig:
    slic_k: int = 128
    slic_compactness: float = 10.0
    slic_iterations: int = 10
    gamma: float = curvature.GAMMA
    smoothing: float = curvature.SMOOTHING
    glcm_levels: int = texture.GLCM_LEVELS


def extract_features(image: PreprocessedImage, config: ExtractionConfig = ExtractionConfig()) -> np.ndarray:
    """Feature vector of one preprocessed painting, ordered as ``FEATURE_NAMES``."""
    labels = segmentation.slic_segment(
        image.rgb, config.slic_k, config.slic_compactness, config.slic_iterations
    )
    segments = segmentation.extract_segments(labels)
    peaks = [
        p for p in (curvature.contour_peaks(s.contour, config.gamma, config.smoothing) for s in segments)
        if p is not None
    ]
    gray = texture.quantize_gray(image.luminance, config.glcm_levels)
    vec = np.concatenate([
        spectral.energy_block(image),
        spectral.local_entropy_block(image.luminance),
        texture.haralick_block(gray, config.glcm_levels),
        curvature.curvature_block(peaks),
        segmentation.shape_stats(segments),
    ])
    if not np.all(np.isfinite(vec)):
        bad = [FEATURE_NAMES[i] for i in np.flatnonzero(~np.isfinite(vec))]
        raise FloatingPointError(f"non-finite features: {', '.join(bad)}")
    return vec

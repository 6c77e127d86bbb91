"""Gray-level co-occurrence matrices and Haralick texture statistics.

Gray levels are indexed from 0. Logarithms are base 2 with 0 log 0 = 0.
"""
from __future__ import annotations

import numpy as np


GLCM_LEVELS = 64

# adjacency index -> (row offset, column offset): 0, 45, 90 and 135 degrees
OFFSETS = {1: (0, 1), 2: (-1, 1), 3: (-1, 0), 4: (-1, -1)}

HARALICK_FEATURES = (
    "angular_second_moment",
    "contrast",
    "correlation",
    "sum_of_squares_variance",
    "inverse_difference_moment",
    "sum_average",
    "sum_variance",
    "sum_entropy",
    "entropy",
    "difference_average",
    "difference_entropy",
)


def quantize_gray(lum: np.ndarray, levels: int = GLCM_LEVELS) -> np.ndarray:
    """Uniform bins over [0, 1]: level ``floor(v * levels)``, with 1.0 in the top bin."""
    q = np.floor(np.asarray(lum, dtype=np.float64) * levels).astype(np.intp)
    return np.clip(q, 0, levels - 1)


def glcm(image: np.ndarray, adjacency: int, levels: int = GLCM_LEVELS) -> np.ndarray:
    """Normalized, symmetrized co-occurrence matrix at distance 1."""
    if levels < 2:
        raise ValueError(f"need at least 2 gray levels, got {levels}")
    if adjacency not in OFFSETS:
        raise ValueError(f"adjacency must be one of 1..4, got {adjacency}")
    q = np.asarray(image)
    if q.min() < 0 or q.max() >= levels:
        raise ValueError(f"image values must lie in 0..{levels - 1}")
    dr, dc = OFFSETS[adjacency]
    h, w = q.shape
    a = q[max(0, -dr):h - max(0, dr), max(0, -dc):w - max(0, dc)]
    b = q[max(0, dr):h - max(0, -dr) or None, max(0, dc):w - max(0, -dc) or None]
    if a.size == 0:
        raise ValueError("image too small for the requested adjacency")
    counts = np.bincount((a * levels + b).ravel(), minlength=levels * levels)
    counts = counts.reshape(levels, levels).astype(np.float64)
    p = counts + counts.T
    return p / p.sum()


def _entropy(p: np.ndarray) -> float:
    nz = p[p > 0]
    return float(-(nz * np.log2(nz)).sum())


def haralick(p: np.ndarray) -> np.ndarray:
    """The 11 statistics of ``HARALICK_FEATURES`` for a symmetric normalized GLCM."""
    g = p.shape[0]
    i, j = np.indices(p.shape)
    px = p.sum(axis=1)
    levels = np.arange(g)
    mu = float(np.dot(levels, px))
    var = float(np.dot((levels - mu) ** 2, px))

    p_sum = np.bincount((i + j).ravel(), weights=p.ravel(), minlength=2 * g - 1)
    p_diff = np.bincount(np.abs(i - j).ravel(), weights=p.ravel(), minlength=g)
    k_sum = np.arange(2 * g - 1)
    k_diff = np.arange(g)

    sum_avg = float(np.dot(k_sum, p_sum))
    # Zero-variance marginals make correlation 0/0; treated as 0.
    corr = (float((i * j * p).sum()) - mu * mu) / var if var > 0 else 0.0
    return np.array([
        float((p ** 2).sum()),
        float(((i - j) ** 2 * p).sum()),
        corr,
        float(((i - mu) ** 2 * p).sum()),
        float((p / (1.0 + (i - j) ** 2)).sum()),
        sum_avg,
        float(np.dot((k_sum - sum_avg) ** 2, p_sum)),
        _entropy(p_sum),
        _entropy(p),
        float(np.dot(k_diff, p_diff)),
        _entropy(p_diff),
    ])


def haralick_block(image: np.ndarray, levels: int = GLCM_LEVELS) -> np.ndarray:
    """44 features: for adjacency 1..4 in turn, the 11 Haralick statistics.

    ``image`` must already be quantized to ``levels`` gray levels.
    """
    return np.concatenate([haralick(glcm(image, a, levels)) for a in OFFSETS])

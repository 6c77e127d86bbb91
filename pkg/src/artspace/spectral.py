"""Fourier energy statistics and local gray-level entropy."""
from __future__ import annotations

import numpy as np

from .corpus import LEVELS, PreprocessedImage, quantize

CHANNELS = ("red", "green", "blue", "luminance")
ENERGY_FEATURES = (
    "energy_total",
    "energy_row_mean",
    "energy_row_std",
    "energy_col_mean",
    "energy_col_std",
    "energy_row_centroid",
    "energy_col_centroid",
    "energy_rowcol_mean",
    "energy_rowcol_std",
)
ENTROPY_WINDOWS = (5, 50)


def energy_grid(channel: np.ndarray) -> np.ndarray:
    """Squared FFT magnitudes divided by the pixel count.

    With the unnormalized forward transform this makes the grid sum equal
    the spatial sum of squares exactly (Parseval).
    """
    ch = np.asarray(channel, dtype=np.float64)
    spec = np.fft.fft2(ch)
    return (spec.real ** 2 + spec.imag ** 2) / ch.size


def _centroid(profile: np.ndarray) -> float:
    # Conjugate symmetry: only indices 0..n/2 carry independent energy.
    half = profile[: len(profile) // 2 + 1]
    total = half.sum()
    if total <= 0:
        return 0.0
    return float(np.dot(np.arange(half.size), half) / total)


def channel_energy(channel: np.ndarray) -> np.ndarray:
    """The nine energy statistics of one channel, in ``ENERGY_FEATURES`` order."""
    e = energy_grid(channel)
    rows = e.sum(axis=1)
    cols = e.sum(axis=0)
    both = np.concatenate([rows, cols])
    return np.array([
        e.sum(),
        rows.mean(), rows.std(),
        cols.mean(), cols.std(),
        _centroid(rows), _centroid(cols),
        both.mean(), both.std(),
    ])


def energy_block(image: PreprocessedImage) -> np.ndarray:
    """36 energy features, channel-major (R, G, B, luminance) x ``ENERGY_FEATURES``."""
    return np.concatenate([channel_energy(c) for c in image.channels])


def _window_bounds(n: int, window: int) -> tuple[np.ndarray, np.ndarray]:
    before = window // 2
    after = window - 1 - before
    idx = np.arange(n)
    return np.clip(idx - before, 0, n), np.clip(idx + after + 1, 0, n)


def local_entropy_map(lum: np.ndarray, window: int, levels: int = LEVELS) -> np.ndarray:
    """Per-pixel Shannon entropy (bits) of gray levels in a ``window x window``
    neighborhood clipped to the image.

    Even windows extend one pixel further before the center than after it.
    """
    q = quantize(lum, levels)
    h, w = q.shape
    r0, r1 = _window_bounds(h, window)
    c0, c1 = _window_bounds(w, window)
    n = ((r1 - r0)[:, None] * (c1 - c0)[None, :]).astype(np.float64)

    max_count = window * window
    c = np.arange(max_count + 1, dtype=np.float64)
    clog = np.zeros_like(c)
    clog[1:] = c[1:] * np.log2(c[1:])

    acc = np.zeros((h, w))
    col_cum = np.zeros((h + 1, w), dtype=np.int32)
    row_cum = np.zeros((h, w + 1), dtype=np.int32)
    for g in np.unique(q):
        np.cumsum(q == g, axis=0, out=col_cum[1:])
        band = col_cum[r1] - col_cum[r0]
        np.cumsum(band, axis=1, out=row_cum[:, 1:])
        counts = row_cum[:, c1] - row_cum[:, c0]
        acc += clog[counts]
    # H = log2 n - (1/n) sum_g c_g log2 c_g
    return np.maximum(np.log2(n) - acc / n, 0.0)


def local_entropy_block(lum: np.ndarray, windows=ENTROPY_WINDOWS) -> np.ndarray:
    return np.array([local_entropy_map(lum, w).mean() for w in windows])

"""Contour curvature from spectral derivatives, and curvature peak statistics."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

MIN_SAMPLES = 64
MAX_SAMPLES = 4096
SMOOTHING = 0.02
GAMMA = 1.5
EPS = 1e-12

CURVATURE_FEATURES = (
    "mean_peak_gap_geometric",
    "mean_peak_gap_pixels",
    "std_peak_gap_geometric",
    "std_peak_gap_pixels",
    "mean_peak_count",
)


@dataclass
class ParametricContour:
    """Closed curve sampled at ``T`` evenly spaced arc-length positions."""

    x: np.ndarray
    y: np.ndarray
    step: float = 1.0

    def __post_init__(self):
        self.x = np.asarray(self.x, dtype=np.float64)
        self.y = np.asarray(self.y, dtype=np.float64)
        if self.x.shape != self.y.shape or self.x.ndim != 1:
            raise ValueError("x and y must be 1-D arrays of equal length")
        if len(self.x) < 8:
            raise ValueError(f"need at least 8 samples, got {len(self.x)}")

    @property
    def points(self) -> np.ndarray:
        return np.column_stack([self.x, self.y])

    def __len__(self):
        return len(self.x)


@dataclass
class CurvatureSeries:
    k: np.ndarray
    points: np.ndarray | None = None
    step: float = 1.0
    gamma: float = GAMMA

    @property
    def tau(self) -> float:
        return float(np.median(np.abs(self.k)) * self.gamma)


@dataclass
class PeakSet:
    indices: np.ndarray
    geometric_gaps: np.ndarray = field(default_factory=lambda: np.zeros(0))
    pixel_gaps: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def __len__(self):
        return len(self.indices)


def sample_count(perimeter: float) -> int:
    """Next power of two at or above the perimeter, clamped to [64, 4096]."""
    t = 2 ** math.ceil(math.log2(max(perimeter, 1.0)))
    return int(min(max(t, MIN_SAMPLES), MAX_SAMPLES))


def resample_closed(contour: np.ndarray, samples: int | None = None) -> ParametricContour:
    """Resample a closed polyline at uniform arc length.

    ``samples`` defaults to :func:`sample_count` of the point count.
    """
    pts = np.asarray(contour, dtype=np.float64).reshape(-1, 2)
    if samples is None:
        samples = sample_count(len(pts))
    closed = np.vstack([pts, pts[:1]])
    seg = np.linalg.norm(np.diff(closed, axis=0), axis=1)
    s = np.concatenate([[0.0], np.cumsum(seg)])
    length = s[-1]
    if length <= 0:
        raise ValueError("degenerate contour: all points coincide")
    t = np.arange(samples) * (length / samples)
    return ParametricContour(np.interp(t, s, closed[:, 0]), np.interp(t, s, closed[:, 1]),
                             step=length / samples)


def fourier_derivatives(
    contour: ParametricContour, smoothing: float | None = SMOOTHING
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """First and second derivatives of x(t), y(t) with respect to the sample index.

    Derivatives are taken in the frequency domain (multiplication by
    ``2 pi i w`` and ``-(2 pi w)^2``). When ``smoothing`` is set, the spectra
    are first multiplied by a Gaussian of width ``smoothing * T`` harmonics.
    """
    n = len(contour)
    freq = np.fft.fftfreq(n)  # cycles per sample
    X = np.fft.fft(contour.x)
    Y = np.fft.fft(contour.y)
    if smoothing:
        harmonics = freq * n
        gauss = np.exp(-(harmonics ** 2) / (2.0 * (smoothing * n) ** 2))
        X, Y = X * gauss, Y * gauss
    d1 = 2j * np.pi * freq
    if n % 2 == 0:
        d1[n // 2] = 0.0  # Nyquist term has no real-valued derivative
    d2 = -(2.0 * np.pi * freq) ** 2
    return (
        np.fft.ifft(d1 * X).real,
        np.fft.ifft(d1 * Y).real,
        np.fft.ifft(d2 * X).real,
        np.fft.ifft(d2 * Y).real,
    )


def curvature_series(
    contour: ParametricContour, smoothing: float | None = SMOOTHING, gamma: float = GAMMA
) -> CurvatureSeries:
    """Signed curvature at every sample; positive on convex parts of a
    positively oriented contour."""
    if np.ptp(contour.x) == 0 and np.ptp(contour.y) == 0:
        raise ValueError("degenerate contour: all points coincide")
    dx, dy, ddx, ddy = fourier_derivatives(contour, smoothing)
    denom = np.maximum((dx ** 2 + dy ** 2) ** 1.5, EPS)
    k = (dx * ddy - dy * ddx) / denom
    return CurvatureSeries(k=k, points=contour.points, step=contour.step, gamma=gamma)


def detect_peaks(series: CurvatureSeries, gamma: float | None = None) -> PeakSet:
    """Cyclic strict local maxima of k above ``median(|k|) * gamma``.

    Gaps between consecutive peaks wrap around the contour, so ``n >= 2``
    peaks give ``n`` gaps. Pixel gaps are index gaps times the sample step.
    """
    k = np.asarray(series.k, dtype=np.float64)
    if not np.all(np.isfinite(k)):
        raise ValueError("curvature series has non-finite values")
    g = series.gamma if gamma is None else gamma
    tau = np.median(np.abs(k)) * g
    is_peak = (k > np.roll(k, 1)) & (k > np.roll(k, -1)) & (k > tau)
    idx = np.flatnonzero(is_peak)
    if len(idx) < 2:
        return PeakSet(idx)
    n = len(k)
    index_gaps = np.diff(np.append(idx, idx[0] + n)).astype(np.float64)
    if series.points is not None:
        pts = np.asarray(series.points)[idx]
        geo = np.linalg.norm(np.roll(pts, -1, axis=0) - pts, axis=1)
    else:
        geo = index_gaps.copy()
    return PeakSet(idx, geo, index_gaps * series.step)


def curvature_block(peaksets: list[PeakSet]) -> np.ndarray:
    """Pool peak gaps over all segments into the five curvature features.

    With no gaps at all the gap statistics are 0; with no segments every
    feature is 0.
    """
    if not peaksets:
        return np.zeros(5)
    geo = np.concatenate([p.geometric_gaps for p in peaksets])
    pix = np.concatenate([p.pixel_gaps for p in peaksets])
    counts = np.array([len(p) for p in peaksets], dtype=np.float64)
    if geo.size == 0:
        return np.array([0.0, 0.0, 0.0, 0.0, counts.mean()])
    return np.array([geo.mean(), pix.mean(), geo.std(), pix.std(), counts.mean()])


def contour_peaks(
    contour: np.ndarray,
    gamma: float = GAMMA,
    smoothing: float | None = SMOOTHING,
    min_points: int = MIN_SAMPLES,
) -> PeakSet | None:
    """Peaks of one traced segment contour; ``None`` when it is too short."""
    if len(contour) < min_points:
        return None
    param = resample_closed(contour, sample_count(len(contour)))
    return detect_peaks(curvature_series(param, smoothing, gamma))

"""Manifest ingestion, image decoding and preprocessing.

Every painting goes through the same chain: center crop to the largest
square, bilinear resize to ``SIZE x SIZE``, per-channel histogram
equalization and a 3x3 median filter. Luminance is derived from the resized
RGB channels with BT.601 weights and then processed like any other channel.
"""
from __future__ import annotations

import csv
import io
import logging
import urllib.request
import warnings
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
from PIL import Image
from scipy import ndimage
from skimage.transform import resize

logger = logging.getLogger(__name__)

SIZE = 800
LEVELS = 256
LUMA_WEIGHTS = (0.299, 0.587, 0.114)
MANIFEST_HEADER = ("painter", "title", "year", "source", "rank")


class ManifestError(ValueError):
    """Raised for malformed or inconsistent manifests."""


class ImageError(ValueError):
    """Raised for undecodable or degenerate rasters."""


@dataclass(frozen=True)
class ManifestEntry:
    painter_id: str
    painting_title: str
    year: str
    source: str
    chronological_rank: int


@dataclass(frozen=True)
class PreprocessedImage:
    red: np.ndarray
    green: np.ndarray
    blue: np.ndarray
    luminance: np.ndarray

    @property
    def channels(self) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        return (self.red, self.green, self.blue, self.luminance)

    @property
    def rgb(self) -> np.ndarray:
        return np.stack([self.red, self.green, self.blue], axis=-1)

    @property
    def shape(self) -> tuple[int, int]:
        return self.luminance.shape


def load_manifest(path: str | Path) -> list[ManifestEntry]:
    """Read a ``painter,title,year,source,rank`` CSV manifest.

    Row numbers in error messages are physical line numbers of the file
    (the header is line 1).
    """
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"manifest not found: {path}")
    with path.open(newline="", encoding="utf-8") as fh:
        text = fh.read()
    if not text.strip():
        warnings.warn(f"manifest {path} is empty", stacklevel=2)
        return []

    reader = csv.reader(io.StringIO(text))
    header = next(reader)
    if tuple(h.strip() for h in header) != MANIFEST_HEADER:
        raise ManifestError(
            f"row 1: expected header {','.join(MANIFEST_HEADER)}, got {','.join(header)}"
        )

    entries: list[ManifestEntry] = []
    seen_sources: dict[str, int] = {}
    painter_rank: dict[str, int] = {}
    for row in reader:
        line = reader.line_num
        if not row or all(not cell.strip() for cell in row):
            continue
        if len(row) != len(MANIFEST_HEADER):
            raise ManifestError(f"row {line}: expected 5 fields, got {len(row)}")
        painter, title, year, source, rank_text = (cell.strip() for cell in row)
        if not painter:
            raise ManifestError(f"row {line}: empty painter")
        if not source:
            raise ManifestError(f"row {line}: empty source")
        try:
            rank = int(rank_text)
        except ValueError:
            raise ManifestError(f"row {line}: rank {rank_text!r} is not an integer") from None
        if rank < 0:
            raise ManifestError(f"row {line}: negative rank {rank}")
        if source in seen_sources:
            raise ManifestError(
                f"row {line}: duplicate source {source!r} (first seen on row {seen_sources[source]})"
            )
        if painter_rank.setdefault(painter, rank) != rank:
            raise ManifestError(
                f"row {line}: painter {painter!r} has rank {rank}, earlier rows say {painter_rank[painter]}"
            )
        seen_sources[source] = line
        entries.append(ManifestEntry(painter, title, year, source, rank))

    ranks = Counter(painter_rank.values())
    clashes = sorted(r for r, n in ranks.items() if n > 1)
    if clashes:
        raise ManifestError(f"painters share chronological rank(s) {clashes}")

    counts = Counter(e.painter_id for e in entries)
    logger.info(
        "manifest %s: %d paintings, %d painters (%s)",
        path, len(entries), len(counts),
        ", ".join(f"{p}={n}" for p, n in counts.items()),
    )
    if not entries:
        warnings.warn(f"manifest {path} has no rows", stacklevel=2)
    return entries


def painter_order(entries: Iterable[ManifestEntry]) -> list[str]:
    """Painters sorted by chronological rank."""
    ranks = {e.painter_id: e.chronological_rank for e in entries}
    return sorted(ranks, key=ranks.__getitem__)


def resolve_source(source: str, base_dir: str | Path | None = None) -> str:
    if source.startswith(("http://", "https://")):
        return source
    p = Path(source)
    if not p.is_absolute() and base_dir is not None:
        p = Path(base_dir) / p
    return str(p)


def read_bytes(source: str, base_dir: str | Path | None = None, timeout: float = 30.0) -> bytes:
    location = resolve_source(source, base_dir)
    if location.startswith(("http://", "https://")):
        req = urllib.request.Request(location, headers={"User-Agent": "artspace/0.1"})
        with urllib.request.urlopen(req, timeout=timeout) as resp:
            return resp.read()
    return Path(location).read_bytes()


def decode_image(data: bytes) -> np.ndarray:
    """Decode PNG/JPEG bytes to a float array in [0, 1], (H, W) or (H, W, 3)."""
    try:
        with Image.open(io.BytesIO(data)) as im:
            im.load()
            if im.mode in ("1", "L", "LA"):
                return np.asarray(im.convert("L"), dtype=np.float64) / 255.0
            if im.mode.startswith("I"):
                arr = np.asarray(im, dtype=np.float64)
                return np.clip(arr / 65535.0, 0.0, 1.0)
            return np.asarray(im.convert("RGB"), dtype=np.float64) / 255.0
    except (OSError, SyntaxError, ValueError) as exc:
        raise ImageError(f"cannot decode image: {exc}") from exc


def _as_float(image: np.ndarray) -> np.ndarray:
    arr = np.asarray(image)
    if arr.dtype == np.uint8:
        return arr.astype(np.float64) / 255.0
    if arr.dtype == np.uint16:
        return arr.astype(np.float64) / 65535.0
    if arr.dtype == bool:
        return arr.astype(np.float64)
    return np.clip(arr.astype(np.float64), 0.0, 1.0)


def center_crop(image: np.ndarray) -> np.ndarray:
    h, w = image.shape[:2]
    side = min(h, w)
    top = (h - side) // 2
    left = (w - side) // 2
    return image[top:top + side, left:left + side]


def luminance(rgb: np.ndarray) -> np.ndarray:
    r, g, b = LUMA_WEIGHTS
    return r * rgb[..., 0] + g * rgb[..., 1] + b * rgb[..., 2]


def quantize(channel: np.ndarray, levels: int = LEVELS) -> np.ndarray:
    """Map [0, 1] values to the nearest of ``levels`` evenly spaced integers."""
    q = np.floor(np.asarray(channel, dtype=np.float64) * (levels - 1) + 0.5)
    return np.clip(q, 0, levels - 1).astype(np.intp)


def equalize(channel: np.ndarray, levels: int = LEVELS) -> np.ndarray:
    """Histogram equalization on ``levels`` gray levels.

    Uses the ``(cdf - cdf_min) / (1 - cdf_min)`` mapping, so a constant
    channel is returned unchanged.
    """
    q = quantize(channel, levels)
    hist = np.bincount(q.ravel(), minlength=levels)
    cdf = np.cumsum(hist) / q.size
    cdf_min = cdf[hist > 0][0]
    if cdf_min >= 1.0:
        return np.asarray(channel, dtype=np.float64).copy()
    lut = np.clip((cdf - cdf_min) / (1.0 - cdf_min), 0.0, 1.0)
    return lut[q]


def median3(channel: np.ndarray) -> np.ndarray:
    return ndimage.median_filter(np.asarray(channel, dtype=np.float64), size=3, mode="nearest")


def preprocess(image: np.ndarray, size: int = SIZE) -> PreprocessedImage:
    """Crop, resize, equalize and median-filter a decoded raster."""
    arr = np.asarray(image)
    if arr.ndim == 3 and arr.shape[2] == 1:
        arr = arr[..., 0]
    if arr.ndim == 3 and arr.shape[2] == 4:
        arr = arr[..., :3]
    if arr.ndim not in (2, 3) or (arr.ndim == 3 and arr.shape[2] != 3):
        raise ImageError(f"expected 1 or 3 channels, got shape {arr.shape}")
    if min(arr.shape[:2]) < 3:
        raise ImageError(f"degenerate image of shape {arr.shape[:2]}")

    arr = _as_float(arr)
    if arr.ndim == 2:
        arr = np.repeat(arr[..., None], 3, axis=2)
    square = center_crop(arr)
    resized = resize(square, (size, size), order=1, mode="edge",
                     anti_aliasing=False, preserve_range=True)
    resized = np.clip(resized, 0.0, 1.0)
    channels = [resized[..., c] for c in range(3)] + [luminance(resized)]
    out = [median3(equalize(c)) for c in channels]
    return PreprocessedImage(*out)


def _otsu_threshold(values: np.ndarray) -> float:
    # Exhaustive sweep over distinct values: the mask is ``values > t``.
    levels, counts = np.unique(values, return_counts=True)
    if levels.size == 1:
        return float(levels[0])
    w = counts.astype(np.float64)
    total = w.sum()
    w0 = np.cumsum(w)[:-1]
    s0 = np.cumsum(w * levels)[:-1]
    w1 = total - w0
    s1 = (w * levels).sum() - s0
    between = w0 * w1 * (s0 / w0 - s1 / w1) ** 2
    return float(levels[int(np.argmax(between))])


def to_binary(lum: np.ndarray) -> tuple[np.ndarray, float]:
    """Otsu binarization. Returns ``(mask, threshold)`` with ``mask = lum > threshold``.

    A constant image yields an all-false mask and the constant as threshold.
    """
    lum = np.asarray(lum, dtype=np.float64)
    t = _otsu_threshold(lum.ravel())
    return lum > t, t


def gray_histogram(lum: np.ndarray, levels: int = LEVELS) -> np.ndarray:
    q = quantize(lum, levels)
    return np.bincount(q.ravel(), minlength=levels) / q.size


def mean_histogram(histograms: Sequence[np.ndarray]) -> np.ndarray:
    if not len(histograms):
        raise ValueError("no histograms to average")
    return np.mean(np.stack(histograms), axis=0)


def write_histogram_csv(path: str | Path, hist: np.ndarray, header_comment: str | None = None) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        if header_comment:
            fh.write(f"# {header_comment}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["index", "mass"])
        for i, m in enumerate(hist):
            w.writerow([i, repr(float(m))])

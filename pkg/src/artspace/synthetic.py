"""Procedural stand-in corpus: one texture family per fictitious painter.

Painter ``i`` gets its own stripe frequency, blob count, noise level and
palette, so the families separate in feature space without any real
paintings.
"""
from __future__ import annotations

import csv
from pathlib import Path

import numpy as np
from PIL import Image

PAINTERS = tuple(f"painter_{i:02d}" for i in range(12))


def painting(painter: int, index: int, size: int = 96, seed: int = 0) -> np.ndarray:
    """An ``size x size x 3`` uint8 image for ``painter``'s ``index``-th work."""
    rng = np.random.default_rng([seed, painter, index])
    yy, xx = np.mgrid[0:size, 0:size] / size
    hue = np.array([np.cos(0.5 * painter), np.cos(0.5 * painter + 2.1), np.cos(0.5 * painter + 4.2)])
    base = 0.5 + 0.3 * hue

    freq = 1 + 2 * painter
    angle = 0.25 * np.pi * (painter % 4)
    stripes = 0.5 + 0.5 * np.sin(2 * np.pi * freq * (xx * np.cos(angle) + yy * np.sin(angle))
                                 + rng.uniform(0, 2 * np.pi))
    img = base[None, None, :] * (0.6 + 0.4 * stripes[..., None])

    for _ in range(2 + 3 * painter):
        cx, cy = rng.uniform(0, 1, 2)
        rx, ry = rng.uniform(0.03, 0.25 - 0.015 * painter, 2)
        blob = ((xx - cx) / rx) ** 2 + ((yy - cy) / ry) ** 2 <= 1
        img[blob] = rng.uniform(0, 1, 3)

    img += rng.normal(0.0, 0.01 + 0.01 * painter, img.shape)
    return (np.clip(img, 0, 1) * 255).round().astype(np.uint8)


def write_corpus(
    out_dir: str | Path,
    painters: int = 12,
    per_painter: int = 20,
    size: int = 96,
    seed: int = 0,
) -> Path:
    """Write PNGs plus ``manifest.csv`` (relative sources) and return the manifest path."""
    out = Path(out_dir)
    (out / "img").mkdir(parents=True, exist_ok=True)
    manifest = out / "manifest.csv"
    with manifest.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["painter", "title", "year", "source", "rank"])
        for p in range(painters):
            for j in range(per_painter):
                rel = f"img/{p:02d}_{j:03d}.png"
                Image.fromarray(painting(p, j, size, seed)).save(out / rel)
                w.writerow([PAINTERS[p], f"Study {j + 1}", str(1900 + 5 * p), rel, p])
    return manifest

"""Minimal hand-written SVG figures.

Plain string output keeps the files byte-stable across runs and lets tests
count elements by class.
"""
from __future__ import annotations

from html import escape
from pathlib import Path
from typing import Sequence

import numpy as np

WIDTH, HEIGHT, MARGIN = 640, 480, 56
PALETTE = (
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b",
    "#e377c2", "#7f7f7f", "#bcbd22", "#17becf", "#393b79", "#637939",
)


def _fmt(v: float) -> str:
    return f"{v:.2f}"


class _Axes:
    def __init__(self, xs: np.ndarray, ys: np.ndarray):
        xs = np.asarray(xs, dtype=np.float64)
        ys = np.asarray(ys, dtype=np.float64)
        self.x0, self.x1 = self._span(xs)
        self.y0, self.y1 = self._span(ys)

    @staticmethod
    def _span(v: np.ndarray) -> tuple[float, float]:
        lo, hi = (float(v.min()), float(v.max())) if v.size else (0.0, 1.0)
        if hi - lo < 1e-12:
            lo, hi = lo - 0.5, hi + 0.5
        pad = 0.05 * (hi - lo)
        return lo - pad, hi + pad

    def px(self, x: float) -> float:
        return MARGIN + (x - self.x0) / (self.x1 - self.x0) * (WIDTH - 2 * MARGIN)

    def py(self, y: float) -> float:
        return HEIGHT - MARGIN - (y - self.y0) / (self.y1 - self.y0) * (HEIGHT - 2 * MARGIN)


def _document(body: list[str], title: str, xlabel: str, ylabel: str, comment: str | None) -> str:
    head = ['<?xml version="1.0" encoding="UTF-8"?>']
    if comment:
        head.append(f"<!-- {escape(comment)} -->")
    head.append(
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="11">'
    )
    frame = [
        f'<rect class="frame" x="{MARGIN}" y="{MARGIN}" width="{WIDTH - 2 * MARGIN}" '
        f'height="{HEIGHT - 2 * MARGIN}" fill="none" stroke="#444"/>',
        f'<text class="title" x="{WIDTH / 2}" y="{MARGIN / 2}" text-anchor="middle" font-size="14">{escape(title)}</text>',
        f'<text class="xlabel" x="{WIDTH / 2}" y="{HEIGHT - 12}" text-anchor="middle">{escape(xlabel)}</text>',
        f'<text class="ylabel" x="14" y="{HEIGHT / 2}" text-anchor="middle" '
        f'transform="rotate(-90 14 {HEIGHT / 2})">{escape(ylabel)}</text>',
    ]
    return "\n".join(head + frame + body + ["</svg>", ""])


def scatter_svg(
    points: np.ndarray,
    labels: Sequence[str],
    prototypes: np.ndarray,
    prototype_names: Sequence[str],
    title: str = "",
    axis_names: tuple[str, str] = ("x", "y"),
    comment: str | None = None,
) -> str:
    """Paintings as circles colored by painter, plus the chronological prototype trajectory."""
    points = np.asarray(points, dtype=np.float64)
    prototypes = np.asarray(prototypes, dtype=np.float64)
    both = np.vstack([points, prototypes])
    ax = _Axes(both[:, 0], both[:, 1])
    color = {name: PALETTE[i % len(PALETTE)] for i, name in enumerate(prototype_names)}
    body = []
    for (x, y), lab in zip(points, labels):
        body.append(
            f'<circle class="painting" cx="{_fmt(ax.px(x))}" cy="{_fmt(ax.py(y))}" r="3" '
            f'fill="{color.get(lab, "#000")}" fill-opacity="0.6"><title>{escape(str(lab))}</title></circle>'
        )
    path = " ".join(f"{_fmt(ax.px(x))},{_fmt(ax.py(y))}" for x, y in prototypes)
    body.append(f'<polyline class="trajectory" points="{path}" fill="none" stroke="#000" stroke-width="1.5"/>')
    for (x, y), name in zip(prototypes, prototype_names):
        body.append(
            f'<text class="prototype-label" x="{_fmt(ax.px(x) + 5)}" y="{_fmt(ax.py(y) - 5)}">{escape(name)}</text>'
        )
    return _document(body, title, axis_names[0], axis_names[1], comment)


def line_svg(
    series: dict[str, Sequence[float]],
    tick_labels: Sequence[str],
    title: str = "",
    ylabel: str = "",
    comment: str | None = None,
) -> str:
    """One polyline with point markers per named series over a shared categorical x axis."""
    n = len(tick_labels)
    xs = np.arange(n, dtype=np.float64)
    allv = np.concatenate([np.asarray(v, dtype=np.float64) for v in series.values()]) if series else np.zeros(0)
    ax = _Axes(xs, allv)
    body = []
    for i, lab in enumerate(tick_labels):
        x = _fmt(ax.px(i))
        body.append(f'<line class="tick" x1="{x}" y1="{HEIGHT - MARGIN}" x2="{x}" y2="{HEIGHT - MARGIN + 5}" stroke="#444"/>')
        body.append(
            f'<text class="tick-label" x="{x}" y="{HEIGHT - MARGIN + 8}" font-size="8" '
            f'transform="rotate(30 {x} {HEIGHT - MARGIN + 8})">{escape(lab)}</text>'
        )
    for s, (name, values) in enumerate(series.items()):
        col = PALETTE[s % len(PALETTE)]
        pts = [(ax.px(i), ax.py(v)) for i, v in enumerate(values)]
        body.append(
            f'<polyline class="series" data-name="{escape(name)}" '
            f'points="{" ".join(f"{_fmt(x)},{_fmt(y)}" for x, y in pts)}" fill="none" stroke="{col}"/>'
        )
        for x, y in pts:
            body.append(f'<circle class="point" data-series="{escape(name)}" cx="{_fmt(x)}" cy="{_fmt(y)}" r="2.5" fill="{col}"/>')
        body.append(
            f'<text class="legend" x="{WIDTH - MARGIN - 80}" y="{MARGIN + 14 + 14 * s}" fill="{col}">{escape(name)}</text>'
        )
    return _document(body, title, "", ylabel, comment)


def histogram_svg(histograms: dict[str, np.ndarray], title: str = "", comment: str | None = None) -> str:
    """Overlay of gray-level histograms, one polyline per painter."""
    levels = len(next(iter(histograms.values()))) if histograms else 256
    allv = np.concatenate(list(histograms.values())) if histograms else np.zeros(1)
    ax = _Axes(np.arange(levels, dtype=np.float64), np.append(allv, 0.0))
    body = []
    for s, (name, h) in enumerate(histograms.items()):
        col = PALETTE[s % len(PALETTE)]
        pts = " ".join(f"{_fmt(ax.px(i))},{_fmt(ax.py(v))}" for i, v in enumerate(h))
        body.append(f'<polyline class="histogram" data-name="{escape(name)}" points="{pts}" fill="none" stroke="{col}"/>')
        body.append(
            f'<text class="legend" x="{WIDTH - MARGIN - 110}" y="{MARGIN + 14 + 12 * s}" fill="{col}">{escape(name)}</text>'
        )
    return _document(body, title, "gray level", "mass", comment)


def write(path: str | Path, svg: str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(svg, encoding="utf-8")
    return path

"""SLIC superpixels, boundary tracing, convex hulls and segment shape statistics.

Contours are arrays of ``(x, y)`` points with ``x`` the column and ``y`` the
row of a pixel center. Traced contours have positive signed (shoelace) area
in those coordinates, i.e. they run counter-clockwise in the (x, y) frame,
which looks clockwise on screen because rows grow downward.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage
from skimage.measure import label as label_regions
from skimage.segmentation import slic

# Moore neighborhood, clockwise on screen starting at west: (drow, dcol).
_NEIGHBORS = ((0, -1), (-1, -1), (-1, 0), (-1, 1), (0, 1), (1, 1), (1, 0), (1, -1))
_FOUR = ndimage.generate_binary_structure(2, 1)


@dataclass
class Segment:
    """One superpixel. ``mask`` is cropped to the bounding box starting at ``offset`` (row, col)."""

    label: int
    mask: np.ndarray
    offset: tuple[int, int]
    contour: np.ndarray
    area_px: int
    perimeter_px: int
    hull_area_px: float


def slic_segment(
    rgb: np.ndarray,
    k: int = 128,
    compactness: float = 10.0,
    iterations: int = 10,
    min_size_factor: float = 0.25,
) -> np.ndarray:
    """SLIC label map with labels ``0..L-1``, each label 4-connected.

    Regions smaller than ``min_size_factor * N / k`` pixels are absorbed
    into the 4-adjacent region sharing the longest border with them.
    """
    rgb = np.asarray(rgb, dtype=np.float64)
    if rgb.ndim == 2:
        rgb = np.repeat(rgb[..., None], 3, axis=2)
    n_pixels = rgb.shape[0] * rgb.shape[1]
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    if k > n_pixels:
        raise ValueError(f"k={k} exceeds pixel count {n_pixels}")
    if compactness <= 0:
        raise ValueError(f"compactness must be > 0, got {compactness}")

    raw = slic(
        rgb,
        n_segments=k,
        compactness=compactness,
        max_num_iter=iterations,
        start_label=0,
        enforce_connectivity=False,
        convert2lab=True,
        channel_axis=-1,
    )
    return enforce_connectivity(raw, min_size=min_size_factor * n_pixels / k)


def enforce_connectivity(labels: np.ndarray, min_size: float) -> np.ndarray:
    comps = label_regions(labels, background=-1, connectivity=1) - 1
    sizes = np.bincount(comps.ravel())
    boxes = ndimage.find_objects(comps + 1)

    # Smallest first; ties by component index keep the merge order deterministic.
    for c in sorted(np.flatnonzero(sizes < min_size), key=lambda c: (sizes[c], c)):
        if sizes[c] == 0 or sizes[c] >= min_size:
            continue
        sl = boxes[c]
        r0 = max(sl[0].start - 1, 0)
        r1 = min(sl[0].stop + 1, comps.shape[0])
        c0 = max(sl[1].start - 1, 0)
        c1 = min(sl[1].stop + 1, comps.shape[1])
        window = comps[r0:r1, c0:c1]
        own = window == c
        ring = ndimage.binary_dilation(own, structure=_FOUR) & ~own
        neighbors, shared = np.unique(window[ring], return_counts=True)
        if neighbors.size == 0:
            continue
        # argmax picks the lowest label among equal border lengths.
        target = int(neighbors[np.argmax(shared)])
        window[own] = target
        sizes[target] += sizes[c]
        sizes[c] = 0
        tb = boxes[target]
        boxes[target] = (
            slice(min(tb[0].start, sl[0].start), max(tb[0].stop, sl[0].stop)),
            slice(min(tb[1].start, sl[1].start), max(tb[1].stop, sl[1].stop)),
        )
    return relabel_sequential(comps)


def relabel_sequential(labels: np.ndarray) -> np.ndarray:
    """Relabel to ``0..L-1`` in order of first appearance in raster scan."""
    values, first, inverse = np.unique(labels.ravel(), return_index=True, return_inverse=True)
    rank = np.empty(values.size, dtype=np.intp)
    rank[np.argsort(first, kind="stable")] = np.arange(values.size)
    return rank[inverse].reshape(labels.shape)


def _largest_component(mask: np.ndarray) -> np.ndarray:
    comps, n = ndimage.label(mask, structure=_FOUR)
    if n <= 1:
        return comps > 0
    sizes = np.bincount(comps.ravel())
    sizes[0] = 0
    return comps == int(np.argmax(sizes))


def trace_contour(mask: np.ndarray) -> np.ndarray:
    """Moore-neighbor trace of the outer boundary of the largest 4-connected component.

    Returns an ``(n, 2)`` integer array of ``(x, y)`` points. The closing
    edge back to the first point is implicit. Pixels on one-pixel-wide necks
    are visited once per side, as any closed boundary walk must.
    """
    mask = np.asarray(mask, dtype=bool)
    if not mask.any():
        raise ValueError("cannot trace an empty mask")
    comp = np.pad(_largest_component(mask), 1)

    rows, cols = np.nonzero(comp)
    start = (int(rows[0]), int(cols[0]))
    # The pixel west of the raster-first pixel is always background.
    p, back_dir = start, 0
    path = [start]
    first_move = None
    while True:
        for step in range(1, 9):
            d = (back_dir + step) % 8
            dr, dc = _NEIGHBORS[d]
            q = (p[0] + dr, p[1] + dc)
            if comp[q]:
                break
        else:
            break  # isolated pixel
        # Backtrack is the neighbor examined just before q, seen from q.
        prev = _NEIGHBORS[(d - 1) % 8]
        b = (p[0] + prev[0], p[1] + prev[1])
        move = (p, q)
        if first_move is None:
            first_move = move
        elif move == first_move:
            path.pop()
            break
        back_dir = _NEIGHBORS.index((b[0] - q[0], b[1] - q[1]))
        p = q
        path.append(p)

    pts = np.asarray(path, dtype=np.intp) - 1
    return np.column_stack([pts[:, 1], pts[:, 0]])


def contour_length(contour: np.ndarray) -> float:
    """Euclidean length of the closed polyline."""
    pts = np.asarray(contour, dtype=np.float64)
    if len(pts) < 2:
        return 0.0
    return float(np.linalg.norm(np.diff(pts, axis=0, append=pts[:1]), axis=1).sum())


def signed_area(polygon: np.ndarray) -> float:
    pts = np.asarray(polygon, dtype=np.float64)
    if len(pts) < 3:
        return 0.0
    x, y = pts[:, 0], pts[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y))


def convex_hull(points: np.ndarray) -> tuple[np.ndarray, float]:
    """Monotone-chain hull. Returns ``(vertices, area)``; vertices have positive orientation.

    Collinear or repeated input yields a degenerate hull with area 0.
    """
    pts = np.unique(np.asarray(points, dtype=np.float64).reshape(-1, 2), axis=0)
    if len(pts) < 3:
        return pts, 0.0

    def cross(o, a, b):
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])

    lower: list = []
    for p in pts:
        while len(lower) >= 2 and cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    upper: list = []
    for p in pts[::-1]:
        while len(upper) >= 2 and cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    hull = np.asarray(lower[:-1] + upper[:-1])
    return hull, abs(signed_area(hull))


def pixel_hull(contour: np.ndarray) -> tuple[np.ndarray, float]:
    """Hull of the pixel squares (not centers) along a contour, so a filled
    rectangle's hull area equals its pixel count."""
    pts = np.asarray(contour, dtype=np.float64).reshape(-1, 2)
    corners = (pts[:, None, :] + np.array([[-.5, -.5], [.5, -.5], [.5, .5], [-.5, .5]])).reshape(-1, 2)
    return convex_hull(corners)


def make_segment(label: int, mask: np.ndarray, offset: tuple[int, int] = (0, 0)) -> Segment:
    contour = trace_contour(mask)
    _, hull_area = pixel_hull(contour)
    contour = contour + np.array([offset[1], offset[0]])
    return Segment(
        label=label,
        mask=mask,
        offset=offset,
        contour=contour,
        area_px=int(np.count_nonzero(mask)),
        perimeter_px=len(np.unique(contour, axis=0)),
        hull_area_px=hull_area,
    )


def extract_segments(labels: np.ndarray) -> list[Segment]:
    segments = []
    for idx, sl in enumerate(ndimage.find_objects(labels + 1)):
        if sl is None:
            continue
        mask = labels[sl] == idx
        segments.append(make_segment(idx, mask, (sl[0].start, sl[1].start)))
    return segments


SHAPE_FEATURES = (
    "mean_segment_perimeter",
    "mean_segment_area",
    "mean_circularity",
    "number_of_segments",
    "mean_convex_hull_area",
    "mean_convex_hull_area_ratio",
)


def shape_stats(segments: list[Segment]) -> np.ndarray:
    """The six shape features, in ``SHAPE_FEATURES`` order.

    Segments of at most one pixel count toward the segment number but are
    left out of the means.
    """
    if not segments:
        raise ValueError("shape_stats needs at least one segment")
    usable = [s for s in segments if s.area_px > 1]
    count = float(len(segments))
    if not usable:
        return np.array([0.0, 0.0, 0.0, count, 0.0, 0.0])
    per = np.array([s.perimeter_px for s in usable], dtype=np.float64)
    area = np.array([s.area_px for s in usable], dtype=np.float64)
    hull = np.array([s.hull_area_px for s in usable], dtype=np.float64)
    return np.array([
        per.mean(),
        area.mean(),
        (per ** 2 / area).mean(),
        count,
        hull.mean(),
        (hull / area).mean(),
    ])

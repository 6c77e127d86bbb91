"""Scatter matrices, pairwise feature ranking, LDA and repeated split validation."""
from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np
import scipy.linalg

logger = logging.getLogger(__name__)

RIDGE = 1e-8


class DegenerateDataError(ArithmeticError):
    """Scatter statistics are undefined for the given data."""


@dataclass
class FeatureMatrix:
    values: np.ndarray
    labels: np.ndarray
    names: tuple[str, ...] = ()

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        self.labels = np.asarray(self.labels)
        if self.values.ndim != 2 or len(self.values) != len(self.labels):
            raise ValueError("values must be N x d with one label per row")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("feature matrix has non-finite entries")

    @property
    def classes(self) -> np.ndarray:
        return np.unique(self.labels)

    @property
    def class_counts(self) -> dict:
        cls, n = np.unique(self.labels, return_counts=True)
        return dict(zip(cls.tolist(), n.tolist()))


@dataclass
class ScatterStats:
    class_scatter: list[np.ndarray]
    within: np.ndarray
    between: np.ndarray
    class_means: np.ndarray
    global_mean: np.ndarray
    class_sizes: np.ndarray
    alpha: float = float("nan")


@dataclass
class LdaProjection:
    """``basis`` columns are unit-norm discriminant directions (d x dims).

    ``axis_scale`` holds the within-class spread along each direction;
    classification divides projected coordinates by it, which makes the
    predicted labels independent of any invertible linear map of the data.
    """

    basis: np.ndarray
    eigenvalues: np.ndarray
    classes: np.ndarray
    centroids: np.ndarray
    axis_scale: np.ndarray
    mean: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def transform(self, x: np.ndarray) -> np.ndarray:
        return np.asarray(x, dtype=np.float64) @ self.basis


def standardize(values: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Z-score columns with the population standard deviation.

    Returns ``(z, constant)`` where ``constant`` flags zero-variance columns,
    which are mapped to 0.
    """
    x = np.asarray(values, dtype=np.float64)
    mu = x.mean(axis=0)
    sd = x.std(axis=0)
    constant = sd <= 1e-12 * np.maximum(np.abs(mu), 1.0)
    z = np.zeros_like(x)
    z[:, ~constant] = (x[:, ~constant] - mu[~constant]) / sd[~constant]
    return z, constant


def scatter_stats(values: np.ndarray, labels: np.ndarray, subset=None) -> ScatterStats:
    x = np.asarray(values, dtype=np.float64)
    if subset is not None:
        subset = list(subset)
        if not subset:
            raise ValueError("feature subset is empty")
        x = x[:, subset]
    labels = np.asarray(labels)
    classes = np.unique(labels)
    if len(x) == 0:
        raise DegenerateDataError("no samples")
    overall = x.mean(axis=0)
    d = x.shape[1]
    within = np.zeros((d, d))
    between = np.zeros((d, d))
    per_class, means, sizes = [], [], []
    for c in classes:
        xc = x[labels == c]
        mu = xc.mean(axis=0)
        dev = xc - mu
        s = dev.T @ dev
        per_class.append(s)
        within += s
        off = (mu - overall)[:, None]
        between += len(xc) * (off @ off.T)
        means.append(mu)
        sizes.append(len(xc))
    return ScatterStats(per_class, within, between, np.array(means), overall, np.array(sizes))


def _regularized(within: np.ndarray, ridge: float = RIDGE) -> np.ndarray:
    """Add ``ridge * tr(S_w) / d`` to the diagonal when S_w is numerically singular.

    Well-conditioned matrices (smallest eigenvalue above ``ridge`` times the
    largest) are returned unchanged.
    """
    d = within.shape[0]
    trace = np.trace(within)
    if not np.any(within) or trace <= 0:
        raise DegenerateDataError("within-class scatter is identically zero")
    eig = np.linalg.eigvalsh(within)
    if eig[0] > ridge * eig[-1]:
        return within
    return within + ridge * trace / d * np.eye(d)


def alpha(stats: ScatterStats, ridge: float = RIDGE) -> float:
    """tr(S_b S_w^-1); see ``_regularized`` for the ridge rule."""
    sw = _regularized(stats.within, ridge)
    # tr(S_b S_w^-1) = tr(S_w^-1 S_b) since both are symmetric
    value = float(np.trace(np.linalg.solve(sw, stats.between)))
    stats.alpha = value
    return value


def pair_alphas(values: np.ndarray, labels: np.ndarray, ridge: float = RIDGE) -> np.ndarray:
    """α for every column pair as a symmetric d x d matrix (diagonal is NaN).

    Works on 2 x 2 sub-blocks of the full scatter matrices, so it needs one
    pass over the data regardless of the pair count.
    """
    st = scatter_stats(values, labels)
    sw, sb = st.within, st.between
    a = np.diag(sw)[:, None]
    c = np.diag(sw)[None, :]
    b = sw
    trace = a + c
    with np.errstate(divide="ignore", invalid="ignore"):
        big = trace / 2.0 + np.sqrt(((a - c) / 2.0) ** 2 + b * b)
        small = (a * c - b * b) / big
    reg = np.where(small > ridge * big, 0.0, ridge * trace / 2.0)
    a = a + reg
    c = c + reg
    det = a * c - b * b
    # inverse of [[a, b], [b, c]] is [[c, -b], [-b, a]] / det
    ba = np.diag(sb)[:, None]
    bc = np.diag(sb)[None, :]
    bb = sb
    with np.errstate(divide="ignore", invalid="ignore"):
        out = (ba * c - 2.0 * bb * b + bc * a) / det
    out[trace <= 0] = np.nan
    lower = np.tril_indices(out.shape[0], -1)
    out[lower] = out.T[lower]
    np.fill_diagonal(out, np.nan)
    return out


def rank_pairs(values: np.ndarray, labels: np.ndarray, names=None, standardized: bool = False):
    """All column pairs sorted by descending α.

    Columns are z-scored first unless ``standardized`` is set. Ties keep
    ``(a, b)`` lexicographic order. Returns ``[(a, b, alpha), ...]`` with
    feature names in place of indices when ``names`` is given.
    """
    x = np.asarray(values, dtype=np.float64)
    if x.shape[1] < 2:
        raise ValueError("need at least two features to rank pairs")
    if not standardized:
        x, _ = standardize(x)
    table = pair_alphas(x, labels)
    pairs = list(combinations(range(x.shape[1]), 2))
    scores = np.array([table[a, b] for a, b in pairs])
    if np.isnan(scores).any():
        bad = [pairs[i] for i in np.flatnonzero(np.isnan(scores))][:5]
        logger.warning("%d pairs have degenerate within-class scatter, e.g. %s",
                       int(np.isnan(scores).sum()), bad)
        scores = np.where(np.isnan(scores), -np.inf, scores)
    order = sorted(range(len(pairs)), key=lambda i: (-scores[i], pairs[i]))
    out = []
    for i in order:
        a, b = pairs[i]
        if names is not None:
            a, b = names[a], names[b]
        out.append((a, b, float(scores[i])))
    return out


def lda_fit(values: np.ndarray, labels: np.ndarray, dims: int = 2, ridge: float = RIDGE) -> LdaProjection:
    """Top ``dims`` generalized eigenvectors of S_b v = λ S_w v."""
    x = np.asarray(values, dtype=np.float64)
    st = scatter_stats(x, labels)
    sw = _regularized(st.within, ridge)
    evals, evecs = scipy.linalg.eigh(st.between, sw)
    order = np.argsort(evals, kind="stable")[::-1]
    evals, evecs = evals[order], evecs[:, order]
    dims = min(dims, x.shape[1])
    n_pos = int(np.sum(evals > 1e-12 * max(evals[0], 1.0)))
    if n_pos < dims:
        warnings.warn(
            f"only {n_pos} positive discriminant eigenvalues; padding with the next eigenvectors",
            stacklevel=2,
        )
    basis = evecs[:, :dims].copy()
    basis /= np.linalg.norm(basis, axis=0)
    for j in range(dims):
        if basis[np.argmax(np.abs(basis[:, j])), j] < 0:
            basis[:, j] = -basis[:, j]
    scale = np.sqrt(np.einsum("ij,ik,kj->j", basis, sw, basis))
    centroids = st.class_means @ basis
    return LdaProjection(basis, evals[:dims], np.unique(np.asarray(labels)), centroids, scale, st.global_mean)


def lda_classify(model: LdaProjection, x: np.ndarray) -> np.ndarray:
    """Nearest projected class centroid; ties go to the lowest class index.

    Accepts one vector or a 2-D batch.
    """
    x = np.asarray(x, dtype=np.float64)
    single = x.ndim == 1
    z = np.atleast_2d(x) @ model.basis / model.axis_scale
    cz = model.centroids / model.axis_scale
    dist = ((z[:, None, :] - cz[None, :, :]) ** 2).sum(axis=2)
    pred = model.classes[np.argmin(dist, axis=1)]
    return pred[0] if single else pred


@dataclass
class ConfusionMatrix:
    """Mean counts over repetitions; rows are true classes, columns predictions."""

    matrix: np.ndarray
    classes: np.ndarray
    repetitions: int
    seed: int

    @property
    def accuracy(self) -> float:
        return float(np.trace(self.matrix) / self.matrix.sum())


def split_class(indices: np.ndarray, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """Fisher-Yates shuffle then halve; the train half gets ``n // 2`` samples."""
    perm = np.array(indices, copy=True)
    rng.shuffle(perm)
    half = len(perm) // 2
    return perm[:half], perm[half:]


def cross_validate(
    values: np.ndarray,
    labels: np.ndarray,
    repetitions: int = 100,
    seed: int = 0,
    dims: int = 2,
) -> ConfusionMatrix:
    """Repeated per-class 50/50 splits: fit LDA on one half, classify the other.

    Each fold z-scores features with training statistics. The generator is
    numpy's PCG64 seeded with ``seed``; splits are drawn class by class in
    sorted class order, so the result depends only on the inputs and seed.
    """
    x = np.asarray(values, dtype=np.float64)
    labels = np.asarray(labels)
    classes = np.unique(labels)
    members = [np.flatnonzero(labels == c) for c in classes]
    small = [c for c, m in zip(classes, members) if len(m) < 2]
    if small:
        raise ValueError(f"classes with fewer than 2 samples: {small}")
    index_of = {c: i for i, c in enumerate(classes.tolist())}

    rng = np.random.Generator(np.random.PCG64(seed))
    total = np.zeros((len(classes), len(classes)))
    for _ in range(repetitions):
        parts = [split_class(m, rng) for m in members]
        train = np.concatenate([p[0] for p in parts])
        test = np.concatenate([p[1] for p in parts])
        mu = x[train].mean(axis=0)
        sd = x[train].std(axis=0)
        sd[sd <= 1e-12] = 1.0
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            model = lda_fit((x[train] - mu) / sd, labels[train], dims)
        pred = lda_classify(model, (x[test] - mu) / sd)
        for t, p in zip(labels[test].tolist(), pred.tolist()):
            total[index_of[t], index_of[p]] += 1
    return ConfusionMatrix(total / repetitions, classes, repetitions, seed)

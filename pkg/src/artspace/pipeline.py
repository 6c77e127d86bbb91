"""Stage orchestration: extract -> rank -> lda -> measures -> report.

Every stage reads its inputs from the output directory and writes plain
CSV/JSON/SVG back into it. Each file starts with a ``# config <digest>``
comment (an XML comment in SVGs) naming the configuration that produced it.
"""
from __future__ import annotations

import csv
import dataclasses
import hashlib
import json
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import analysis, corpus, measures, plots
from .features import FEATURE_NAMES, ExtractionConfig, extract_features

logger = logging.getLogger(__name__)

SPACES = ("best-pair", "lda")
META_COLUMNS = ("painter", "title", "year")


class MissingArtifactError(FileNotFoundError):
    pass


class PaintingError(RuntimeError):
    """Feature extraction failed for one painting."""


@dataclass
class PipelineConfig:
    manifest: str = "manifest.csv"
    out: str = "out"
    seed: int = 0
    slic_k: int = 128
    slic_compactness: float = 10.0
    slic_iterations: int = 10
    gamma: float = 1.5
    smoothing: float = 0.02
    glcm_levels: int = 64
    repetitions: int = 100
    space: str = "best-pair"
    jobs: int = 1
    image_size: int = corpus.SIZE

    # Excluded from the digest: paths, parallelism, and the mirrored space (tagged separately).
    _volatile = ("manifest", "out", "jobs", "space")

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        checks = [
            (self.seed >= 0 and self.seed < 2 ** 64, "seed must be an unsigned 64-bit integer"),
            (self.slic_k >= 1, "slic_k must be >= 1"),
            (self.slic_compactness > 0, "slic_compactness must be > 0"),
            (self.slic_iterations >= 1, "slic_iterations must be >= 1"),
            (self.gamma > 0, "gamma must be > 0"),
            (0 <= self.smoothing < 1, "smoothing must be in [0, 1)"),
            (2 <= self.glcm_levels <= 256, "glcm_levels must be in 2..256"),
            (self.repetitions >= 1, "repetitions must be >= 1"),
            (self.space in SPACES, f"space must be one of {SPACES}"),
            (self.jobs >= 1, "jobs must be >= 1"),
            (self.image_size >= 16, "image_size must be >= 16"),
        ]
        for ok, msg in checks:
            if not ok:
                raise ValueError(msg)

    @property
    def extraction(self) -> ExtractionConfig:
        return ExtractionConfig(
            slic_k=self.slic_k,
            slic_compactness=self.slic_compactness,
            slic_iterations=self.slic_iterations,
            gamma=self.gamma,
            smoothing=self.smoothing,
            glcm_levels=self.glcm_levels,
        )

    def as_dict(self) -> dict:
        return dataclasses.asdict(self)

    def digest(self) -> str:
        stable = {k: v for k, v in self.as_dict().items() if k not in self._volatile}
        return _sha256(json.dumps(stable, sort_keys=True).encode())[:16]

    def extraction_digest(self) -> str:
        params = dataclasses.asdict(self.extraction) | {"image_size": self.image_size}
        return _sha256(json.dumps(params, sort_keys=True).encode())[:16]

    @classmethod
    def from_file(cls, path: str | Path, **overrides) -> "PipelineConfig":
        try:
            import tomllib
        except ModuleNotFoundError:  # Python < 3.11
            import tomli as tomllib

        with open(path, "rb") as fh:
            raw = tomllib.load(fh)
        flat: dict = {}
        for key, value in raw.items():
            if isinstance(value, dict):
                for sub, v in value.items():
                    flat[f"{key}_{sub}"] = v
            else:
                flat[key] = value
        aliases = {"curvature_gamma": "gamma", "curvature_smoothing": "smoothing",
                   "cv_repetitions": "repetitions"}
        flat = {aliases.get(k, k): v for k, v in flat.items()}
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(flat) - known)
        if unknown:
            raise ValueError(f"unknown config keys in {path}: {unknown}")
        base = Path(path).parent
        if "manifest" in flat and not Path(flat["manifest"]).is_absolute():
            flat["manifest"] = str(base / flat["manifest"])
        flat.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**flat)


def _sha256(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


# ---------------------------------------------------------------- artifacts

class Layout:
    def __init__(self, out: str | Path):
        self.root = Path(out)

    features = property(lambda self: self.root / "features.csv")
    pairs = property(lambda self: self.root / "pairs.csv")
    lda = property(lambda self: self.root / "lda.csv")
    confusion = property(lambda self: self.root / "confusion.csv")
    measures = property(lambda self: self.root / "measures.csv")
    report = property(lambda self: self.root / "report.json")
    cache = property(lambda self: self.root / "cache")
    images = property(lambda self: self.root / "images")
    plots = property(lambda self: self.root / "plots")
    histograms = property(lambda self: self.root / "histograms")

    def measures_for(self, space: str) -> Path:
        return self.root / f"measures-{space}.csv"

    def require(self, path: Path, stage: str) -> Path:
        if not path.is_file():
            raise MissingArtifactError(f"{path} not found: run {stage} first")
        return path


def _header(digest: str, extra: str | None = None) -> str:
    lines = f"# config {digest}\n"
    if extra:
        lines += f"# {extra}\n"
    return lines


def _num(v: float) -> str:
    return repr(float(v))


def _read_rows(path: Path) -> list[list[str]]:
    with path.open(newline="", encoding="utf-8") as fh:
        return [row for row in csv.reader(line for line in fh if not line.startswith("#"))]


def _write_csv(path: Path, header: str, rows: list[list]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as fh:
        fh.write(header)
        w = csv.writer(fh, lineterminator="\n")
        w.writerows(rows)


def read_features(path: Path) -> tuple[analysis.FeatureMatrix, list[dict]]:
    rows = _read_rows(path)
    head, body = rows[0], rows[1:]
    if tuple(head[: len(FEATURE_NAMES)]) != FEATURE_NAMES:
        raise ValueError(f"{path}: columns do not match the 93-feature schema")
    n = len(FEATURE_NAMES)
    values = np.array([[float(v) for v in r[:n]] for r in body]).reshape(len(body), n)
    meta = [dict(zip(META_COLUMNS, r[n:])) for r in body]
    labels = np.array([m["painter"] for m in meta])
    return analysis.FeatureMatrix(values, labels, FEATURE_NAMES), meta


# ---------------------------------------------------------------- fetch

def _remote_name(url: str) -> str:
    suffix = Path(url.split("?")[0]).suffix.lower() or ".img"
    return _sha256(url.encode())[:20] + suffix


def fetch(config: PipelineConfig) -> list[Path]:
    """Download URL sources into ``out/images``; local sources are left alone."""
    layout = Layout(config.out)
    entries = corpus.load_manifest(config.manifest)
    fetched = []
    for e in entries:
        if not e.source.startswith(("http://", "https://")):
            continue
        target = layout.images / _remote_name(e.source)
        if not target.exists():
            target.parent.mkdir(parents=True, exist_ok=True)
            target.write_bytes(corpus.read_bytes(e.source))
            logger.info("fetched %s", e.source)
        fetched.append(target)
    return fetched


def _image_bytes(entry: corpus.ManifestEntry, config: PipelineConfig) -> bytes:
    if entry.source.startswith(("http://", "https://")):
        local = Layout(config.out).images / _remote_name(entry.source)
        if local.exists():
            return local.read_bytes()
    return corpus.read_bytes(entry.source, Path(config.manifest).parent)


# ---------------------------------------------------------------- extract

def _extract_one(data: bytes, config: PipelineConfig) -> tuple[list[float], list[float]]:
    pre = corpus.preprocess(corpus.decode_image(data), config.image_size)
    vec = extract_features(pre, config.extraction)
    hist = corpus.gray_histogram(pre.luminance)
    return vec.tolist(), hist.tolist()


def _cached_extract(args) -> tuple[list[float], list[float]]:
    entry, config = args
    layout = Layout(config.out)
    try:
        data = _image_bytes(entry, config)
        key = f"{_sha256(data)[:24]}-{config.extraction_digest()}.json"
        path = layout.cache / key
        if path.is_file():
            cached = json.loads(path.read_text())
            return cached["features"], cached["histogram"]
        vec, hist = _extract_one(data, config)
        layout.cache.mkdir(parents=True, exist_ok=True)
        tmp = path.with_suffix(".tmp")
        tmp.write_text(json.dumps({"features": vec, "histogram": hist}))
        tmp.replace(path)
        return vec, hist
    except Exception as exc:
        raise PaintingError(
            f"painting {entry.painter_id!r} / {entry.painting_title!r} ({entry.source}): {exc}"
        ) from exc


def extract(config: PipelineConfig) -> Path:
    """Compute features for every manifest row; writes features.csv and per-painter histograms."""
    layout = Layout(config.out)
    entries = corpus.load_manifest(config.manifest)
    if not entries:
        raise ValueError(f"manifest {config.manifest} has no paintings")
    tasks = [(e, config) for e in entries]
    if config.jobs > 1:
        with ProcessPoolExecutor(max_workers=config.jobs) as pool:
            results = list(pool.map(_cached_extract, tasks))
    else:
        results = [_cached_extract(t) for t in tasks]

    digest = config.digest()
    rows = [
        [_num(v) for v in vec] + [e.painter_id, e.painting_title, e.year]
        for e, (vec, _) in zip(entries, results)
    ]
    _write_csv(layout.features, _header(digest), [list(FEATURE_NAMES) + list(META_COLUMNS)] + rows)

    per_painter: dict[str, list[np.ndarray]] = {}
    for e, (_, hist) in zip(entries, results):
        per_painter.setdefault(e.painter_id, []).append(np.asarray(hist))
    layout.histograms.mkdir(parents=True, exist_ok=True)
    for painter in corpus.painter_order(entries):
        mean = corpus.mean_histogram(per_painter[painter])
        corpus.write_histogram_csv(layout.histograms / f"{_slug(painter)}.csv", mean, f"config {digest}")
    return layout.features


def _slug(name: str) -> str:
    return "".join(ch if ch.isalnum() else "_" for ch in name).strip("_") or "painter"


# ---------------------------------------------------------------- rank / lda

def rank(config: PipelineConfig) -> Path:
    layout = Layout(config.out)
    fm, _ = read_features(layout.require(layout.features, "extract"))
    ranked = analysis.rank_pairs(fm.values, fm.labels, names=FEATURE_NAMES)
    rows = [["rank", "feature_a", "feature_b", "alpha"]]
    rows += [[i + 1, a, b, _num(al)] for i, (a, b, al) in enumerate(ranked)]
    _write_csv(layout.pairs, _header(config.digest()), rows)
    return layout.pairs


def _ordering(config: PipelineConfig) -> dict[str, int]:
    entries = corpus.load_manifest(config.manifest)
    return {p: i for i, p in enumerate(corpus.painter_order(entries))}


def lda(config: PipelineConfig) -> Path:
    """LDA plane over all paintings (lda.csv) and the repeated-split confusion matrix."""
    layout = Layout(config.out)
    fm, meta = read_features(layout.require(layout.features, "extract"))
    order = list(_ordering(config))
    z, _ = analysis.standardize(fm.values)
    model = analysis.lda_fit(z, fm.labels, dims=2)
    proj = model.transform(z)
    digest = config.digest()
    rows = [["lda_1", "lda_2"] + list(META_COLUMNS)]
    rows += [[_num(a), _num(b), m["painter"], m["title"], m["year"]] for (a, b), m in zip(proj, meta)]
    _write_csv(layout.lda, _header(digest, "eigenvalues " + " ".join(_num(v) for v in model.eigenvalues)), rows)

    cm = analysis.cross_validate(fm.values, fm.labels, config.repetitions, config.seed)
    pos = {c: i for i, c in enumerate(cm.classes.tolist())}
    idx = [pos[p] for p in order]
    mat = cm.matrix[np.ix_(idx, idx)]
    rows = [["true\\predicted"] + order]
    rows += [[name] + [_num(v) for v in row] for name, row in zip(order, mat)]
    _write_csv(layout.confusion, _header(digest, f"seed {config.seed} repetitions {config.repetitions}"), rows)
    return layout.confusion


# ---------------------------------------------------------------- measures

def active_space(config: PipelineConfig, space: str) -> tuple[np.ndarray, np.ndarray, tuple[str, str]]:
    """2-D coordinates of every painting in ``space``, their labels and axis names."""
    layout = Layout(config.out)
    fm, _ = read_features(layout.require(layout.features, "extract"))
    if space == "best-pair":
        pairs = _read_rows(layout.require(layout.pairs, "rank"))
        a, b = pairs[1][1], pairs[1][2]
        z, _ = analysis.standardize(fm.values)
        cols = [FEATURE_NAMES.index(a), FEATURE_NAMES.index(b)]
        return z[:, cols], fm.labels, (a, b)
    if space == "lda":
        rows = _read_rows(layout.require(layout.lda, "lda"))
        coords = np.array([[float(r[0]), float(r[1])] for r in rows[1:]])
        return coords, np.array([r[2] for r in rows[1:]]), ("lda_1", "lda_2")
    raise ValueError(f"unknown space {space!r}")


def measures_stage(config: PipelineConfig, space: str | None = None) -> Path:
    """Opposition/skewness per move and counter-dialectics per triple in one space.

    Writes ``measures-<space>.csv`` and mirrors it to ``measures.csv``.
    """
    space = space or config.space
    layout = Layout(config.out)
    coords, labels, _ = active_space(config, space)
    series = measures.build_prototypes(coords, labels, _ordering(config))
    rows: list[list] = [["move", "from", "to", "W", "s"]]
    for n, m in enumerate(measures.all_moves(series), 1):
        rows.append([n, m.source, m.target, _num(m.W), _num(m.s)])
    rows.append(["triple", "i", "j", "k", "d"])
    for n, t in enumerate(measures.all_triples(series), 1):
        rows.append([n, t.i, t.j, t.k, _num(t.d)])
    header = _header(config.digest(), f"space {space}")
    _write_csv(layout.measures_for(space), header, rows)
    _write_csv(layout.measures, header, rows)
    return layout.measures_for(space)


def read_measures(path: Path) -> tuple[list[dict], list[dict]]:
    rows = _read_rows(path)
    split = next(i for i, r in enumerate(rows) if r and r[0] == "triple")
    moves = [dict(zip(rows[0], r)) for r in rows[1:split]]
    triples = [dict(zip(rows[split], r)) for r in rows[split + 1:]]
    for m in moves:
        m["W"], m["s"] = float(m["W"]), float(m["s"])
    for t in triples:
        t["d"] = float(t["d"])
    return moves, triples


# ---------------------------------------------------------------- report

@dataclass
class RunReport:
    config: dict
    config_digest: str
    features_digest: str
    paintings: int
    painters: list[str]
    top_pair: dict
    confusion: dict
    measures: dict
    timing: dict = field(default_factory=dict)

    def to_json(self) -> str:
        return json.dumps(dataclasses.asdict(self), indent=2, sort_keys=True)


def report(config: PipelineConfig, timing: dict | None = None) -> RunReport:
    """Collect every artifact into report.json and draw the SVG figures."""
    layout = Layout(config.out)
    digest = config.digest()
    fm, _ = read_features(layout.require(layout.features, "extract"))
    pairs = _read_rows(layout.require(layout.pairs, "rank"))
    conf = _read_rows(layout.require(layout.confusion, "lda"))
    order = list(_ordering(config))

    cm = np.array([[float(v) for v in r[1:]] for r in conf[1:]])
    tables = {}
    for space in SPACES:
        path = layout.measures_for(space)
        if not path.is_file():
            continue
        moves, triples = read_measures(path)
        tables[space] = {"moves": moves, "triples": triples}
        coords, labels, axes = active_space(config, space)
        series = measures.build_prototypes(coords, labels, _ordering(config))
        comment = f"config {digest} space {space}"
        plots.write(layout.plots / f"scatter-{space}.svg", plots.scatter_svg(
            coords, labels, series.matrix, series.painters, f"Painting space ({space})", axes, comment))
        ticks = [f"{m['from']} -> {m['to']}" for m in moves]
        plots.write(layout.plots / f"moves-{space}.svg", plots.line_svg(
            {"W": [m["W"] for m in moves], "s": [m["s"] for m in moves]}, ticks,
            f"Opposition and skewness ({space})", "index", comment))
        ticks = [f"{t['i']} -> {t['j']} -> {t['k']}" for t in triples]
        plots.write(layout.plots / f"triples-{space}.svg", plots.line_svg(
            {"d": [t["d"] for t in triples]}, ticks, f"Counter-dialectics ({space})", "d", comment))
    if not tables:
        raise MissingArtifactError(f"no measures-*.csv in {layout.root}: run measures first")

    hists = {}
    for painter in order:
        path = layout.histograms / f"{_slug(painter)}.csv"
        if path.is_file():
            hists[painter] = np.array([float(r[1]) for r in _read_rows(path)[1:]])
    if hists:
        plots.write(layout.plots / "histograms.svg",
                    plots.histogram_svg(hists, "Mean gray-level histograms", f"config {digest}"))

    rep = RunReport(
        config=config.as_dict(),
        config_digest=digest,
        features_digest=_sha256(layout.features.read_bytes()),
        paintings=len(fm.values),
        painters=order,
        top_pair={"feature_a": pairs[1][1], "feature_b": pairs[1][2], "alpha": float(pairs[1][3])},
        confusion={
            "seed": config.seed,
            "repetitions": config.repetitions,
            "diagonal": np.diag(cm).tolist(),
            "accuracy": float(np.trace(cm) / cm.sum()),
        },
        measures=tables,
        timing=timing or {},
    )
    layout.report.write_text(rep.to_json() + "\n", encoding="utf-8")
    return rep


def run_pipeline(config: PipelineConfig) -> RunReport:
    """Every stage in order; both measure spaces are computed, ``config.space`` is mirrored to measures.csv."""
    timing = {}
    stages = [
        ("extract", lambda: extract(config)),
        ("rank", lambda: rank(config)),
        ("lda", lambda: lda(config)),
    ] + [
        (f"measures-{s}", lambda s=s: measures_stage(config, s))
        for s in sorted(SPACES, key=lambda s: s == config.space)
    ]
    for name, stage in stages:
        t0 = time.perf_counter()
        stage()
        timing[name] = round(time.perf_counter() - t0, 3)
    return report(config, timing)

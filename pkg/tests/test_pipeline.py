import csv
import json
import re
import shutil

import numpy as np
import pytest

from artspace import FEATURE_NAMES, cli, pipeline
from conftest import IMAGE_SIZE, RUN_ARGS

ARTIFACTS = ("features.csv", "pairs.csv", "confusion.csv", "measures.csv",
             "measures-lda.csv", "measures-best-pair.csv", "lda.csv")


def rows(path):
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.reader(line for line in fh if not line.startswith("#")))


def run(*argv):
    return cli.run(list(argv))


def config_for(manifest, out, **kw):
    return pipeline.PipelineConfig(manifest=str(manifest), out=str(out), image_size=IMAGE_SIZE,
                                   repetitions=20, seed=7, **kw)


class TestFullRun:
    def test_features_schema(self, pipeline_run):
        table = rows(pipeline_run / "features.csv")
        assert table[0][:93] == list(FEATURE_NAMES)
        assert table[0][93:] == ["painter", "title", "year"]
        assert len(table) == 1 + 120
        assert all(np.isfinite(float(v)) for r in table[1:] for v in r[:93])

    def test_confusion_shape(self, pipeline_run):
        table = rows(pipeline_run / "confusion.csv")
        assert len(table) == 13 and all(len(r) == 13 for r in table)
        assert table[0][1:] == [f"painter_{i:02d}" for i in range(12)]
        m = np.array([[float(v) for v in r[1:]] for r in table[1:]])
        assert np.allclose(m.sum(axis=1), 5.0, atol=1e-9)

    def test_move_and_triple_counts(self, pipeline_run):
        moves, triples = pipeline.read_measures(pipeline_run / "measures.csv")
        assert len(moves) == 11 and len(triples) == 10
        assert (moves[0]["W"], moves[0]["s"]) == (1.0, 0.0)
        assert moves[0]["from"] == "painter_00" and moves[-1]["to"] == "painter_11"

    def test_pairs_table(self, pipeline_run):
        table = rows(pipeline_run / "pairs.csv")
        assert table[0] == ["rank", "feature_a", "feature_b", "alpha"]
        assert len(table) - 1 == 93 * 92 // 2
        alphas = [float(r[3]) for r in table[1:]]
        assert all(a >= b for a, b in zip(alphas, alphas[1:]))

    def test_report(self, pipeline_run):
        rep = json.loads((pipeline_run / "report.json").read_text())
        assert rep["paintings"] == 120 and len(rep["painters"]) == 12
        assert rep["confusion"]["seed"] == 7 and rep["confusion"]["repetitions"] == 20
        assert set(rep["measures"]) == {"lda", "best-pair"}
        assert rep["config"]["image_size"] == IMAGE_SIZE
        top = rows(pipeline_run / "pairs.csv")[1]
        assert [rep["top_pair"]["feature_a"], rep["top_pair"]["feature_b"]] == top[1:3]

    def test_every_file_has_digest_header(self, pipeline_run):
        digest = json.loads((pipeline_run / "report.json").read_text())["config_digest"]
        files = [p for p in pipeline_run.rglob("*") if p.suffix in (".csv", ".svg")]
        assert len(files) > 10
        for path in files:
            assert f"config {digest}" in path.read_text().splitlines()[1 if path.suffix == ".svg" else 0]


class TestSvg:
    def test_scatter_counts(self, pipeline_run):
        svg = (pipeline_run / "plots" / "scatter-lda.svg").read_text()
        assert svg.count('class="painting"') == 120
        (points,) = re.findall(r'<polyline class="trajectory" points="([^"]*)"', svg)
        assert len(points.split()) == 12

    def test_line_plots(self, pipeline_run):
        moves = (pipeline_run / "plots" / "moves-best-pair.svg").read_text()
        assert moves.count('class="tick"') == 11
        assert moves.count('data-series="W"') == 11 and moves.count('data-series="s"') == 11
        triples = (pipeline_run / "plots" / "triples-lda.svg").read_text()
        assert triples.count('class="point"') == 10

    def test_histograms(self, pipeline_run):
        svg = (pipeline_run / "plots" / "histograms.svg").read_text()
        assert svg.count("<polyline") == 12


class TestDeterminism:
    def test_rerun_is_byte_identical(self, pipeline_run, warm_out, synthetic_corpus):
        assert run("all", "--manifest", str(synthetic_corpus), "--out", str(warm_out), *RUN_ARGS) == 0
        for name in ARTIFACTS:
            assert (warm_out / name).read_bytes() == (pipeline_run / name).read_bytes(), name

    @pytest.mark.slow
    def test_cold_cache_reproduces(self, pipeline_run, warm_out, synthetic_corpus):
        out = warm_out
        shutil.rmtree(out / "cache")
        assert run("all", "--manifest", str(synthetic_corpus), "--out", str(out), *RUN_ARGS) == 0
        for name in ARTIFACTS:
            assert (out / name).read_bytes() == (pipeline_run / name).read_bytes(), name

    def test_parallel_extract_matches(self, pipeline_run, tmp_path, synthetic_corpus):
        out = tmp_path / "par"
        shutil.copytree(pipeline_run / "cache", out / "cache")
        assert run("extract", "--manifest", str(synthetic_corpus), "--out", str(out),
                   "--jobs", "3", *RUN_ARGS) == 0
        assert (out / "features.csv").read_bytes() == (pipeline_run / "features.csv").read_bytes()

    def test_stage_composition(self, pipeline_run, warm_out, synthetic_corpus):
        base = ["--manifest", str(synthetic_corpus), "--out", str(warm_out), *RUN_ARGS]
        assert run("extract", *base) == 0
        assert run("rank", *base) == 0
        assert (warm_out / "pairs.csv").read_bytes() == (pipeline_run / "pairs.csv").read_bytes()
        assert run("lda", *base) == 0
        assert run("measures", *base, "--space", "lda") == 0
        assert run("report", *base, "--space", "lda") == 0
        assert (warm_out / "measures.csv").read_bytes() == (pipeline_run / "measures-lda.csv").read_bytes()


class TestSpaces:
    def test_both_spaces_tagged_and_distinct(self, pipeline_run):
        lda = (pipeline_run / "measures-lda.csv").read_text()
        best = (pipeline_run / "measures-best-pair.csv").read_text()
        assert "# space lda" in lda and "# space best-pair" in best
        assert lda.split("\n", 2)[2] != best.split("\n", 2)[2]

    def test_measures_mirrors_active_space(self, pipeline_run):
        assert (pipeline_run / "measures.csv").read_bytes() == \
            (pipeline_run / "measures-best-pair.csv").read_bytes()

    def test_best_pair_space_uses_top_pair(self, pipeline_run, synthetic_corpus):
        cfg = config_for(synthetic_corpus, pipeline_run)
        coords, labels, axes = pipeline.active_space(cfg, "best-pair")
        assert list(axes) == rows(pipeline_run / "pairs.csv")[1][1:3]
        assert coords.shape == (120, 2)
        assert np.allclose(coords.mean(axis=0), 0, atol=1e-9)


class TestDroppedPainter:
    def test_eleven_painters(self, pipeline_run, warm_out, synthetic_corpus):
        lines = synthetic_corpus.read_text().splitlines()
        kept = [l for l in lines if not l.startswith("painter_05,")]
        manifest = synthetic_corpus.parent / "manifest-11.csv"
        manifest.write_text("\n".join(kept) + "\n")
        assert run("all", "--manifest", str(manifest), "--out", str(warm_out), *RUN_ARGS) == 0
        moves, triples = pipeline.read_measures(warm_out / "measures.csv")
        assert len(moves) == 10 and len(triples) == 9
        assert all("painter_05" not in (m["from"], m["to"]) for m in moves)


class TestErrors:
    def test_rank_without_features(self, tmp_path, synthetic_corpus, capsys):
        rc = run("rank", "--manifest", str(synthetic_corpus), "--out", str(tmp_path / "empty"))
        assert rc == 1
        assert "run extract first" in capsys.readouterr().err

    def test_report_without_measures(self, pipeline_run, tmp_path, synthetic_corpus, capsys):
        out = tmp_path / "partial"
        out.mkdir()
        for name in ("features.csv", "pairs.csv", "confusion.csv"):
            shutil.copy(pipeline_run / name, out / name)
        assert run("report", "--manifest", str(synthetic_corpus), "--out", str(out), *RUN_ARGS) == 1
        assert "run measures first" in capsys.readouterr().err

    def test_missing_manifest(self, tmp_path, capsys):
        assert run("extract", "--manifest", str(tmp_path / "none.csv"), "--out", str(tmp_path)) == 1

    def test_unreadable_image_names_painting(self, tmp_path, capsys):
        (tmp_path / "bad.png").write_bytes(b"garbage")
        m = tmp_path / "m.csv"
        m.write_text("painter,title,year,source,rank\nSomeone,Broken,1900,bad.png,0\n")
        assert run("extract", "--manifest", str(m), "--out", str(tmp_path / "o"), "--image-size", "32") == 1
        assert "'Someone' / 'Broken'" in capsys.readouterr().err

    def test_degenerate_features_exit_2(self, pipeline_run, tmp_path, synthetic_corpus, capsys):
        out = tmp_path / "flat"
        out.mkdir()
        table = rows(pipeline_run / "features.csv")
        with open(out / "features.csv", "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(table[0])
            for r in table[1:]:
                w.writerow(["1.0"] * 93 + r[93:])
        assert run("lda", "--manifest", str(synthetic_corpus), "--out", str(out), *RUN_ARGS) == 2
        assert "within-class scatter" in capsys.readouterr().err

    def test_bad_seed_rejected(self, capsys):
        with pytest.raises(SystemExit):
            run("all", "--seed", "-1")
        with pytest.raises(SystemExit):
            run("all", "--seed", str(2 ** 64))


class TestConfig:
    def test_toml_sections(self, tmp_path):
        cfg = tmp_path / "run.toml"
        cfg.write_text(
            'manifest = "data/manifest.csv"\nseed = 99\nspace = "lda"\n'
            "[slic]\nk = 64\ncompactness = 20.0\n"
            "[curvature]\ngamma = 2.0\nsmoothing = 0.01\n"
            "[glcm]\nlevels = 32\n"
            "[cv]\nrepetitions = 10\n"
        )
        c = pipeline.PipelineConfig.from_file(cfg, out=str(tmp_path / "o"))
        assert (c.slic_k, c.slic_compactness, c.gamma, c.smoothing) == (64, 20.0, 2.0, 0.01)
        assert (c.glcm_levels, c.repetitions, c.seed, c.space) == (32, 10, 99, "lda")
        assert c.manifest == str(tmp_path / "data" / "manifest.csv")

    def test_cli_overrides_file(self, tmp_path):
        cfg = tmp_path / "run.toml"
        cfg.write_text("seed = 3\n")
        args = cli.build_parser().parse_args(["rank", "--config", str(cfg), "--seed", "11"])
        assert cli.load_config(args).seed == 11

    def test_unknown_key(self, tmp_path, capsys):
        cfg = tmp_path / "run.toml"
        cfg.write_text("sead = 3\n")
        with pytest.raises(ValueError, match="sead"):
            pipeline.PipelineConfig.from_file(cfg)
        assert run("rank", "--config", str(cfg)) == 1

    @pytest.mark.parametrize("field,value", [
        ("slic_k", 0), ("gamma", 0.0), ("glcm_levels", 1), ("space", "pca"),
        ("repetitions", 0), ("smoothing", 1.0), ("jobs", 0),
    ])
    def test_ranges(self, field, value):
        with pytest.raises(ValueError):
            pipeline.PipelineConfig(**{field: value})

    def test_digest_ignores_paths(self):
        a = pipeline.PipelineConfig(manifest="a.csv", out="x", jobs=1)
        b = pipeline.PipelineConfig(manifest="b.csv", out="y", jobs=4, space="lda")
        assert a.digest() == b.digest()
        assert a.digest() != pipeline.PipelineConfig(seed=1).digest()
        assert a.extraction_digest() == pipeline.PipelineConfig(seed=1).extraction_digest()
        assert a.extraction_digest() != pipeline.PipelineConfig(slic_k=64).extraction_digest()


def test_synth_subcommand(tmp_path, capsys):
    assert run("synth", str(tmp_path / "c"), "--painters", "3", "--per-painter", "2", "--size", "32") == 0
    table = rows(tmp_path / "c" / "manifest.csv")
    assert len(table) == 7 and (tmp_path / "c" / table[1][3]).is_file()


def test_module_entry_point():
    import subprocess
    import sys
    out = subprocess.run([sys.executable, "-m", "artspace", "--help"], capture_output=True, text=True)
    assert out.returncode == 0
    for stage in cli.STAGES:
        assert stage in out.stdout

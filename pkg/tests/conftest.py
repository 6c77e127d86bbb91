import shutil
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from artspace import cli, synthetic  # noqa: E402

# 10 per painter keeps N - K above the 93 feature columns.
PER_PAINTER = 10
IMAGE_SIZE = 96
RUN_ARGS = ["--image-size", str(IMAGE_SIZE), "--repetitions", "20", "--seed", "7"]


@pytest.fixture(scope="session")
def synthetic_corpus(tmp_path_factory):
    root = tmp_path_factory.mktemp("corpus")
    return synthetic.write_corpus(root, per_painter=PER_PAINTER, size=96, seed=0)


@pytest.fixture(scope="session")
def pipeline_run(synthetic_corpus, tmp_path_factory):
    """One full ``all`` run on the synthetic corpus; returns its output directory."""
    out = tmp_path_factory.mktemp("run") / "out"
    rc = cli.run(["all", "--manifest", str(synthetic_corpus), "--out", str(out), *RUN_ARGS])
    assert rc == 0
    return out


@pytest.fixture
def warm_out(pipeline_run, tmp_path):
    """Fresh output directory that shares the session run's feature cache."""
    out = tmp_path / "out"
    shutil.copytree(pipeline_run / "cache", out / "cache")
    return out

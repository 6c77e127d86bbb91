"""Command line entry point.

Exit codes: 0 success, 1 input error (manifest, image, missing artifact,
bad config), 2 numerical failure (degenerate scatter, degenerate moves,
non-finite features).
"""
from __future__ import annotations

import argparse
import logging
import sys

import numpy as np

from . import analysis, corpus, measures, pipeline, synthetic

EXIT_OK, EXIT_INPUT, EXIT_NUMERIC = 0, 1, 2

STAGES = ("fetch", "extract", "rank", "lda", "measures", "report", "all")


def _u64(text: str) -> int:
    value = int(text, 0)
    if not 0 <= value < 2 ** 64:
        raise argparse.ArgumentTypeError(f"{text} is not an unsigned 64-bit integer")
    return value


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="TOML config file with PipelineConfig keys")
    common.add_argument("--manifest", help="manifest CSV (overrides the config)")
    common.add_argument("--seed", type=_u64, help="seed for the repeated split validation")
    common.add_argument("--out", help="output directory")
    common.add_argument("--space", choices=pipeline.SPACES, help="active 2-D space for measures")
    common.add_argument("--jobs", type=int, help="worker processes for extraction")
    common.add_argument("--repetitions", type=int, help="number of random splits")
    common.add_argument("--image-size", type=int, dest="image_size",
                        help="side of the preprocessed square (default 800)")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="artspace", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in STAGES:
        sub.add_parser(name, parents=[common], help=f"run the {name} stage")
    synth = sub.add_parser("synth", help="write the procedural test corpus")
    synth.add_argument("directory")
    synth.add_argument("--painters", type=int, default=12)
    synth.add_argument("--per-painter", type=int, default=20)
    synth.add_argument("--size", type=int, default=96)
    synth.add_argument("--seed", type=_u64, default=0)
    return parser


def load_config(args: argparse.Namespace) -> pipeline.PipelineConfig:
    overrides = {k: getattr(args, k, None) for k in
                 ("manifest", "seed", "out", "space", "jobs", "repetitions", "image_size")}
    if args.config:
        return pipeline.PipelineConfig.from_file(args.config, **overrides)
    return pipeline.PipelineConfig(**{k: v for k, v in overrides.items() if v is not None})


def run(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if getattr(args, "verbose", False) else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.command == "synth":
        path = synthetic.write_corpus(args.directory, args.painters, args.per_painter, args.size, args.seed)
        print(path)
        return EXIT_OK

    try:
        config = load_config(args)
        if args.command == "fetch":
            for p in pipeline.fetch(config):
                print(p)
        elif args.command == "extract":
            print(pipeline.extract(config))
        elif args.command == "rank":
            print(pipeline.rank(config))
        elif args.command == "lda":
            print(pipeline.lda(config))
        elif args.command == "measures":
            print(pipeline.measures_stage(config, config.space))
        elif args.command == "report":
            pipeline.report(config)
            print(pipeline.Layout(config.out).report)
        elif args.command == "all":
            rep = pipeline.run_pipeline(config)
            print(f"top pair: {rep.top_pair['feature_a']} / {rep.top_pair['feature_b']} "
                  f"(alpha={rep.top_pair['alpha']:.3f}); cv accuracy {rep.confusion['accuracy']:.3f}")
    except (analysis.DegenerateDataError, measures.DegenerateMoveError,
            FloatingPointError, np.linalg.LinAlgError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except pipeline.PaintingError as exc:
        cause = exc.__cause__
        numeric = isinstance(cause, (FloatingPointError, ArithmeticError, np.linalg.LinAlgError))
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC if numeric else EXIT_INPUT
    except (OSError, ValueError, corpus.ManifestError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    return EXIT_OK


def main() -> None:
    sys.exit(run())

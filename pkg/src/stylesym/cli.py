"""Command-line entry point: one subcommand per pipeline stage.

Exit codes: 0 ok, 2 configuration error, 3 data error, 4 numeric
failure.  Every command validates its configuration fully before doing
any work.
"""

from __future__ import annotations

import argparse
import sys

from . import pipeline
from .config import default_config_text, load_config
from .data.synth import synth_style_corpus, write_style_corpus
from .errors import ConfigError, DataError, NumericError, StylesymError


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="stylesym",
        description=(
            "Artist style analysis: per-artist classifiers, learned symmetry "
            "generators, Gram textures, blended distances, clustering and "
            "statistical reports."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True, metavar="command")

    def add(name: str, help_text: str, config: bool = True):
        p = sub.add_parser(name, help=help_text)
        if config:
            p.add_argument("--config", required=True, help="run configuration file")
            p.add_argument(
                "--seed", type=int, default=None, help="override the config seed"
            )
            p.add_argument(
                "--jobs", type=int, default=1, help="worker cap for parallel stages"
            )
            p.add_argument(
                "--strict",
                action="store_true",
                help="cross-check manifest artists against the builtin table",
            )
        return p

    add("train", "fit one artist-vs-rest classifier per artist")
    add("generators", "extract symmetry generators from trained models")
    add("gram", "compute per-painting Gram texture stacks")
    add("distances", "build global/texture/combined distance matrices")
    add("cluster", "average-linkage dendrogram (Newick + SVG)")
    add("bootstrap", "clade confidence by painting-level resampling")
    add("mantel", "Mantel test against movement ground truth")
    flow = add("flow", "render a 5-panel generator-flow strip")
    flow.add_argument("--image", required=True, help="input image path")
    flow.add_argument("--artist", required=True, help="whose generator to apply")
    flow.add_argument(
        "--rank", type=int, default=0, help="generator rank (0 = strongest symmetry)"
    )
    synth = add("synth", "write the synthetic three-movement corpus", config=False)
    synth.add_argument("--out", required=True, help="output corpus directory")
    synth.add_argument("--seed", type=int, default=0)
    synth.add_argument("--images", type=int, default=20, help="paintings per artist")
    synth.add_argument("--size", type=int, default=224, help="square image size")
    synth.add_argument(
        "--emit-config",
        action="store_true",
        help="also write a ready-to-run config.toml next to the corpus",
    )
    return parser


def _dispatch(args: argparse.Namespace) -> int:
    if args.command == "synth":
        corpus = synth_style_corpus(
            seed=args.seed, size=args.size, images_per_artist=args.images
        )
        manifest = write_style_corpus(corpus, args.out)
        print(f"wrote {len(corpus.manifest)} images; manifest at {manifest}")
        if args.emit_config:
            # Defaults already point at manifest.csv relative to the
            # config, so the template works in place unmodified.
            config_path = manifest.parent / "config.toml"
            config_path.write_text(default_config_text())
            print(f"config template at {config_path}")
        return 0
    cfg = load_config(args.config, seed=args.seed)
    cfg.validate_paths()
    if args.command == "train":
        metrics = pipeline.run_train(cfg, strict=args.strict, jobs=args.jobs)
        worst = min(acc for _, _, acc in metrics)
        print(
            f"trained {len(metrics)} artists -> {cfg.workdir / 'checkpoints'} "
            f"(worst accuracy {worst:.3f})"
        )
    elif args.command == "generators":
        sets = pipeline.run_generators(cfg, strict=args.strict)
        print(
            f"extracted {cfg.generator_count} generators for {len(sets)} artists "
            f"-> {cfg.workdir / 'generators'}"
        )
    elif args.command == "gram":
        pipeline.run_gram(cfg, strict=args.strict)
        print(f"gram stacks -> {cfg.workdir / 'grams'}")
    elif args.command == "distances":
        purity = pipeline.run_distances(cfg, strict=args.strict)
        print(f"distance matrices -> {cfg.workdir / 'distances'}")
        print(
            "nn purity: "
            + " ".join(f"{k}={purity[k]:.3f}" for k in ("global", "texture", "combined"))
        )
    elif args.command == "cluster":
        pipeline.run_cluster(cfg, strict=args.strict)
        print(f"dendrogram -> {cfg.workdir / 'reports' / 'dendrogram.newick'}")
    elif args.command == "bootstrap":
        _, report = pipeline.run_bootstrap(cfg, strict=args.strict, jobs=args.jobs)
        supported = len(report.supported())
        print(
            f"{supported}/{len(report.clades)} clades at >= {report.threshold} "
            f"support -> {cfg.workdir / 'reports' / 'bootstrap.json'}"
        )
    elif args.command == "mantel":
        result = pipeline.run_mantel(cfg, strict=args.strict)
        print(
            f"mantel r={result.r:.4f} p={result.p_value:.4g} "
            f"({cfg.ground_truth} ground truth, {result.permutations} permutations)"
        )
    elif args.command == "flow":
        out = pipeline.run_flow(cfg, args.image, args.artist, rank=args.rank)
        print(f"flow strip -> {out}")
    else:  # pragma: no cover - argparse enforces the choices
        raise ConfigError(f"unknown command {args.command!r}")
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _dispatch(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except NumericError as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return 4
    except (DataError, StylesymError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())

"""Command-line interface.

Subcommands: stats, reconstruct, train, infer, eval, ablate, synth.
Precedence for training options: built-in defaults < config file < flags.
``MCNER_DATA_DIR`` supplies the corpus path when --corpus is omitted.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .catalog import CatalogError, load_catalog
from .checkpoint import CheckpointError
from .corpus import (
    CorpusParseError,
    compute_stats,
    load_corpus_dir,
    load_corpus_file,
)
from .metrics import InvalidTagSequenceError, micro_f1
from .model import model_from_checkpoint
from .reconstruct import reconstruct, write_triplets
from .synthetic import write_corpus_dir
from .train import TrainConfig, format_ablation_table, run_ablation, train

DATA_DIR_ENV = "MCNER_DATA_DIR"


def _resolve_corpus(arg: str | None, parser: argparse.ArgumentParser) -> Path:
    if arg is None:
        arg = os.environ.get(DATA_DIR_ENV)
    if arg is None:
        parser.error(f"--corpus is required (or set {DATA_DIR_ENV})")
    path = Path(arg)
    if not path.exists():
        parser.error(f"corpus path does not exist: {path}")
    return path


def _load_splits(path: Path, repair: bool):
    if path.is_dir():
        return load_corpus_dir(path, repair=repair)
    return {path.stem: load_corpus_file(path, repair=repair)}


def cmd_stats(args, parser) -> int:
    path = _resolve_corpus(args.corpus, parser)
    splits = _load_splits(path, args.repair_iob)
    catalog = load_catalog(args.catalog) if args.catalog else None
    stats = compute_stats(splits, catalog)
    print(json.dumps(stats.to_dict(), indent=2))
    return 0


def cmd_reconstruct(args, parser) -> int:
    path = _resolve_corpus(args.corpus, parser)
    if path.is_dir():
        parser.error("reconstruct expects a single corpus file, not a directory")
    sentences = load_corpus_file(path, repair=args.repair_iob)
    catalog = load_catalog(args.catalog)
    n = write_triplets(args.out, (reconstruct(s, catalog) for s in sentences))
    print(f"wrote {n} triplets to {args.out}")
    return 0


def _train_config(args) -> TrainConfig:
    if args.config:
        config = TrainConfig.from_file(args.config)
    else:
        config = TrainConfig()
    overrides = {}
    for key in ("learning_rate", "epochs", "batch_size", "seed", "ablation", "warmup_fraction"):
        value = getattr(args, key, None)
        if value is not None:
            overrides[key] = value
    if overrides:
        config = TrainConfig.from_dict({**config.to_dict(), **overrides})
    return config


def cmd_train(args, parser) -> int:
    path = _resolve_corpus(args.corpus, parser)
    splits = _load_splits(path, args.repair_iob)
    catalog = load_catalog(args.catalog)
    config = _train_config(args)
    model, record = train(config, splits, catalog, out_dir=args.out_dir)
    summary = {
        "best_epoch": record.best_epoch,
        "best_dev_f1": record.best_dev_f1,
        "final_test_f1": record.final_test_f1,
        "epochs_run": len(record.epoch_losses),
        "out_dir": str(args.out_dir),
    }
    print(json.dumps(summary, indent=2))
    return 0


def cmd_infer(args, parser) -> int:
    path = _resolve_corpus(args.corpus, parser)
    if path.is_dir():
        parser.error("infer expects a single corpus file, not a directory")
    model = model_from_checkpoint(args.checkpoint)
    sentences = load_corpus_file(path, repair=True)
    with open(args.out, "w", encoding="utf-8") as f:
        for sent in sentences:
            tags = model.predict_tags(sent.surfaces)
            for token, tag in zip(sent.surfaces, tags):
                f.write(f"{token} {tag}\n")
            f.write("\n")
    print(f"wrote predictions for {len(sentences)} sentences to {args.out}")
    return 0


def cmd_eval(args, parser) -> int:
    gold = load_corpus_file(args.gold)
    pred = load_corpus_file(args.pred)
    report = micro_f1([s.tags for s in gold], [s.tags for s in pred], repair=args.repair_iob)
    print(json.dumps(report.to_dict(), indent=2))
    return 0


def cmd_ablate(args, parser) -> int:
    path = _resolve_corpus(args.corpus, parser)
    splits = _load_splits(path, args.repair_iob)
    catalog = load_catalog(args.catalog)
    config = _train_config(args)
    seeds = [int(s) for s in args.seeds.split(",")]
    variants = args.variants.split(",")
    rows = run_ablation(config, splits, catalog, variants=variants, seeds=seeds, out_dir=args.out_dir)
    print(format_ablation_table(rows))
    if args.out_dir:
        out = Path(args.out_dir) / "ablation.json"
        out.write_text(json.dumps(rows, indent=2) + "\n", encoding="utf-8")
        print(f"wrote {out}")
    return 0


def cmd_synth(args, parser) -> int:
    paths = write_corpus_dir(args.out_dir, n_train=args.train, n_dev=args.dev,
                             n_test=args.test, seed=args.seed)
    print(json.dumps({k: str(v) for k, v in paths.items()}, indent=2))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mcner",
        description="NER as multiple-choice reading comprehension: data tooling, training, evaluation.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("stats", help="summarize a corpus (split sizes, type count, mean lengths)")
    p.add_argument("--corpus", help=f"corpus file or split directory (default: ${DATA_DIR_ENV})")
    p.add_argument("--catalog", help="catalog JSON for type count and option lengths")
    p.add_argument("--repair-iob", action="store_true", help="rewrite orphan I- tags to B-")
    p.set_defaults(fn=cmd_stats)

    p = sub.add_parser("reconstruct", help="emit multiple-choice triplets as JSON lines")
    p.add_argument("--corpus", help="corpus file")
    p.add_argument("--catalog", required=True, help="catalog JSON")
    p.add_argument("--out", required=True, help="output JSONL path")
    p.add_argument("--repair-iob", action="store_true")
    p.set_defaults(fn=cmd_reconstruct)

    p = sub.add_parser("train", help="fine-tune a model")
    p.add_argument("--corpus", help="split directory (train/dev/test files)")
    p.add_argument("--catalog", required=True)
    p.add_argument("--config", help="experiment config JSON")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--learning-rate", type=float, dest="learning_rate")
    p.add_argument("--epochs", type=int)
    p.add_argument("--batch-size", type=int, dest="batch_size")
    p.add_argument("--warmup-fraction", type=float, dest="warmup_fraction")
    p.add_argument("--seed", type=int)
    p.add_argument("--ablation", choices=("full", "reconstruction_only", "vanilla"))
    p.add_argument("--repair-iob", action="store_true")
    p.set_defaults(fn=cmd_train)

    p = sub.add_parser("infer", help="tag a corpus with a trained checkpoint")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--corpus", help="corpus file (tags present are ignored)")
    p.add_argument("--out", required=True, help="output CoNLL path")
    p.set_defaults(fn=cmd_infer)

    p = sub.add_parser("eval", help="span micro-F1 of predictions against gold")
    p.add_argument("--gold", required=True)
    p.add_argument("--pred", required=True)
    p.add_argument("--repair-iob", action="store_true")
    p.set_defaults(fn=cmd_eval)

    p = sub.add_parser("ablate", help="train every variant and compare")
    p.add_argument("--corpus")
    p.add_argument("--catalog", required=True)
    p.add_argument("--config")
    p.add_argument("--out-dir")
    p.add_argument("--seeds", default="0", help="comma-separated seeds")
    p.add_argument("--variants", default="full,reconstruction_only,vanilla")
    p.add_argument("--learning-rate", type=float, dest="learning_rate")
    p.add_argument("--epochs", type=int)
    p.add_argument("--batch-size", type=int, dest="batch_size")
    p.add_argument("--warmup-fraction", type=float, dest="warmup_fraction")
    p.add_argument("--repair-iob", action="store_true")
    p.set_defaults(fn=cmd_ablate)

    p = sub.add_parser("synth", help="write a seeded synthetic corpus with catalogs")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--train", type=int, default=50)
    p.add_argument("--dev", type=int, default=20)
    p.add_argument("--test", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(fn=cmd_synth)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args, parser)
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (CorpusParseError, CatalogError, CheckpointError, InvalidTagSequenceError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

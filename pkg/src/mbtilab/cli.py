"""Command-line front end.

One subcommand per pipeline stage plus `pipeline`, which chains them all.
A JSON config file can supply any run option; explicit flags override the
file. Every failure exits nonzero with a stage-tagged message.
"""

from __future__ import annotations

import argparse
import json
import sys

from mbtilab.corpus import DICHOTOMY_NAMES
from mbtilab.errors import MbtiLabError
from mbtilab import pipeline as pl

_CONFIG_FIELDS = (
    ("--seed", "seed", int),
    ("--folds", "folds", int),
    ("--pca-components", "pca_components", int),
    ("--sampler", "sampler", str),
    ("--smote-k", "smote_k", int),
    ("--model", "model", str),
    ("--threads", "threads", int),
    ("--min-posts", "min_posts", int),
    ("--min-english-fraction", "min_english_fraction", float),
    ("--max-cap-score", "max_cap_score", float),
    ("--emoji-min-user-fraction", "emoji_min_user_fraction", float),
    ("--lr-ridge", "lr_ridge", float),
    ("--lr-tol", "lr_tol", float),
    ("--lr-max-iter", "lr_max_iter", int),
    ("--svm-lam", "svm_lam", float),
    ("--svm-epochs", "svm_epochs", int),
    ("--rf-trees", "rf_trees", int),
    ("--rf-mtry", "rf_mtry", int),
    ("--rf-max-depth", "rf_max_depth", int),
    ("--rf-min-leaf", "rf_min_leaf", int),
    ("--stepwise-p-in", "stepwise_p_in", float),
    ("--stepwise-p-out", "stepwise_p_out", float),
    ("--importance-preset", "importance_preset", str),
    ("--importance-top", "importance_top", int),
    ("--n-users", "synth_n_users", int),
    ("--posts-per-user", "synth_posts_per_user", float),
    ("--embedding-dim", "synth_embedding_dim", int),
    ("--signal-strength", "synth_signal_strength", float),
)


def _add_config_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="JSON file of run options; flags override it")
    for flag, dest, kind in _CONFIG_FIELDS:
        parser.add_argument(flag, dest=dest, type=kind, default=None)
    parser.add_argument(
        "--parts",
        default=None,
        help="comma-separated feature groups, e.g. SM,LIWC,VADER",
    )
    parser.add_argument(
        "--imbalance",
        default=None,
        help="synthetic class balance, e.g. 'E/I=0.6,N/S=0.85,T/F=0.55,J/P=0.5'",
    )
    parser.add_argument(
        "--per-fold-pca",
        action="store_true",
        default=None,
        help="refit standardization and PCA inside each training fold",
    )
    parser.add_argument(
        "--keep-ambiguous",
        action="store_true",
        default=None,
        help="keep users whose profile references several type acronyms",
    )


def _parse_imbalance(text: str) -> dict:
    out = {}
    for chunk in text.split(","):
        name, _, value = chunk.partition("=")
        name = name.strip()
        if name not in DICHOTOMY_NAMES:
            raise MbtiLabError(f"unknown dichotomy {name!r} in --imbalance")
        out[name] = float(value)
    return out


def build_config(args: argparse.Namespace) -> pl.RunConfig:
    doc: dict = {}
    if args.config:
        with open(args.config, "r", encoding="utf-8") as fh:
            doc.update(json.load(fh))
    for _, dest, _ in _CONFIG_FIELDS:
        value = getattr(args, dest, None)
        if value is not None:
            doc[dest] = value
    if args.parts is not None:
        doc["parts"] = [p.strip() for p in args.parts.split(",") if p.strip()]
    if args.imbalance is not None:
        doc["synth_imbalance"] = _parse_imbalance(args.imbalance)
    if args.per_fold_pca:
        doc["per_fold_pca"] = True
    if args.keep_ambiguous:
        doc["require_unique_label"] = False
    return pl.RunConfig.from_dict(doc)


def _cmd_synthesize(args) -> int:
    config = build_config(args)
    n = pl.stage_synthesize(config, args.corpus, args.truth)
    print(f"synthesize: wrote {n} records to {args.corpus}")
    return 0


def _cmd_ingest(args) -> int:
    build_config(args)  # validates shared options even though none apply here
    n, rejects = pl.stage_ingest(args.corpus, args.out, args.rejects)
    print(f"ingest: {n} records parsed, {rejects} rejected")
    return 0


def _cmd_filter(args) -> int:
    config = build_config(args)
    kept, drops = pl.stage_filter(args.infile, config.filter_policy(), args.out, args.drops)
    print(f"filter: kept {kept}, dropped {drops}")
    return 0


def _cmd_featurize(args) -> int:
    config = build_config(args)
    n, m = pl.stage_featurize(args.infile, config, args.features, args.labels)
    print(f"featurize: {n} users x {m} features")
    return 0


def _cmd_reduce(args) -> int:
    config = build_config(args)
    k, evr = pl.stage_reduce(args.features, config, args.reduced, args.pca_model)
    print(f"reduce: {k} components, explained variance {evr:.4f}")
    return 0


def _cmd_evaluate(args) -> int:
    config = build_config(args)
    result = pl.stage_evaluate(args.matrix, args.labels, config, args.evaluation)
    print(
        f"evaluate: joint accuracy {result.joint.acc_4:.3f}%, "
        f"micro auc {result.micro_auc:.4f}"
    )
    return 0


def _cmd_importance(args) -> int:
    config = build_config(args)
    pl.stage_importance(args.features, args.labels, config, args.out, args.trace)
    print(f"importance: wrote {args.out}")
    return 0


def _cmd_report(args) -> int:
    config = build_config(args)
    pl.stage_report(args.evaluation, config, args.out)
    print(f"report: wrote {args.out}")
    return 0


def _cmd_pipeline(args) -> int:
    config = build_config(args)
    summary = pl.run_pipeline(config, args.out_dir, corpus_path=args.corpus)
    n, m = summary["matrix_shape"]
    print(
        f"pipeline: kept {summary['kept']} users, matrix {n}x{m}, "
        f"report at {summary['paths']['report']}"
    )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mbtilab",
        description="personality dichotomy prediction from social media footprints",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synthesize", help="generate a labeled synthetic corpus")
    _add_config_flags(p)
    p.add_argument("--corpus", default="corpus.jsonl")
    p.add_argument("--truth", default="truth.json")
    p.set_defaults(func=_cmd_synthesize)

    p = sub.add_parser("ingest", help="parse a raw JSONL corpus, logging rejects")
    _add_config_flags(p)
    p.add_argument("--corpus", required=True)
    p.add_argument("--out", default="ingested.jsonl")
    p.add_argument("--rejects", default="rejects.txt")
    p.set_defaults(func=_cmd_ingest)

    p = sub.add_parser("filter", help="deduplicate and apply the inclusion policy")
    _add_config_flags(p)
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", default="filtered.jsonl")
    p.add_argument("--drops", default="drops.txt")
    p.set_defaults(func=_cmd_filter)

    p = sub.add_parser("featurize", help="build the user feature matrix")
    _add_config_flags(p)
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--features", default="features.tsv")
    p.add_argument("--labels", default="labels.tsv")
    p.set_defaults(func=_cmd_featurize)

    p = sub.add_parser("reduce", help="standardize and project onto principal components")
    _add_config_flags(p)
    p.add_argument("--features", required=True)
    p.add_argument("--reduced", default="reduced.tsv")
    p.add_argument("--pca-model", default="pca_model.json")
    p.set_defaults(func=_cmd_reduce)

    p = sub.add_parser("evaluate", help="cross-validated metrics for one model and sampler")
    _add_config_flags(p)
    p.add_argument("--matrix", required=True, help="features.tsv or reduced.tsv")
    p.add_argument("--labels", required=True)
    p.add_argument("--evaluation", default="evaluation.json")
    p.set_defaults(func=_cmd_evaluate)

    p = sub.add_parser("importance", help="stepwise feature importance and retention tests")
    _add_config_flags(p)
    p.add_argument("--features", required=True)
    p.add_argument("--labels", required=True)
    p.add_argument("--out", default="importance.txt")
    p.add_argument("--trace", default="importance.json")
    p.set_defaults(func=_cmd_importance)

    p = sub.add_parser("report", help="render the text report from evaluation.json")
    _add_config_flags(p)
    p.add_argument("--evaluation", required=True)
    p.add_argument("--out", default="report.txt")
    p.set_defaults(func=_cmd_report)

    p = sub.add_parser("pipeline", help="run every stage into an output directory")
    _add_config_flags(p)
    p.add_argument("--out-dir", default="run")
    p.add_argument("--corpus", default=None, help="existing corpus; default synthesizes one")
    p.set_defaults(func=_cmd_pipeline)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except MbtiLabError as exc:
        print(f"{args.command}: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"{args.command}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

"""Stage-oriented pipeline: ingest -> filter -> featurize -> reduce ->
evaluate -> importance, each stage reading and writing plain files so a run
can resume anywhere.

Every report starts with a provenance header: a hash of the semantic
configuration (thread counts and file paths excluded, so identical analyses
hash identically), the master seed, and the standing modelling assumptions.
Reruns with an equal semantic config byte-reproduce every numeric output.
"""

from __future__ import annotations

import hashlib
import json
import os
from dataclasses import asdict, dataclass, field, fields

import numpy as np

from mbtilab import features as feats
from mbtilab import synthetic
from mbtilab.balance import SamplerKind
from mbtilab.corpus import (
    DICHOTOMIES,
    DICHOTOMY_NAMES,
    FilterPolicy,
    MbtiType,
    UserRecord,
    deduplicate,
    filter_corpus,
    format_rejects,
    parse_records,
)
from mbtilab.errors import ParameterError, StageError
from mbtilab.evaluation import EvaluationResult, cross_validate
from mbtilab.features import FeatureMatrix, pca_fit, pca_transform, standardize
from mbtilab.inference import (
    dichotomy_association,
    group_retention_chisq,
    stepwise_select,
    variable_importance,
    wilson_ci,
)

MODEL_NAMES = {"lr": "logistic", "nb": "gnb", "svm": "svm", "rf": "forest"}
IMPORTANCE_PRESETS = {
    "descriptive": ("SM", "BOTOMETER", "LIWC", "VADER"),
    "emoji": ("EMOJI",),
    "groups": ("SM", "BOTOMETER", "LIWC", "BERT", "VADER"),
}

ASSUMPTIONS = (
    "text normalization: Unicode NFC before cleaning",
    "positive class per dichotomy: first letter of the pair (E, N, T, J)",
    "SVM: linear, uncalibrated margins, hinge subgradient training",
    "coefficient tests: Wald normal approximation, labeled t-statistic",
    "standardization (z-score) applied before PCA",
    "metrics averaged over folds with equal fold weight",
    "sampling applied inside each training fold",
)


@dataclass
class RunConfig:
    seed: int = 7
    folds: int = 10
    pca_components: int = 200
    sampler: str = "none"
    smote_k: int = 5
    model: str = "lr"
    min_posts: int = 100
    min_english_fraction: float = 0.5
    max_cap_score: float = 0.8
    require_unique_label: bool = True
    parts: tuple = ("SM", "BOTOMETER", "LIWC", "BERT", "VADER", "EMOJI")
    emoji_min_user_fraction: float = 0.001
    per_fold_pca: bool = False
    lr_ridge: float = 1e-6
    lr_tol: float = 1e-8
    lr_max_iter: int = 100
    svm_lam: float = 1e-2
    svm_epochs: int = 500
    rf_trees: int = 500
    rf_mtry: int | None = None
    rf_max_depth: int | None = None
    rf_min_leaf: int = 1
    stepwise_p_in: float = 0.05
    stepwise_p_out: float = 0.1
    importance_preset: str = "descriptive"
    importance_top: int = 12
    synth_n_users: int = 2000
    synth_posts_per_user: float = 15.0
    synth_embedding_dim: int = 8
    synth_signal_strength: float = 0.18  # the bundled weak-signal corpus
    synth_imbalance: dict = field(
        default_factory=lambda: {"E/I": 0.6, "N/S": 0.85, "T/F": 0.55, "J/P": 0.5}
    )
    threads: int = 1  # execution detail: excluded from the semantic hash

    def __post_init__(self):
        if self.folds < 2:
            raise ParameterError("folds must be >= 2")
        if self.pca_components < 1:
            raise ParameterError("pca_components must be >= 1")
        if self.model not in MODEL_NAMES:
            raise ParameterError(f"model must be one of {sorted(MODEL_NAMES)}")
        if self.importance_preset not in IMPORTANCE_PRESETS:
            raise ParameterError(
                f"importance_preset must be one of {sorted(IMPORTANCE_PRESETS)}"
            )
        self.parts = tuple(self.parts)
        SamplerKind(self.sampler, self.smote_k)  # validates the name

    @classmethod
    def from_dict(cls, doc: dict) -> "RunConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(doc) - known
        if unknown:
            raise ParameterError(f"unknown config keys {sorted(unknown)}")
        return cls(**doc)

    def semantic_dict(self) -> dict:
        doc = asdict(self)
        doc.pop("threads")
        doc["parts"] = list(self.parts)
        return doc

    def config_hash(self) -> str:
        blob = json.dumps(self.semantic_dict(), sort_keys=True).encode("utf-8")
        return hashlib.sha256(blob).hexdigest()[:16]

    def sampler_kind(self) -> SamplerKind:
        return SamplerKind(self.sampler, self.smote_k)

    def filter_policy(self) -> FilterPolicy:
        return FilterPolicy(
            min_posts=self.min_posts,
            min_english_fraction=self.min_english_fraction,
            max_cap_score=self.max_cap_score,
            require_unique_label=self.require_unique_label,
        )

    def fit_params(self) -> dict:
        kind = MODEL_NAMES[self.model]
        if kind == "logistic":
            return {"ridge": self.lr_ridge, "tol": self.lr_tol, "max_iter": self.lr_max_iter}
        if kind == "svm":
            return {"lam": self.svm_lam, "epochs": self.svm_epochs}
        if kind == "forest":
            return {
                "n_trees": self.rf_trees,
                "mtry": self.rf_mtry,
                "max_depth": self.rf_max_depth,
                "min_leaf": self.rf_min_leaf,
            }
        return {}


def provenance_header(config: RunConfig, extra: tuple[str, ...] = ()) -> str:
    lines = [
        "# mbtilab report",
        f"# config_hash: {config.config_hash()}",
        f"# seed: {config.seed}",
        "# assumptions:",
    ]
    for item in ASSUMPTIONS + tuple(extra):
        lines.append(f"#   - {item}")
    return "\n".join(lines) + "\n"


def _read_records(path: str) -> list[UserRecord]:
    with open(path, "r", encoding="utf-8") as fh:
        records, rejects = parse_records(fh)
    if rejects:
        raise StageError(f"{path}: {len(rejects)} malformed records; re-run ingest")
    return records


def stage_synthesize(config: RunConfig, corpus_path: str, truth_path: str) -> int:
    cfg = synthetic.SynthConfig(
        n_users=config.synth_n_users,
        seed=config.seed,
        posts_per_user=config.synth_posts_per_user,
        embedding_dim=config.synth_embedding_dim,
        imbalance=dict(config.synth_imbalance),
        signal_strength=config.synth_signal_strength,
    )
    records, truth = synthetic.generate_corpus(cfg)
    synthetic.write_corpus(records, corpus_path)
    synthetic.write_truth(truth, truth_path)
    return len(records)


def stage_ingest(corpus_path: str, out_path: str, rejects_path: str) -> tuple[int, int]:
    with open(corpus_path, "r", encoding="utf-8") as fh:
        records, rejects = parse_records(fh)
    synthetic.write_corpus(records, out_path)
    with open(rejects_path, "w", encoding="utf-8") as fh:
        fh.write(format_rejects(rejects))
    return len(records), len(rejects)


def stage_filter(
    in_path: str, policy: FilterPolicy, out_path: str, drops_path: str
) -> tuple[int, int]:
    records = deduplicate(_read_records(in_path))
    kept, drops = filter_corpus(records, policy)
    synthetic.write_corpus(kept, out_path)
    with open(drops_path, "w", encoding="utf-8") as fh:
        for user_id, reason in drops:
            fh.write(f"{user_id}\t{reason}\n")
    return len(kept), len(drops)


def _labels_tsv(records: list[UserRecord]) -> str:
    lines = ["user_id\ttype\t" + "\t".join(DICHOTOMY_NAMES)]
    for record in records:
        if record.label is None:
            raise StageError(f"record {record.user_id} has no label; run filter first")
        bits = [
            "1" if letter == pair[0] else "0"
            for letter, pair in zip(record.label.letters, DICHOTOMIES)
        ]
        lines.append(f"{record.user_id}\t{record.label.render()}\t" + "\t".join(bits))
    return "\n".join(lines) + "\n"


def read_labels(path: str) -> tuple[list[str], np.ndarray]:
    with open(path, "r", encoding="utf-8") as fh:
        lines = [line.rstrip("\n") for line in fh if line.strip()]
    header = lines[0].split("\t")
    if header != ["user_id", "type", *DICHOTOMY_NAMES]:
        raise StageError(f"{path}: unexpected label header")
    ids: list[str] = []
    rows: list[list[int]] = []
    for line in lines[1:]:
        cells = line.split("\t")
        ids.append(cells[0])
        MbtiType.parse(cells[1])  # validates
        rows.append([int(c) for c in cells[2:6]])
    return ids, np.asarray(rows, dtype=np.int64).T


def stage_featurize(
    in_path: str, config: RunConfig, features_path: str, labels_path: str
) -> tuple[int, int]:
    records = _read_records(in_path)
    if not records:
        raise StageError("no records to featurize; filter kept nothing")
    vocab = None
    if "EMOJI" in config.parts:
        vocab = feats.build_emoji_vocabulary(records, config.emoji_min_user_fraction)
    fm = feats.assemble_matrix(records, config.parts, emoji_vocabulary=vocab)
    with open(features_path, "w", encoding="utf-8") as fh:
        fh.write(fm.to_tsv())
    with open(labels_path, "w", encoding="utf-8") as fh:
        fh.write(_labels_tsv(records))
    return fm.shape


def capped_components(requested: int, n: int, m: int, rank: int | None = None) -> int:
    bounds = [requested, n - 1, m]
    if rank is not None:
        bounds.append(rank)
    return min(bounds)


def positive_rank(values: np.ndarray) -> int:
    """Strictly positive eigenvalue count of the sample covariance: the most
    components a PCA of `values` can carry."""
    m = values.shape[1]
    cov = np.cov(values, rowvar=False, ddof=1).reshape(m, m)
    eigenvalues = np.linalg.eigh(cov)[0]
    return int((eigenvalues > 0.0).sum())


def stage_reduce(
    features_path: str, config: RunConfig, reduced_path: str, model_path: str
) -> tuple[int, float]:
    with open(features_path, "r", encoding="utf-8") as fh:
        fm = FeatureMatrix.from_tsv(fh.read())
    n, m = fm.shape
    std, _, _ = standardize(fm)
    k = capped_components(config.pca_components, n, m, rank=positive_rank(std.values))
    if k < 1:
        raise StageError("feature matrix has no variance; nothing to reduce")
    reduced, model = feats.reduce_matrix(fm, k)
    with open(reduced_path, "w", encoding="utf-8") as fh:
        fh.write(reduced.to_tsv())
    doc = feats.pca_model_to_json(model)
    doc["k"] = k
    doc["requested_k"] = config.pca_components
    with open(model_path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, sort_keys=True, indent=1)
        fh.write("\n")
    return k, float(model.explained_variance_ratio.sum())


def _per_fold_reducer(config: RunConfig):
    """Leakage-free variant: standardize and fit PCA on the training rows of
    each fold, then project both sides."""

    def hook(X: np.ndarray, train_idx: np.ndarray, test_idx: np.ndarray):
        X_train = X[train_idx]
        means = X_train.mean(axis=0)
        scales = X_train.std(axis=0)
        constant = scales == 0.0
        scales = np.where(constant, 1.0, scales)
        Z_train = (X_train - means) / scales
        Z_train[:, constant] = 0.0
        k = capped_components(
            config.pca_components,
            X_train.shape[0],
            X.shape[1],
            rank=positive_rank(Z_train),
        )
        if k < 1:
            raise StageError("training fold has no variance; nothing to reduce")
        model = pca_fit(Z_train, k, means=means, scales=scales)
        Z_test = (X[test_idx] - means) / scales
        Z_test[:, constant] = 0.0
        return Z_train @ model.components.T, Z_test @ model.components.T

    return hook


def stage_evaluate(
    matrix_path: str,
    labels_path: str,
    config: RunConfig,
    evaluation_path: str,
) -> EvaluationResult:
    with open(matrix_path, "r", encoding="utf-8") as fh:
        fm = FeatureMatrix.from_tsv(fh.read())
    ids, truths = read_labels(labels_path)
    if ids != list(fm.user_ids):
        raise StageError("feature matrix and labels disagree on users or order")
    hook = _per_fold_reducer(config) if config.per_fold_pca else None
    result = cross_validate(
        fm.values,
        truths,
        MODEL_NAMES[config.model],
        config.sampler_kind(),
        k=config.folds,
        seed=config.seed,
        fit_params=config.fit_params(),
        per_fold_transform=hook,
        threads=config.threads,
    )
    doc = evaluation_to_json(result, config)
    doc["dichotomy_association"] = [
        [repr(v) for v in row] for row in dichotomy_association(truths)
    ]
    with open(evaluation_path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, sort_keys=True, indent=1)
        fh.write("\n")
    return result


def evaluation_to_json(result: EvaluationResult, config: RunConfig) -> dict:
    return {
        "config": config.semantic_dict(),
        "config_hash": config.config_hash(),
        "stratified_on": result.stratified_on,
        "fold_sizes": result.fold_sizes,
        "dichotomies": [
            {
                "name": d.name,
                "accuracy": repr(d.accuracy),
                "auc": repr(d.auc),
                "confusion": {
                    "tp": d.confusion.tp,
                    "fp": d.confusion.fp,
                    "tn": d.confusion.tn,
                    "fn": d.confusion.fn,
                },
                "fold_accuracies": [repr(v) for v in d.fold_accuracies],
                "fold_aucs": [repr(v) for v in d.fold_aucs],
            }
            for d in result.dichotomies
        ],
        "joint": {
            "acc_4": repr(result.joint.acc_4),
            "acc_ge3": repr(result.joint.acc_ge3),
            "acc_ge2": repr(result.joint.acc_ge2),
            "acc_ge1": repr(result.joint.acc_ge1),
        },
        "micro_auc": repr(result.micro_auc),
        "macro_auc": repr(result.macro_auc),
        "majority": {
            "letters": result.majority_letters,
            "acc_4": repr(result.majority_joint.acc_4),
            "acc_ge3": repr(result.majority_joint.acc_ge3),
            "acc_ge2": repr(result.majority_joint.acc_ge2),
            "acc_ge1": repr(result.majority_joint.acc_ge1),
            "auc": repr(result.majority_auc),
        },
        "random": {
            "acc_4": repr(result.random_joint.acc_4),
            "acc_ge3": repr(result.random_joint.acc_ge3),
            "acc_ge2": repr(result.random_joint.acc_ge2),
            "acc_ge1": repr(result.random_joint.acc_ge1),
            "auc": repr(result.random_auc),
        },
    }


def render_report(result: EvaluationResult, config: RunConfig, notes: tuple[str, ...] = ()) -> str:
    out = [provenance_header(config, extra=notes)]
    out.append(
        f"model: {config.model} ({MODEL_NAMES[config.model]})   "
        f"sampler: {config.sampler}   folds: {config.folds}   "
        f"stratified on: {result.stratified_on}\n"
    )
    out.append("== Per-dichotomy metrics (fold-averaged) ==\n")
    out.append(f"{'dichotomy':<10}{'accuracy%':>11}{'auc':>9}{'tp':>7}{'fp':>7}{'tn':>7}{'fn':>7}\n")
    for d in result.dichotomies:
        c = d.confusion
        out.append(
            f"{d.name:<10}{d.accuracy:>11.3f}{d.auc:>9.4f}"
            f"{c.tp:>7}{c.fp:>7}{c.tn:>7}{c.fn:>7}\n"
        )
    out.append("\n== Accurately predicted dichotomies (% of users) ==\n")
    header = f"{'classifier':<22}{'all 4':>8}{'>=3':>8}{'>=2':>8}{'>=1':>8}{'macro':>9}{'micro':>9}\n"
    out.append(header)
    rows = [
        (
            f"{config.model} + {config.sampler}",
            result.joint.as_tuple(),
            result.macro_auc,
            result.micro_auc,
        ),
        (
            "majority class",
            result.majority_joint.as_tuple(),
            result.majority_auc,
            result.majority_auc,
        ),
        ("random", result.random_joint.as_tuple(), result.random_auc, result.random_auc),
    ]
    for name, tails, macro, micro in rows:
        a4, g3, g2, g1 = tails
        out.append(
            f"{name:<22}{a4:>8.3f}{g3:>8.2f}{g2:>8.2f}{g1:>8.2f}{macro:>9.4f}{micro:>9.4f}\n"
        )
    out.append(
        f"\nmajority letters: {', '.join(result.majority_letters)}\n"
    )
    return "".join(out)


def stage_report(
    evaluation_path: str, config: RunConfig, report_path: str, notes: tuple[str, ...] = ()
) -> str:
    """Render the text report from a stored evaluation document."""
    with open(evaluation_path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    text = render_report_from_json(doc, config, notes)
    with open(report_path, "w", encoding="utf-8") as fh:
        fh.write(text)
    return text


def render_report_from_json(doc: dict, config: RunConfig, notes: tuple[str, ...] = ()) -> str:
    out = [provenance_header(config, extra=notes)]
    out.append(
        f"model: {config.model} ({MODEL_NAMES[config.model]})   "
        f"sampler: {config.sampler}   folds: {config.folds}   "
        f"stratified on: {doc['stratified_on']}\n"
    )
    out.append("== Per-dichotomy metrics (fold-averaged) ==\n")
    out.append(f"{'dichotomy':<10}{'accuracy%':>11}{'auc':>9}{'tp':>7}{'fp':>7}{'tn':>7}{'fn':>7}\n")
    for d in doc["dichotomies"]:
        c = d["confusion"]
        out.append(
            f"{d['name']:<10}{float(d['accuracy']):>11.3f}{float(d['auc']):>9.4f}"
            f"{c['tp']:>7}{c['fp']:>7}{c['tn']:>7}{c['fn']:>7}\n"
        )
    out.append("\n== Accurately predicted dichotomies (% of users) ==\n")
    out.append(
        f"{'classifier':<22}{'all 4':>8}{'>=3':>8}{'>=2':>8}{'>=1':>8}{'macro':>9}{'micro':>9}\n"
    )

    def tails(block: dict) -> tuple[float, float, float, float]:
        return (
            float(block["acc_4"]),
            float(block["acc_ge3"]),
            float(block["acc_ge2"]),
            float(block["acc_ge1"]),
        )

    rows = [
        (
            f"{config.model} + {config.sampler}",
            tails(doc["joint"]),
            float(doc["macro_auc"]),
            float(doc["micro_auc"]),
        ),
        (
            "majority class",
            tails(doc["majority"]),
            float(doc["majority"]["auc"]),
            float(doc["majority"]["auc"]),
        ),
        ("random", tails(doc["random"]), float(doc["random"]["auc"]), float(doc["random"]["auc"])),
    ]
    for name, t, macro, micro in rows:
        a4, g3, g2, g1 = t
        out.append(
            f"{name:<22}{a4:>8.3f}{g3:>8.2f}{g2:>8.2f}{g1:>8.2f}{macro:>9.4f}{micro:>9.4f}\n"
        )
    out.append(f"\nmajority letters: {', '.join(doc['majority']['letters'])}\n")
    return "".join(out)


def stage_importance(
    features_path: str,
    labels_path: str,
    config: RunConfig,
    importance_path: str,
    trace_path: str,
) -> dict:
    """Stepwise selection per dichotomy on the preset feature groups, with
    ranked importance, retention chi-squared, and Wilson intervals."""
    with open(features_path, "r", encoding="utf-8") as fh:
        fm = FeatureMatrix.from_tsv(fh.read())
    ids, truths = read_labels(labels_path)
    if ids != list(fm.user_ids):
        raise StageError("feature matrix and labels disagree on users or order")
    groups = IMPORTANCE_PRESETS[config.importance_preset]
    cols = fm.columns_in_groups(groups)
    if not cols:
        raise StageError(f"no columns in preset groups {groups}")
    sub = fm.select_columns(cols)
    std, _, _ = standardize(sub)

    doc: dict = {
        "config": config.semantic_dict(),
        "config_hash": config.config_hash(),
        "preset": config.importance_preset,
        "groups": list(groups),
        "dichotomies": [],
    }
    text = [provenance_header(config)]
    text.append(f"importance preset: {config.importance_preset} (groups: {', '.join(groups)})\n")

    for d in range(4):
        pair = DICHOTOMIES[d]
        trace = stepwise_select(
            std.values,
            truths[d],
            names=list(std.names),
            groups=list(std.groups),
            p_in=config.stepwise_p_in,
            p_out=config.stepwise_p_out,
            seed=config.seed,
            ridge=config.lr_ridge,
            tol=config.lr_tol,
            max_iter=config.lr_max_iter,
        )
        entry: dict = {
            "dichotomy": DICHOTOMY_NAMES[d],
            "steps": [
                {"action": a, "feature": f, "p": repr(p)} for a, f, p in trace.steps
            ],
            "retained": trace.retained,
            "group_counts": {g: list(v) for g, v in sorted(trace.group_counts.items())},
        }
        text.append(f"\n== {DICHOTOMY_NAMES[d]} ==\n")
        if trace.final_model is not None:
            ranked = variable_importance(trace, trace.final_model, pair)
            entry["importance"] = [
                {
                    "feature": r.feature,
                    "statistic": repr(r.statistic),
                    "p": repr(r.p_value),
                    "preferred": r.preferred,
                }
                for r in ranked
            ]
            text.append(f"{'feature':<28}{'t-statistic':>12}{'p-value':>12}  prefers\n")
            for r in ranked[: config.importance_top]:
                text.append(
                    f"{r.feature:<28}{r.statistic:>12.3f}{r.p_value:>12.2e}  {r.preferred}\n"
                )
        else:
            entry["importance"] = []
            text.append("no features retained\n")

        nonempty = {g: tuple(v) for g, v in trace.group_counts.items() if v[1] > 0}
        if len(nonempty) >= 2:
            chi2, df, p = group_retention_chisq(nonempty)
            entry["retention_test"] = {"chi2": repr(chi2), "df": df, "p": repr(p)}
            text.append(f"group retention chi2 = {chi2:.3f} (df {df}), p = {p:.4f}\n")
        text.append(f"{'group':<12}{'retained':>9}{'total':>7}{'lo95':>8}{'hi95':>8}\n")
        wilson = {}
        for g in sorted(trace.group_counts):
            r, t = trace.group_counts[g]
            if t == 0:
                continue
            ci = wilson_ci(r, t, 0.95)
            wilson[g] = {"lower": repr(ci.lower), "upper": repr(ci.upper)}
            text.append(f"{g:<12}{r:>9}{t:>7}{ci.lower:>8.4f}{ci.upper:>8.4f}\n")
        entry["wilson"] = wilson
        doc["dichotomies"].append(entry)

    with open(trace_path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, sort_keys=True, indent=1)
        fh.write("\n")
    with open(importance_path, "w", encoding="utf-8") as fh:
        fh.write("".join(text))
    return doc


def run_pipeline(config: RunConfig, out_dir: str, corpus_path: str | None = None) -> dict:
    """Run every stage into out_dir; returns the stage summary."""
    os.makedirs(out_dir, exist_ok=True)
    paths = {
        "corpus": corpus_path or os.path.join(out_dir, "corpus.jsonl"),
        "truth": os.path.join(out_dir, "truth.json"),
        "ingested": os.path.join(out_dir, "ingested.jsonl"),
        "rejects": os.path.join(out_dir, "rejects.txt"),
        "filtered": os.path.join(out_dir, "filtered.jsonl"),
        "drops": os.path.join(out_dir, "drops.txt"),
        "features": os.path.join(out_dir, "features.tsv"),
        "labels": os.path.join(out_dir, "labels.tsv"),
        "reduced": os.path.join(out_dir, "reduced.tsv"),
        "pca": os.path.join(out_dir, "pca_model.json"),
        "evaluation": os.path.join(out_dir, "evaluation.json"),
        "report": os.path.join(out_dir, "report.txt"),
    }
    summary: dict = {"paths": paths}

    if corpus_path is None:
        stage_synthesize(config, paths["corpus"], paths["truth"])

    n_in, n_rejects = stage_ingest(paths["corpus"], paths["ingested"], paths["rejects"])
    summary["ingested"] = n_in
    summary["rejected"] = n_rejects

    n_kept, n_drops = stage_filter(
        paths["ingested"], config.filter_policy(), paths["filtered"], paths["drops"]
    )
    summary["kept"] = n_kept
    summary["dropped"] = n_drops
    if n_kept == 0:
        raise StageError("filter kept no records; relax the policy")

    n, m = stage_featurize(paths["filtered"], config, paths["features"], paths["labels"])
    summary["matrix_shape"] = (n, m)

    notes: list[str] = []
    if config.per_fold_pca:
        notes.append("PCA refit inside each training fold (leakage-free mode)")
        matrix_for_eval = paths["features"]
        k = capped_components(config.pca_components, n, m)
        if k != config.pca_components:
            notes.append(
                f"pca_components capped at <= {k} per training fold "
                f"(requested {config.pca_components})"
            )
    else:
        notes.append("PCA fit once on the full matrix before cross-validation")
        k, evr_sum = stage_reduce(paths["features"], config, paths["reduced"], paths["pca"])
        summary["explained_variance"] = evr_sum
        matrix_for_eval = paths["reduced"]
        if k != config.pca_components:
            notes.append(
                f"pca_components capped at {k} (requested {config.pca_components})"
            )
    summary["pca_components"] = k

    result = stage_evaluate(matrix_for_eval, paths["labels"], config, paths["evaluation"])
    report = render_report(result, config, notes=tuple(notes))
    with open(paths["report"], "w", encoding="utf-8") as fh:
        fh.write(report)
    summary["report"] = report
    return summary

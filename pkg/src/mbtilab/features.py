"""Per-user feature construction, standardization and PCA reduction.

Feature columns are grouped and ordered SM, BOTOMETER, LIWC, BERT, VADER,
EMOJI. Category scores micro-average token hits; valence scores give
positive/negative fractions and their normalized difference; embeddings are
averaged per user. Matrices persist as TSV with a "name:group" header row.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable

import numpy as np

from mbtilab import textprep
from mbtilab.corpus import BOT_SCORE_FIELDS, SM_FIELDS, UserRecord
from mbtilab.errors import (
    AssemblyError,
    InsufficientDataError,
    NumericError,
    ParameterError,
    ShapeError,
    UndefinedInputError,
)

GROUP_ORDER = ("SM", "BOTOMETER", "LIWC", "BERT", "VADER", "EMOJI")
#: "PC" marks reduced principal-component columns in persisted matrices.
VALID_GROUPS = GROUP_ORDER + ("PC",)

VADER_FIELDS = (
    "tweets_sentiment",
    "bio_sentiment",
    "tweets_pos_words",
    "bio_pos_words",
    "tweets_neg_words",
    "bio_neg_words",
)


@dataclass(frozen=True)
class Lexicon:
    """Word/prefix patterns mapped to named categories."""

    categories: tuple[str, ...]
    entries: tuple[tuple[str, frozenset[str]], ...]

    def __post_init__(self):
        if len(set(self.categories)) != len(self.categories):
            raise ParameterError("lexicon categories must be unique")
        known = set(self.categories)
        exact: dict[str, frozenset[str]] = {}
        prefixes: list[tuple[str, frozenset[str]]] = []
        for pattern, cats in self.entries:
            if not cats <= known:
                raise ParameterError(f"entry {pattern!r} references unknown categories")
            if pattern.endswith("*"):
                stem = pattern[:-1]
                if not stem:
                    raise ParameterError("prefix pattern needs a non-empty stem")
                prefixes.append((stem, cats))
            else:
                if not pattern:
                    raise ParameterError("empty pattern")
                exact[pattern] = exact.get(pattern, frozenset()) | cats
        object.__setattr__(self, "_exact", exact)
        object.__setattr__(self, "_prefixes", tuple(prefixes))

    def match(self, token: str) -> frozenset[str]:
        """Categories of every pattern the token matches."""
        cats = self._exact.get(token, frozenset())
        for stem, entry_cats in self._prefixes:
            if token.startswith(stem):
                cats = cats | entry_cats
        return cats


def parse_lexicon(text: str) -> Lexicon:
    """Parse the documented lexicon format.

    '#categories:' directive lines accumulate the roster; entry lines are
    "pattern<TAB>cat1,cat2" (any whitespace run separates pattern from the
    category list). Other '#' lines are comments.
    """
    categories: list[str] = []
    entries: list[tuple[str, frozenset[str]]] = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped:
            continue
        if stripped.startswith("#"):
            if stripped.startswith("#categories:"):
                categories.extend(stripped[len("#categories:") :].split())
            continue
        parts = re.split(r"\s+", stripped, maxsplit=1)
        if len(parts) != 2:
            raise ParameterError(f"lexicon line {lineno}: expected 'pattern cats'")
        pattern, cats = parts
        entries.append((pattern, frozenset(c for c in cats.split(",") if c)))
    return Lexicon(tuple(categories), tuple(entries))


@lru_cache(maxsize=None)
def default_liwc_lexicon() -> Lexicon:
    return parse_lexicon(textprep._read_data_text("liwc_default.txt"))


@lru_cache(maxsize=None)
def default_valence_lexicon() -> Lexicon:
    return parse_lexicon(textprep._read_data_text("valence_default.txt"))


def liwc_scores(tokens: list[str], lexicon: Lexicon) -> dict[str, float]:
    """Micro-averaged category fractions plus total_word_count.

    Each category value is (tokens matching any of its patterns) / (total
    tokens); empty input yields all zeros.
    """
    if "total_word_count" in lexicon.categories:
        raise ParameterError("'total_word_count' is reserved for the token count")
    counts = dict.fromkeys(lexicon.categories, 0)
    for token in tokens:
        for cat in lexicon.match(token):
            counts[cat] += 1
    total = len(tokens)
    scores = {cat: (counts[cat] / total if total else 0.0) for cat in lexicon.categories}
    scores["total_word_count"] = float(total)
    return scores


def valence_scores(
    bio_tokens: list[str], tweet_tokens: list[str], valence_lexicon: Lexicon
) -> dict[str, float]:
    """Positive/negative token fractions and normalized sentiment per source.

    sentiment = (pos - neg) / (pos + neg), defined as 0 when both are 0.
    """
    for cat in ("POS", "NEG"):
        if cat not in valence_lexicon.categories:
            raise ParameterError(f"valence lexicon lacks category {cat!r}")

    def source(tokens: list[str]) -> tuple[float, float, float]:
        pos = neg = 0
        for token in tokens:
            cats = valence_lexicon.match(token)
            if "POS" in cats:
                pos += 1
            if "NEG" in cats:
                neg += 1
        total = len(tokens)
        pos_frac = pos / total if total else 0.0
        neg_frac = neg / total if total else 0.0
        denom = pos_frac + neg_frac
        sentiment = (pos_frac - neg_frac) / denom if denom else 0.0
        return pos_frac, neg_frac, sentiment

    bio_pos, bio_neg, bio_sent = source(bio_tokens)
    tw_pos, tw_neg, tw_sent = source(tweet_tokens)
    return {
        "tweets_sentiment": tw_sent,
        "bio_sentiment": bio_sent,
        "tweets_pos_words": tw_pos,
        "bio_pos_words": bio_pos,
        "tweets_neg_words": tw_neg,
        "bio_neg_words": bio_neg,
    }


def aggregate_embeddings(post_embeddings: np.ndarray | list) -> np.ndarray:
    """Coordinate-wise mean of per-post vectors.

    Computed as v0 + mean(V - v0) so identical vectors average to themselves
    exactly.
    """
    if isinstance(post_embeddings, np.ndarray):
        if post_embeddings.ndim != 2:
            raise ShapeError("embeddings must be a 2-D array")
        matrix = post_embeddings.astype(np.float64, copy=False)
    else:
        if post_embeddings and len({len(v) for v in post_embeddings}) > 1:
            raise ShapeError("embedding vectors must share one dimension")
        matrix = np.asarray(post_embeddings, dtype=np.float64)
        if matrix.ndim != 2:
            raise ShapeError("embeddings must be vectors of one dimension")
    if matrix.shape[0] == 0:
        raise UndefinedInputError("cannot aggregate an empty embedding list")
    v0 = matrix[0]
    return v0 + (matrix - v0).mean(axis=0)


@dataclass
class FeatureMatrix:
    """Named, group-tagged numeric matrix keyed by user id."""

    user_ids: list[str]
    names: list[str]
    groups: list[str]
    values: np.ndarray  # (n, m) float64

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        n, m = self.values.shape
        if len(self.user_ids) != n:
            raise ShapeError("user id count must match row count")
        if len(self.names) != m or len(self.groups) != m:
            raise ShapeError("name/group count must match column count")
        if len(set(self.names)) != m:
            raise ParameterError("column names must be unique")
        bad = set(self.groups) - set(VALID_GROUPS)
        if bad:
            raise ParameterError(f"unknown group tags {sorted(bad)}")
        if not np.isfinite(self.values).all():
            raise ParameterError("matrix contains NaN or infinite entries")

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape

    def columns_in_groups(self, groups: Iterable[str]) -> list[int]:
        wanted = set(groups)
        return [j for j, g in enumerate(self.groups) if g in wanted]

    def select_columns(self, indices: list[int]) -> "FeatureMatrix":
        return FeatureMatrix(
            list(self.user_ids),
            [self.names[j] for j in indices],
            [self.groups[j] for j in indices],
            self.values[:, indices].copy(),
        )

    def to_tsv(self) -> str:
        header = "user_id\t" + "\t".join(
            f"{name}:{group}" for name, group in zip(self.names, self.groups)
        )
        lines = [header]
        for uid, row in zip(self.user_ids, self.values):
            lines.append(uid + "\t" + "\t".join(repr(float(v)) for v in row))
        return "\n".join(lines) + "\n"

    @classmethod
    def from_tsv(cls, text: str) -> "FeatureMatrix":
        lines = [line for line in text.splitlines() if line]
        if not lines:
            raise ParameterError("empty matrix file")
        header = lines[0].split("\t")
        if header[0] != "user_id":
            raise ParameterError("matrix header must start with user_id")
        names: list[str] = []
        groups: list[str] = []
        for cell in header[1:]:
            name, sep, group = cell.rpartition(":")
            if not sep:
                raise ParameterError(f"header cell {cell!r} lacks a group tag")
            names.append(name)
            groups.append(group)
        user_ids: list[str] = []
        rows: list[list[float]] = []
        for line in lines[1:]:
            cells = line.split("\t")
            if len(cells) != len(header):
                raise ParameterError("row width does not match header")
            user_ids.append(cells[0])
            rows.append([float(c) for c in cells[1:]])
        values = np.asarray(rows, dtype=np.float64).reshape(len(user_ids), len(names))
        return cls(user_ids, names, groups, values)


def build_emoji_vocabulary(
    records: list[UserRecord], min_user_fraction: float = 0.001
) -> tuple[str, ...]:
    """Emoji appearing in at least the given fraction of users, ordered by
    total frequency (descending; ties lexicographic)."""
    if not 0.0 <= min_user_fraction <= 1.0:
        raise ParameterError("min_user_fraction must lie in [0,1]")
    user_counts: dict[str, int] = {}
    total_counts: dict[str, int] = {}
    for record in records:
        freqs = textprep.emoji_frequencies(record.posts)
        for emoji, count in freqs.items():
            user_counts[emoji] = user_counts.get(emoji, 0) + 1
            total_counts[emoji] = total_counts.get(emoji, 0) + count
    n = len(records)
    if n == 0:
        return ()
    kept = [e for e, uc in user_counts.items() if uc / n >= min_user_fraction]
    kept.sort(key=lambda e: (-total_counts[e], e))
    return tuple(kept)


def _record_tokens(record: UserRecord) -> tuple[list[str], list[str]]:
    bio_tokens = textprep.tokenize(textprep.clean_text(record.biography))
    tweet_tokens: list[str] = []
    for post in record.posts:
        tweet_tokens.extend(textprep.tokenize(textprep.clean_text(post)))
    return bio_tokens, tweet_tokens


def assemble_matrix(
    records: list[UserRecord],
    parts: Iterable[str],
    liwc_lexicon: Lexicon | None = None,
    valence_lexicon: Lexicon | None = None,
    emoji_vocabulary: list[str] | None = None,
) -> FeatureMatrix:
    """Build the grouped feature matrix for the requested parts.

    Columns always appear in the order SM, BOTOMETER, LIWC, BERT, VADER,
    EMOJI. With every lexical part and 768-dim embeddings the roster width is
    866. Missing per-record inputs raise an assembly error naming the record
    and the part.
    """
    parts = set(parts)
    unknown = parts - set(GROUP_ORDER)
    if unknown:
        raise ParameterError(f"unknown parts {sorted(unknown)}")
    if not parts:
        raise ParameterError("at least one part is required")
    if "EMOJI" in parts and emoji_vocabulary is None:
        raise ParameterError("EMOJI part needs an emoji vocabulary")
    if liwc_lexicon is None:
        liwc_lexicon = default_liwc_lexicon()
    if valence_lexicon is None:
        valence_lexicon = default_valence_lexicon()

    embed_dim: int | None = None
    if "BERT" in parts:
        for record in records:
            if record.post_embeddings is None or record.post_embeddings.shape[0] == 0:
                raise AssemblyError(f"record {record.user_id}: BERT part needs embeddings")
            dim = record.post_embeddings.shape[1]
            if embed_dim is None:
                embed_dim = dim
            elif dim != embed_dim:
                raise AssemblyError(
                    f"record {record.user_id}: embedding dimension {dim} != {embed_dim}"
                )
        if embed_dim is None:
            raise AssemblyError("BERT part needs at least one record")
    if "BOTOMETER" in parts:
        for record in records:
            if record.bot_scores is None:
                raise AssemblyError(f"record {record.user_id}: BOTOMETER part needs bot scores")

    names: list[str] = []
    groups: list[str] = []
    if "SM" in parts:
        names += list(SM_FIELDS)
        groups += ["SM"] * len(SM_FIELDS)
    if "BOTOMETER" in parts:
        names += list(BOT_SCORE_FIELDS)
        groups += ["BOTOMETER"] * len(BOT_SCORE_FIELDS)
    if "LIWC" in parts:
        liwc_names = list(liwc_lexicon.categories) + ["total_word_count"]
        names += liwc_names
        groups += ["LIWC"] * len(liwc_names)
    if "BERT" in parts:
        names += [f"e_{i}" for i in range(1, embed_dim + 1)]
        groups += ["BERT"] * embed_dim
    if "VADER" in parts:
        names += list(VADER_FIELDS)
        groups += ["VADER"] * len(VADER_FIELDS)
    if "EMOJI" in parts:
        names += [f"emoji_{e}" for e in emoji_vocabulary]
        groups += ["EMOJI"] * len(emoji_vocabulary)

    needs_tokens = bool(parts & {"LIWC", "VADER"})
    rows = np.zeros((len(records), len(names)), dtype=np.float64)
    for i, record in enumerate(records):
        row: list[float] = []
        if needs_tokens:
            bio_tokens, tweet_tokens = _record_tokens(record)
        if "SM" in parts:
            row.extend(float(getattr(record, f)) for f in SM_FIELDS)
        if "BOTOMETER" in parts:
            row.extend(record.bot_scores[f] for f in BOT_SCORE_FIELDS)
        if "LIWC" in parts:
            scores = liwc_scores(tweet_tokens, liwc_lexicon)
            row.extend(scores[c] for c in liwc_lexicon.categories)
            row.append(scores["total_word_count"])
        if "BERT" in parts:
            row.extend(aggregate_embeddings(record.post_embeddings))
        if "VADER" in parts:
            vs = valence_scores(bio_tokens, tweet_tokens, valence_lexicon)
            row.extend(vs[f] for f in VADER_FIELDS)
        if "EMOJI" in parts:
            freqs = textprep.emoji_frequencies(record.posts)
            row.extend(float(freqs.get(e, 0)) for e in emoji_vocabulary)
        rows[i] = row

    return FeatureMatrix([r.user_id for r in records], names, groups, rows)


def standardize(fm: FeatureMatrix) -> tuple[FeatureMatrix, np.ndarray, np.ndarray]:
    """Column-wise z-scoring; zero-variance columns become zeros with scale 1."""
    n = fm.values.shape[0]
    if n < 2:
        raise InsufficientDataError("standardization needs at least 2 rows")
    means = fm.values.mean(axis=0)
    scales = fm.values.std(axis=0)
    constant = scales == 0.0
    scales = np.where(constant, 1.0, scales)
    z = (fm.values - means) / scales
    z[:, constant] = 0.0
    out = FeatureMatrix(list(fm.user_ids), list(fm.names), list(fm.groups), z)
    return out, means, scales


@dataclass(frozen=True)
class PcaModel:
    """Linear reducer: x -> ((x - means) / scales) @ components.T."""

    means: np.ndarray
    scales: np.ndarray
    components: np.ndarray  # (k, m), orthonormal rows
    explained_variance_ratio: np.ndarray
    eigenvalues: np.ndarray

    def __post_init__(self):
        k, m = self.components.shape
        if self.means.shape != (m,) or self.scales.shape != (m,):
            raise ShapeError("means/scales must match component width")
        if not (self.scales > 0).all():
            raise ParameterError("scales must be positive")
        gram = self.components @ self.components.T
        if not np.allclose(gram, np.eye(k), atol=1e-8):
            raise ParameterError("component rows must be orthonormal")
        evr = self.explained_variance_ratio
        if evr.shape != (k,) or not (evr > 0).all():
            raise ParameterError("explained variance ratios must be positive")
        if (np.diff(evr) > 1e-12).any():
            raise ParameterError("explained variance ratios must be non-increasing")
        if evr.sum() > 1 + 1e-9:
            raise ParameterError("explained variance ratios must sum to at most 1")


def pca_fit(
    values: np.ndarray,
    k: int,
    means: np.ndarray | None = None,
    scales: np.ndarray | None = None,
) -> PcaModel:
    """Top-k eigendecomposition of the sample covariance of `values`.

    `values` is the (already standardized) data the covariance is taken of;
    optional means/scales record the upstream standardization so the model
    can transform raw rows. Component signs are fixed by making each row's
    largest-magnitude entry positive.
    """
    X = np.asarray(values, dtype=np.float64)
    if X.ndim != 2:
        raise ShapeError("pca_fit expects a 2-D array")
    n, m = X.shape
    if not 1 <= k <= min(n - 1, m):
        raise ParameterError(f"k={k} outside [1, min(n-1, m)] for shape {X.shape}")
    cov = np.cov(X, rowvar=False, ddof=1).reshape(m, m)
    try:
        eigenvalues, eigenvectors = np.linalg.eigh(cov)
    except np.linalg.LinAlgError as exc:
        raise NumericError(f"eigensolver failed: {exc}") from exc
    order = np.argsort(eigenvalues)[::-1]
    eigenvalues = np.clip(eigenvalues[order], 0.0, None)
    eigenvectors = eigenvectors[:, order]
    total = eigenvalues.sum()
    if total <= 0 or eigenvalues[k - 1] <= 0:
        raise ParameterError("k exceeds the positive spectrum of the covariance")
    components = eigenvectors[:, :k].T.copy()
    for row in components:
        pivot = np.argmax(np.abs(row))
        if row[pivot] < 0:
            row *= -1.0
    if means is None:
        means = X.mean(axis=0)
    if scales is None:
        scales = np.ones(m)
    return PcaModel(
        means=np.asarray(means, dtype=np.float64),
        scales=np.asarray(scales, dtype=np.float64),
        components=components,
        explained_variance_ratio=eigenvalues[:k] / total,
        eigenvalues=eigenvalues[:k],
    )


def pca_transform(model: PcaModel, values: np.ndarray) -> np.ndarray:
    """Project rows onto the fitted components."""
    X = np.asarray(values, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != model.components.shape[1]:
        raise ShapeError("column count does not match the fitted model")
    return ((X - model.means) / model.scales) @ model.components.T


def reduce_matrix(fm: FeatureMatrix, k: int) -> tuple[FeatureMatrix, PcaModel]:
    """Standardize then project onto the top-k principal components."""
    std, means, scales = standardize(fm)
    model = pca_fit(std.values, k, means=means, scales=scales)
    projected = std.values @ model.components.T
    names = [f"pc_{i}" for i in range(1, k + 1)]
    reduced = FeatureMatrix(list(fm.user_ids), names, ["PC"] * k, projected)
    return reduced, model


def pca_model_to_json(model: PcaModel) -> dict:
    return {
        "means": [repr(float(v)) for v in model.means],
        "scales": [repr(float(v)) for v in model.scales],
        "components": [[repr(float(v)) for v in row] for row in model.components],
        "explained_variance_ratio": [repr(float(v)) for v in model.explained_variance_ratio],
        "eigenvalues": [repr(float(v)) for v in model.eigenvalues],
    }


def pca_model_from_json(doc: dict) -> PcaModel:
    return PcaModel(
        means=np.array([float(v) for v in doc["means"]]),
        scales=np.array([float(v) for v in doc["scales"]]),
        components=np.array([[float(v) for v in row] for row in doc["components"]]),
        explained_variance_ratio=np.array(
            [float(v) for v in doc["explained_variance_ratio"]]
        ),
        eigenvalues=np.array([float(v) for v in doc["eigenvalues"]]),
    )

"""User-record ingestion, self-report labelling, dedup and inclusion filtering.

Corpus files are UTF-8, one JSON object per line. Required keys: user_id,
biography, posts. Optional keys: the eleven social-metadata fields, a
bot_scores map (seven named scores in [0,1]), post_embeddings (one vector per
post, consistent dimension) and label (a four-letter acronym). Malformed lines
are collected into a rejects report ("line N: <reason>"), never dropped
silently.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field, replace
from typing import Callable, Iterable

import numpy as np

from mbtilab.errors import ParameterError

DICHOTOMIES: tuple[tuple[str, str], ...] = (("E", "I"), ("N", "S"), ("T", "F"), ("J", "P"))
DICHOTOMY_NAMES: tuple[str, ...] = ("E/I", "N/S", "T/F", "J/P")

#: The sixteen four-letter acronyms, one letter from each dichotomy.
MBTI_TYPES: tuple[str, ...] = tuple(
    a + b + c + d for a in "EI" for b in "NS" for c in "TF" for d in "JP"
)
_MBTI_SET = frozenset(MBTI_TYPES)

COUNT_FIELDS = (
    "followers_count",
    "friends_count",
    "listed_count",
    "favourites_count",
    "statuses_count",
)
FLAG_FIELDS = (
    "geo_enabled",
    "verified",
    "default_profile",
    "default_profile_image",
    "profile_use_background_image",
    "has_extended_profile",
)
#: Social-metadata feature columns, in roster order.
SM_FIELDS = (
    "followers_count",
    "friends_count",
    "listed_count",
    "favourites_count",
    "geo_enabled",
    "verified",
    "statuses_count",
    "default_profile",
    "default_profile_image",
    "profile_use_background_image",
    "has_extended_profile",
)
#: Ingested bot-likelihood scores: overall CAP score plus six sub-scores.
BOT_SCORE_FIELDS = (
    "cap_english",
    "english_astroturf",
    "english_fake_follower",
    "english_financial",
    "english_other",
    "english_self_declared",
    "english_spammer",
)


@dataclass(frozen=True, order=True)
class MbtiType:
    """One personality type: a letter from each of the four dichotomies."""

    ei: str
    ns: str
    tf: str
    jp: str

    def __post_init__(self):
        for value, pair in zip((self.ei, self.ns, self.tf, self.jp), DICHOTOMIES):
            if value not in pair:
                raise ParameterError(f"letter {value!r} not in dichotomy {pair}")

    @classmethod
    def parse(cls, text: str) -> "MbtiType":
        s = text.strip().upper()
        if s not in _MBTI_SET:
            raise ParameterError(f"{text!r} is not one of the 16 type acronyms")
        return cls(s[0], s[1], s[2], s[3])

    def render(self) -> str:
        return self.ei + self.ns + self.tf + self.jp

    @property
    def letters(self) -> tuple[str, str, str, str]:
        return (self.ei, self.ns, self.tf, self.jp)

    def __str__(self) -> str:  # pragma: no cover - convenience
        return self.render()


@dataclass
class UserRecord:
    """One account: texts, social metadata, optional bot scores/embeddings."""

    user_id: str
    biography: str
    posts: list[str]
    followers_count: int = 0
    friends_count: int = 0
    listed_count: int = 0
    favourites_count: int = 0
    statuses_count: int = 0
    geo_enabled: bool = False
    verified: bool = False
    default_profile: bool = False
    default_profile_image: bool = False
    profile_use_background_image: bool = False
    has_extended_profile: bool = False
    bot_scores: dict[str, float] | None = None
    post_embeddings: np.ndarray | None = None  # (n_posts, d)
    label: MbtiType | None = None

    def to_json(self) -> str:
        doc: dict = {
            "user_id": self.user_id,
            "biography": self.biography,
            "posts": list(self.posts),
        }
        for name in COUNT_FIELDS:
            doc[name] = int(getattr(self, name))
        for name in FLAG_FIELDS:
            doc[name] = bool(getattr(self, name))
        if self.bot_scores is not None:
            doc["bot_scores"] = {k: self.bot_scores[k] for k in BOT_SCORE_FIELDS}
        if self.post_embeddings is not None:
            doc["post_embeddings"] = [[float(v) for v in row] for row in self.post_embeddings]
        if self.label is not None:
            doc["label"] = self.label.render()
        return json.dumps(doc, ensure_ascii=False)


def _parse_record(doc: dict) -> UserRecord:
    """Validate one decoded JSON object; raises ValueError with a reason."""
    if not isinstance(doc, dict):
        raise ValueError("record is not an object")
    for key in ("user_id", "biography", "posts"):
        if key not in doc:
            raise ValueError(f"missing required key {key!r}")
    if not isinstance(doc["user_id"], str) or not doc["user_id"]:
        raise ValueError("user_id must be a non-empty string")
    if not isinstance(doc["biography"], str):
        raise ValueError("biography must be a string")
    posts = doc["posts"]
    if not isinstance(posts, list) or any(not isinstance(p, str) for p in posts):
        raise ValueError("posts must be a list of strings")

    kwargs: dict = {
        "user_id": doc["user_id"],
        "biography": doc["biography"],
        "posts": list(posts),
    }
    for name in COUNT_FIELDS:
        value = doc.get(name, 0)
        if not isinstance(value, int) or isinstance(value, bool) or value < 0:
            raise ValueError(f"{name} must be a non-negative integer")
        kwargs[name] = value
    for name in FLAG_FIELDS:
        value = doc.get(name, False)
        if not isinstance(value, bool):
            raise ValueError(f"{name} must be a boolean")
        kwargs[name] = value

    scores = doc.get("bot_scores")
    if scores is not None:
        if not isinstance(scores, dict):
            raise ValueError("bot_scores must be a map")
        missing = [k for k in BOT_SCORE_FIELDS if k not in scores]
        if missing:
            raise ValueError(f"bot_scores missing {missing[0]!r}")
        parsed = {}
        for key in BOT_SCORE_FIELDS:
            v = scores[key]
            if not isinstance(v, (int, float)) or isinstance(v, bool) or not 0.0 <= v <= 1.0:
                raise ValueError(f"bot score {key!r} must lie in [0,1]")
            parsed[key] = float(v)
        kwargs["bot_scores"] = parsed

    embeddings = doc.get("post_embeddings")
    if embeddings is not None:
        if not isinstance(embeddings, list) or len(embeddings) != len(posts):
            raise ValueError("post_embeddings length must equal posts length")
        dims = {len(v) for v in embeddings}
        if len(dims) > 1:
            raise ValueError("post_embeddings vectors must share one dimension")
        kwargs["post_embeddings"] = np.asarray(embeddings, dtype=np.float64)

    if doc.get("label") is not None:
        try:
            kwargs["label"] = MbtiType.parse(doc["label"])
        except (ParameterError, AttributeError):
            raise ValueError(f"label {doc['label']!r} is not a type acronym")
    return UserRecord(**kwargs)


def parse_records(lines: Iterable[str]) -> tuple[list[UserRecord], list[tuple[int, str]]]:
    """Parse a line-delimited corpus stream.

    Returns (records in input order, rejects as (line_number, reason)).
    Blank lines are skipped. I/O errors from the underlying stream propagate.
    """
    records: list[UserRecord] = []
    rejects: list[tuple[int, str]] = []
    for lineno, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            doc = json.loads(line)
        except json.JSONDecodeError:
            rejects.append((lineno, "invalid record syntax"))
            continue
        try:
            records.append(_parse_record(doc))
        except ValueError as exc:
            rejects.append((lineno, str(exc)))
    return records, rejects


def format_rejects(rejects: list[tuple[int, str]]) -> str:
    return "".join(f"line {lineno}: {reason}\n" for lineno, reason in rejects)


_TOKEN_RE = re.compile(r"[A-Za-z0-9]+")
# "I am x" / "I am a x" / "I am an x", case-insensitive, x a whole token.
_PHRASE_RE = re.compile(r"(?<![A-Za-z0-9])i\s+am\s+(?:an?\s+)?([A-Za-z0-9]+)", re.IGNORECASE)


def extract_mbti_labels(biography: str, posts: list[str], mode: str) -> set[MbtiType]:
    """Types self-reported in a biography (whole tokens) or in posts (phrases).

    Matching is case-insensitive and whole-token: acronyms embedded in longer
    alphanumeric runs never match.
    """
    found: set[MbtiType] = set()
    if mode == "username_bio":
        for token in _TOKEN_RE.findall(biography):
            if token.upper() in _MBTI_SET:
                found.add(MbtiType.parse(token))
    elif mode == "tweet_phrase":
        for post in posts:
            for candidate in _PHRASE_RE.findall(post):
                if candidate.upper() in _MBTI_SET:
                    found.add(MbtiType.parse(candidate))
    else:
        raise ParameterError(f"unknown extraction mode {mode!r}")
    return found


def referenced_types(record: UserRecord) -> set[MbtiType]:
    """All types a record references: bio tokens, post phrases, explicit label."""
    types = extract_mbti_labels(record.biography, [], "username_bio")
    types |= extract_mbti_labels("", record.posts, "tweet_phrase")
    if record.label is not None:
        types.add(record.label)
    return types


def deduplicate(records: list[UserRecord]) -> list[UserRecord]:
    """Keep the first record for each user_id, preserving order."""
    seen: set[str] = set()
    out: list[UserRecord] = []
    for record in records:
        if record.user_id not in seen:
            seen.add(record.user_id)
            out.append(record)
    return out


@dataclass(frozen=True)
class FilterPolicy:
    """Inclusion thresholds; defaults follow the published collection rules."""

    min_posts: int = 100
    min_english_fraction: float = 0.5
    max_cap_score: float = 0.8
    require_unique_label: bool = True

    def __post_init__(self):
        if self.min_posts < 0:
            raise ParameterError("min_posts must be >= 0")
        if not 0.0 <= self.min_english_fraction <= 1.0:
            raise ParameterError("min_english_fraction must lie in [0,1]")
        if not 0.0 <= self.max_cap_score <= 1.0:
            raise ParameterError("max_cap_score must lie in [0,1]")


#: Drop reasons in priority order; the first failing criterion wins.
DROP_REASONS = ("posts", "english", "bot", "label")


@dataclass(frozen=True)
class FilterDecision:
    keep: bool
    reason: str | None = None


def apply_inclusion_filter(
    record: UserRecord,
    policy: FilterPolicy,
    english_fraction: float,
    label_count: int,
) -> FilterDecision:
    """Keep/drop one record. Reasons follow the fixed order posts, english, bot, label.

    Post-count and CAP boundaries are inclusive-keep (>= min_posts) and
    exclusive-keep (< max_cap_score) respectively; records without bot scores
    pass the bot criterion.
    """
    if not 0.0 <= english_fraction <= 1.0:
        raise ParameterError("english_fraction must lie in [0,1]")
    if label_count < 0:
        raise ParameterError("label_count must be >= 0")
    if len(record.posts) < policy.min_posts:
        return FilterDecision(False, "posts")
    if not english_fraction > policy.min_english_fraction:
        return FilterDecision(False, "english")
    if record.bot_scores is not None and record.bot_scores["cap_english"] >= policy.max_cap_score:
        return FilterDecision(False, "bot")
    if policy.require_unique_label and label_count != 1:
        return FilterDecision(False, "label")
    return FilterDecision(True, None)


def filter_corpus(
    records: list[UserRecord],
    policy: FilterPolicy,
    detector: Callable[[str], bool] | None = None,
) -> tuple[list[UserRecord], list[tuple[str, str]]]:
    """Apply the inclusion filter to a corpus; resolve labels for kept records.

    Returns (kept records with label filled where uniquely referenced, drops
    as (user_id, reason)). Idempotent: running it twice changes nothing.
    """
    from mbtilab.textprep import english_fraction as _english_fraction

    kept: list[UserRecord] = []
    drops: list[tuple[str, str]] = []
    for record in records:
        fraction = _english_fraction(record.posts, detector) if record.posts else 0.0
        types = referenced_types(record)
        decision = apply_inclusion_filter(record, policy, fraction, len(types))
        if not decision.keep:
            drops.append((record.user_id, decision.reason))
            continue
        if record.label is None and len(types) == 1:
            record = replace(record, label=next(iter(types)))
        kept.append(record)
    return kept, drops

"""Text normalization, tweet-style tokenization, emoji counting, language check.

Cleaning contract: lowercase; URLs, email addresses, punctuation and digits
removed; emoji kept; whitespace collapsed. clean_text is idempotent. Tokens
are whitespace chunks with hashtags and mentions intact and each emoji
sequence split out as its own token; the 16 type acronyms are scrubbed.
"""

from __future__ import annotations

import re
import unicodedata
from bisect import bisect_right
from collections import Counter
from importlib import resources
from typing import Callable

from mbtilab.corpus import _MBTI_SET
from mbtilab.errors import UndefinedInputError

ZWJ = "‍"
VS16 = "️"
_SKIN_LO, _SKIN_HI = 0x1F3FB, 0x1F3FF
_RI_LO, _RI_HI = 0x1F1E6, 0x1F1FF

_URL_RE = re.compile(r"(?:https?://|www\.)\S+", re.IGNORECASE)
_EMAIL_RE = re.compile(r"[A-Za-z0-9._%+-]+@[A-Za-z0-9.-]+\.[A-Za-z]{2,}")
_APOSTROPHES = "'’"


def _read_data_text(name: str) -> str:
    return (resources.files("mbtilab") / "data" / name).read_text(encoding="utf-8")


def load_emoji_ranges(text: str | None = None) -> tuple[tuple[int, int], ...]:
    """Parse the emoji base-range table (hex codepoints, 'LO..HI' or single)."""
    if text is None:
        text = _read_data_text("emoji_ranges.txt")
    ranges: list[tuple[int, int]] = []
    for line in text.splitlines():
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if ".." in line:
            lo, hi = line.split("..", 1)
            ranges.append((int(lo, 16), int(hi, 16)))
        else:
            cp = int(line, 16)
            ranges.append((cp, cp))
    ranges.sort()
    return tuple(ranges)


def load_stopwords(text: str | None = None) -> frozenset[str]:
    if text is None:
        text = _read_data_text("stopwords.txt")
    words = set()
    for line in text.splitlines():
        line = line.split("#", 1)[0].strip()
        if line:
            words.add(line.lower())
    return frozenset(words)


_RANGES = load_emoji_ranges()
_RANGE_STARTS = tuple(lo for lo, _ in _RANGES)
_RANGE_ENDS = tuple(hi for _, hi in _RANGES)
_STOPWORDS = load_stopwords()


def is_emoji_base(cp: int) -> bool:
    idx = bisect_right(_RANGE_STARTS, cp) - 1
    return idx >= 0 and cp <= _RANGE_ENDS[idx]


def _consume_extensions(text: str, j: int) -> int:
    while j < len(text) and (text[j] == VS16 or _SKIN_LO <= ord(text[j]) <= _SKIN_HI):
        j += 1
    return j


def _scan_emoji(text: str, i: int) -> int:
    """Length of the emoji sequence starting at text[i], or 0 if none starts."""
    cp = ord(text[i])
    if _RI_LO <= cp <= _RI_HI:
        # regional indicators pair up into flags; a lone one still counts
        if i + 1 < len(text) and _RI_LO <= ord(text[i + 1]) <= _RI_HI:
            return 2
        return 1
    if not is_emoji_base(cp):
        return 0
    j = _consume_extensions(text, i + 1)
    while j + 1 < len(text) and text[j] == ZWJ and is_emoji_base(ord(text[j + 1])):
        j = _consume_extensions(text, j + 2)
    return j - i


def _is_letter(ch: str) -> bool:
    return unicodedata.category(ch)[0] == "L"


def clean_text(raw: str) -> str:
    """Normalize, strip URLs/emails, lowercase, drop punctuation and digits.

    Hashtags and mentions survive when the marker starts a token and is
    followed by a letter. Apostrophes merge contractions (don't -> dont).
    Emoji and combining marks are kept; all other symbols become spaces.
    """
    text = unicodedata.normalize("NFC", raw)
    text = _URL_RE.sub(" ", text)
    text = _EMAIL_RE.sub(" ", text)
    text = text.lower()

    kept: list[str] = []
    for ch in text:
        if ch == ZWJ:
            kept.append(ch)
            continue
        if ch in "#@":
            kept.append(ch)  # positional rule applied below
            continue
        if ch in _APOSTROPHES:
            continue
        cat = unicodedata.category(ch)
        head = cat[0]
        if head in ("L", "M"):
            kept.append(ch)
        elif head == "S" and is_emoji_base(ord(ch)):
            kept.append(ch)
        else:
            kept.append(" ")
    text = "".join(kept)

    # keep '#'/'@' only token-initial and letter-prefixed; otherwise split
    out: list[str] = []
    for k, ch in enumerate(text):
        if ch in "#@":
            initial = k == 0 or text[k - 1] == " " or text[k - 1] in "#@"
            follows = k + 1 < len(text) and _is_letter(text[k + 1])
            out.append(ch if (initial and follows) else " ")
        else:
            out.append(ch)
    return " ".join("".join(out).split())


def _split_chunk(chunk: str) -> list[str]:
    """Separate emoji sequences in a whitespace chunk into their own tokens."""
    tokens: list[str] = []
    word: list[str] = []
    i = 0
    while i < len(chunk):
        n = _scan_emoji(chunk, i)
        if n:
            if word:
                tokens.append("".join(word))
                word = []
            tokens.append(chunk[i : i + n])
            i += n
        else:
            word.append(chunk[i])
            i += 1
    if word:
        tokens.append("".join(word))
    return tokens


def _is_mbti_token(token: str) -> bool:
    body = token.lstrip("#@")
    return body.upper() in _MBTI_SET


def tokenize(cleaned: str) -> list[str]:
    """Whitespace split keeping hashtags/mentions; emoji split out; acronyms
    scrubbed (hashtag/mention forms of an acronym scrub too, to avoid label
    leakage)."""
    tokens: list[str] = []
    for chunk in cleaned.split():
        for token in _split_chunk(chunk):
            if token and not _is_mbti_token(token):
                tokens.append(token)
    return tokens


def emoji_frequencies(posts: list[str]) -> dict[str, int]:
    """Count every emoji sequence across posts; ZWJ/skin-tone/flag sequences
    count as single emoji."""
    counts: Counter[str] = Counter()
    for post in posts:
        text = unicodedata.normalize("NFC", post)
        i = 0
        while i < len(text):
            n = _scan_emoji(text, i)
            if n:
                counts[text[i : i + n]] += 1
                i += n
            else:
                i += 1
    return dict(counts)


def stopword_detector(post: str) -> bool:
    """Default language check: at least 2 token hits in the stopword list."""
    hits = 0
    for token in tokenize(clean_text(post)):
        if token in _STOPWORDS:
            hits += 1
            if hits >= 2:
                return True
    return False


def english_fraction(posts: list[str], detector: Callable[[str], bool] | None = None) -> float:
    """Fraction of posts the detector labels English."""
    if not posts:
        raise UndefinedInputError("english_fraction needs at least one post")
    if detector is None:
        detector = stopword_detector
    hits = sum(1 for post in posts if detector(post))
    return hits / len(posts)

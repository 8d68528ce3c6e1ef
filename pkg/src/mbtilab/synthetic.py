"""Seeded synthetic corpus with planted, documented signal.

Each user draws four letters independently (configurable class proportions),
then emits posts whose carrier-word rates, social counts, one emoji, and the
first four embedding coordinates shift with the drawn letters. A sidecar
document records the generating configuration, the drawn type per user, and
the carrier feature list, so downstream recovery can be checked against
ground truth. All draws come from one labeled stream in a fixed per-user
order; the output is a pure function of the configuration.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field

import numpy as np

from mbtilab.corpus import DICHOTOMIES, DICHOTOMY_NAMES, MbtiType, UserRecord
from mbtilab.errors import ParameterError
from mbtilab.rng import rng_for

#: Carrier words per dichotomy; every word is a category member in the
#: shipped lexicon, so the named category column inherits the signal.
CARRIER_WORDS = {
    "posemo": ("happy", "great", "love", "awesome", "wonderful"),
    "prep": ("between", "through", "during", "above", "within"),
    "cogproc": ("think", "because", "reason", "maybe", "therefore"),
    "time": ("today", "tomorrow", "schedule", "deadline", "season"),
    "filler": ("whatever", "stuff", "blah", "basically", "anyway"),
}

BASE_TOKENS = (
    "the", "a", "is", "on", "day", "photo", "coffee", "walk",
    "city", "music", "game", "and", "to", "it", "this", "was",
)

EMOJI_POOL = ("😀", "😂", "❤️", "🔥", "👍", "🎉", "🌟", "😎")
ROCKET = "🚀"

NON_ENGLISH_TOKENS = ("zorbal", "quexo", "vrint", "plomb", "ghast", "drune", "yilk", "smor")

#: (feature, dichotomy index, sign) — sign +1 means larger values for the
#: pair's first letter. Word-rate carriers multiply a base Poisson rate by
#: exp(sign * strength * word_shift); count carriers shift a log-normal mean.
PLANTED_CARRIERS = (
    ("posemo", 0, +1),
    ("followers_count", 0, +1),
    ("prep", 1, +1),
    ("favourites_count", 1, +1),
    ("statuses_count", 1, -1),
    (f"emoji_{ROCKET}", 1, +1),
    ("cogproc", 2, +1),
    ("time", 3, +1),
    ("filler", 3, -1),
    ("e_1", 0, +1),
    ("e_2", 1, +1),
    ("e_3", 2, +1),
    ("e_4", 3, +1),
)


@dataclass(frozen=True)
class SynthConfig:
    n_users: int = 2000
    seed: int = 7
    posts_per_user: float = 15.0
    embedding_dim: int = 8
    #: probability of the pair's first letter, per dichotomy name
    imbalance: dict = field(
        default_factory=lambda: {"E/I": 0.6, "N/S": 0.85, "T/F": 0.55, "J/P": 0.5}
    )
    signal_strength: float = 1.0
    bot_fraction: float = 0.02
    non_english_fraction: float = 0.01
    ambiguous_label_fraction: float = 0.03
    missing_label_fraction: float = 0.01
    phrase_label_fraction: float = 0.10
    duplicate_fraction: float = 0.01
    word_shift: float = 0.6
    count_shift: float = 0.5
    embed_shift: float = 0.3

    def __post_init__(self):
        if self.n_users < 100:
            raise ParameterError("n_users must be >= 100")
        if set(self.imbalance) != set(DICHOTOMY_NAMES):
            raise ParameterError(f"imbalance must name exactly {DICHOTOMY_NAMES}")
        for name, p in self.imbalance.items():
            if not 0.0 < p < 1.0:
                raise ParameterError(f"imbalance[{name!r}] must lie in (0, 1)")
        if self.posts_per_user <= 0:
            raise ParameterError("posts_per_user must be positive")
        if self.embedding_dim < 4:
            raise ParameterError("embedding_dim must be >= 4 (4 planted coordinates)")
        if self.signal_strength < 0:
            raise ParameterError("signal_strength must be >= 0")
        for fname in (
            "bot_fraction",
            "non_english_fraction",
            "ambiguous_label_fraction",
            "missing_label_fraction",
            "phrase_label_fraction",
            "duplicate_fraction",
        ):
            value = getattr(self, fname)
            if not 0.0 <= value < 1.0:
                raise ParameterError(f"{fname} must lie in [0, 1)")


def bundled_corpus_config() -> SynthConfig:
    """The fixed demonstration corpus: 2000 users, an 85/15 N/S-style split,
    and a deliberately weak planted signal, so class imbalance dominates a
    classifier trained without any rebalancing."""
    return SynthConfig(n_users=2000, seed=7, signal_strength=0.18)


def _poisson_rate(base: float, shift: float, s: float) -> float:
    return base * float(np.exp(shift * s))


def _post_text(rng: np.random.Generator, carriers: dict[str, float], rocket_rate: float) -> str:
    tokens = list(BASE_TOKENS[: 8 + int(rng.integers(0, 8))])
    for category in ("posemo", "prep", "cogproc", "time", "filler"):
        count = int(rng.poisson(carriers[category]))
        words = CARRIER_WORDS[category]
        for _ in range(count):
            tokens.append(words[int(rng.integers(0, len(words)))])
    n_emoji = int(rng.poisson(0.4))
    for _ in range(n_emoji):
        tokens.append(EMOJI_POOL[int(rng.integers(0, len(EMOJI_POOL)))])
    for _ in range(int(rng.poisson(rocket_rate))):
        tokens.append(ROCKET)
    text = " ".join(tokens)
    if rng.random() < 0.1:
        text += " check https://ex.co/a1b2 now!!"
    return text


def generate_corpus(config: SynthConfig) -> tuple[list[UserRecord], dict]:
    """Generate records plus a ground-truth sidecar document."""
    rng = rng_for(config.seed, "synthesize")
    sigma = config.signal_strength
    records: list[UserRecord] = []
    types: dict[str, str] = {}

    for i in range(config.n_users):
        user_id = f"u{i:05d}"
        letters = []
        signs = []
        for name, pair in zip(DICHOTOMY_NAMES, DICHOTOMIES):
            first = rng.random() < config.imbalance[name]
            letters.append(pair[0] if first else pair[1])
            signs.append(1.0 if first else -1.0)
        mbti = MbtiType(*letters)
        types[user_id] = mbti.render()

        n_posts = max(1, int(rng.poisson(config.posts_per_user)))

        cs = config.count_shift * sigma
        followers = int(np.exp(rng.normal(5.0 + cs * signs[0], 0.8)))
        friends = int(np.exp(rng.normal(5.0, 0.8)))
        listed = int(np.exp(rng.normal(2.0, 1.0)))
        favourites = int(np.exp(rng.normal(6.0 + cs * signs[1], 0.9)))
        statuses = int(np.exp(rng.normal(6.0 - cs * signs[1], 0.9)))
        flags = rng.random(6) < np.array([0.3, 0.05, 0.4, 0.1, 0.6, 0.3])

        is_bot = rng.random() < config.bot_fraction
        cap = float(rng.uniform(0.8, 1.0)) if is_bot else float(rng.uniform(0.01, 0.6))
        subs = rng.uniform(0.0, 0.5, size=6)
        bot_scores = {"cap_english": round(cap, 4)}
        for key, value in zip(
            (
                "english_astroturf",
                "english_fake_follower",
                "english_financial",
                "english_other",
                "english_self_declared",
                "english_spammer",
            ),
            subs,
        ):
            bot_scores[key] = round(float(value), 4)

        non_english = rng.random() < config.non_english_fraction
        mode_draw = rng.random()
        if mode_draw < config.ambiguous_label_fraction:
            label_mode = "ambiguous"
        elif mode_draw < config.ambiguous_label_fraction + config.missing_label_fraction:
            label_mode = "missing"
        elif (
            mode_draw
            < config.ambiguous_label_fraction
            + config.missing_label_fraction
            + config.phrase_label_fraction
        ):
            label_mode = "phrase"
        else:
            label_mode = "bio"

        ws = config.word_shift * sigma
        rates = {
            "posemo": _poisson_rate(0.7, ws, signs[0]),
            "prep": _poisson_rate(0.7, ws, signs[1]),
            "cogproc": _poisson_rate(0.7, ws, signs[2]),
            "time": _poisson_rate(0.6, ws, signs[3]),
            "filler": _poisson_rate(0.6, ws, -signs[3]),
        }
        rocket_rate = _poisson_rate(0.25, 0.8 * sigma, signs[1])

        posts: list[str] = []
        for _ in range(n_posts):
            if non_english:
                k = 6 + int(rng.integers(0, 5))
                picks = rng.integers(0, len(NON_ENGLISH_TOKENS), size=k)
                posts.append(" ".join(NON_ENGLISH_TOKENS[p] for p in picks))
            else:
                posts.append(_post_text(rng, rates, rocket_rate))
        if label_mode == "phrase" and not non_english:
            slot = int(rng.integers(0, n_posts))
            posts[slot] = f"long story short i am an {mbti.render().lower()} and it shows"

        embeddings = rng.normal(0.0, 1.0, size=(n_posts, config.embedding_dim))
        es = config.embed_shift * sigma
        for d in range(4):
            embeddings[:, d] += es * signs[d]
        embeddings = np.round(embeddings, 4)

        if label_mode == "bio":
            biography = f"proud {mbti.render()} and weekend {BASE_TOKENS[i % 5]} fan"
        elif label_mode == "ambiguous":
            other = "ISTP" if mbti.render() != "ISTP" else "ENFJ"
            biography = f"proud {mbti.render()} or maybe {other} who knows"
        else:
            biography = "just a person online"

        records.append(
            UserRecord(
                user_id=user_id,
                biography=biography,
                posts=posts,
                followers_count=followers,
                friends_count=friends,
                listed_count=listed,
                favourites_count=favourites,
                statuses_count=statuses,
                geo_enabled=bool(flags[0]),
                verified=bool(flags[1]),
                default_profile=bool(flags[2]),
                default_profile_image=bool(flags[3]),
                profile_use_background_image=bool(flags[4]),
                has_extended_profile=bool(flags[5]),
                bot_scores=bot_scores,
                post_embeddings=embeddings,
            )
        )

    n_dupes = int(round(config.duplicate_fraction * config.n_users))
    for j in range(n_dupes):
        source = records[int(rng.integers(0, config.n_users))]
        records.append(
            UserRecord(
                user_id=source.user_id,
                biography=source.biography,
                posts=list(source.posts[:1]) or ["the same old day"],
                bot_scores=dict(source.bot_scores),
                post_embeddings=source.post_embeddings[:1].copy(),
            )
        )

    truth = {
        "config": asdict(config),
        "carriers": [
            {"feature": feat, "dichotomy": DICHOTOMY_NAMES[d], "favors": DICHOTOMIES[d][0 if sign > 0 else 1]}
            for feat, d, sign in PLANTED_CARRIERS
        ],
        "types": types,
    }
    return records, truth


def write_corpus(records: list[UserRecord], path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for record in records:
            fh.write(record.to_json() + "\n")


def write_truth(truth: dict, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(truth, fh, ensure_ascii=False, indent=2, sort_keys=True)
        fh.write("\n")

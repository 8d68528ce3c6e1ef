import json

import numpy as np
import pytest

from mbtilab.corpus import FilterPolicy, deduplicate, filter_corpus
from mbtilab import features as feats
from mbtilab.synthetic import SynthConfig, bundled_corpus_config, generate_corpus


@pytest.fixture(scope="session")
def small_corpus():
    """300 users, strong signal, short posts: fast enough for unit tests."""
    cfg = SynthConfig(n_users=300, seed=13, posts_per_user=8.0, signal_strength=1.0)
    records, truth = generate_corpus(cfg)
    return records, truth


@pytest.fixture(scope="session")
def small_kept(small_corpus):
    records, _ = small_corpus
    kept, _ = filter_corpus(deduplicate(records), FilterPolicy(min_posts=3))
    return kept


@pytest.fixture(scope="session")
def small_matrix(small_kept):
    vocab = feats.build_emoji_vocabulary(small_kept, 0.001)
    fm = feats.assemble_matrix(
        small_kept,
        ("SM", "BOTOMETER", "LIWC", "BERT", "VADER", "EMOJI"),
        emoji_vocabulary=vocab,
    )
    return fm


@pytest.fixture(scope="session")
def small_truths(small_kept):
    return np.array(
        [
            [1 if r.label.letters[d] == "ENTJ"[d] else 0 for r in small_kept]
            for d in range(4)
        ],
        dtype=np.int64,
    )


@pytest.fixture(scope="session")
def bundled_run():
    """The fixed weak-signal corpus, featurized once for the whole session."""
    records, truth = generate_corpus(bundled_corpus_config())
    kept, _ = filter_corpus(deduplicate(records), FilterPolicy(min_posts=5))
    vocab = feats.build_emoji_vocabulary(kept, 0.001)
    fm = feats.assemble_matrix(
        kept,
        ("SM", "BOTOMETER", "LIWC", "BERT", "VADER", "EMOJI"),
        emoji_vocabulary=vocab,
    )
    std, _, _ = feats.standardize(fm)
    truths = np.array(
        [[1 if r.label.letters[d] == "ENTJ"[d] else 0 for r in kept] for d in range(4)],
        dtype=np.int64,
    )
    return std, truths, truth


def write_jsonl(path, rows):
    with open(path, "w", encoding="utf-8") as fh:
        for row in rows:
            fh.write(json.dumps(row) + "\n")
    return str(path)

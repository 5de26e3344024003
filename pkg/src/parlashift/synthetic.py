"""Synthetic corpora with known ground truth.

Used to validate change detection: a "planted shift" swaps the context
distribution of chosen words between two slices, so those words are the
ground-truth most-changed vocabulary.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class PlantedShiftCorpus:
    tokens_a: list[str]
    tokens_b: list[str]
    planted: list[str]
    fillers: list[str]
    topic_words: list[list[str]]


def planted_shift_corpus(
    vocab_size: int = 200,
    n_planted: int = 5,
    n_topics: int = 10,
    sentences: int = 3000,
    sentence_length: int = 12,
    n_fillers: int = 10,
    seed: int = 0,
) -> PlantedShiftCorpus:
    """Two-slice topical corpus with ``n_planted`` context-swapped words.

    Words are split into ``n_topics`` disjoint topic pools plus a handful of
    high-frequency filler words that appear in every sentence (these are the
    natural targets of a most-frequent cut-off). Each sentence draws from a
    single topic pool. The planted words belong to one topic in slice A and
    to a different topic in slice B; every other word keeps its topic, so
    the planted words are exactly the words whose co-occurrence context
    changes.
    """
    if n_planted > n_topics:
        raise ValueError("need at least one topic per planted word")
    per_topic = (vocab_size - n_fillers) // n_topics
    if per_topic < 2:
        raise ValueError("vocabulary too small for the requested topic count")
    rng = np.random.default_rng(seed)

    fillers = [f"filler{i:02d}" for i in range(n_fillers)]
    topics = [
        [f"t{t:02d}w{i:02d}" for i in range(per_topic)] for t in range(n_topics)
    ]
    planted = [topics[i][0] for i in range(n_planted)]

    pools_a = [list(words) for words in topics]
    pools_b = [list(words) for words in topics]
    for i, word in enumerate(planted):
        target = (i + n_topics // 2) % n_topics
        pools_b[i].remove(word)
        pools_b[target].append(word)

    def generate(pools: list[list[str]]) -> list[str]:
        tokens: list[str] = []
        n_topic_words = sentence_length - 2
        for _ in range(sentences):
            pool = pools[int(rng.integers(n_topics))]
            picks = [pool[int(j)] for j in rng.integers(0, len(pool), size=n_topic_words)]
            picks.append(fillers[int(rng.integers(n_fillers))])
            picks.append(fillers[int(rng.integers(n_fillers))])
            order = rng.permutation(len(picks))
            tokens.extend(picks[int(j)] for j in order)
        return tokens

    return PlantedShiftCorpus(
        tokens_a=generate(pools_a),
        tokens_b=generate(pools_b),
        planted=planted,
        fillers=fillers,
        topic_words=topics,
    )


def synonym_corpus(
    sentences: int = 2000, sentence_length: int = 8, seed: int = 0
) -> tuple[list[str], str, str, str]:
    """Corpus where two words are drawn interchangeably in identical contexts.

    Returns (tokens, synonym_one, synonym_two, unrelated_word): the synonyms
    share a context pool, the unrelated word lives in a disjoint one.
    """
    rng = np.random.default_rng(seed)
    ctx_a = [f"ctxa{i:02d}" for i in range(10)]
    ctx_b = [f"ctxb{i:02d}" for i in range(10)]
    tokens: list[str] = []
    for _ in range(sentences):
        if rng.random() < 0.5:
            center = "syn_one" if rng.random() < 0.5 else "syn_two"
            pool = ctx_a
        else:
            center = "loner"
            pool = ctx_b
        sent = [pool[int(j)] for j in rng.integers(0, len(pool), size=sentence_length - 1)]
        sent.insert(int(rng.integers(sentence_length)), center)
        tokens.extend(sent)
    return tokens, "syn_one", "syn_two", "loner"


def drift_series(
    tracked: str = "tracked_word",
    n_slices: int = 4,
    shift_at: int = 2,
    sentences: int = 1500,
    sentence_length: int = 10,
    n_topics: int = 4,
    words_per_topic: int = 12,
    seed: int = 0,
) -> dict[str, list[str]]:
    """A series of slices where one word changes topic exactly once.

    The tracked word draws its contexts from topic 0 in slices before
    ``shift_at`` and from topic 1 from ``shift_at`` on, so the consecutive
    pair (shift_at - 1, shift_at) is the ground-truth change point. Other
    words keep their topics throughout.
    """
    if not (1 <= shift_at < n_slices):
        raise ValueError("shift_at must fall inside the series")
    rng = np.random.default_rng(seed)
    topics = [
        [f"s{t}w{i:02d}" for i in range(words_per_topic)] for t in range(n_topics)
    ]
    slices: dict[str, list[str]] = {}
    for s in range(n_slices):
        home_topic = 0 if s < shift_at else 1
        tokens: list[str] = []
        for _ in range(sentences):
            t = int(rng.integers(n_topics))
            pool = topics[t]
            sent = [pool[int(j)] for j in rng.integers(0, len(pool), size=sentence_length)]
            if t == home_topic and rng.random() < 0.5:
                sent[int(rng.integers(sentence_length))] = tracked
            tokens.extend(sent)
        slices[f"slice{s}"] = tokens
    return slices

"""Word-usage-change scoring between two time slices.

Five method variants:

- ``procrustes``: 1 - cosine between a word's target vectors after aligning
  the first model onto the second.
- ``compass``: 1 - cosine between the word's free per-slice vectors from
  compass training (no explicit alignment needed).
- ``compass_cutoff``: compass restricted to the frequency-cutoff vocabulary.
- ``nn``: 1 - overlap of the word's top-k neighbor sets in the two models,
  with the frequency cutoffs applied; rotation invariant.
- ``second_order``: 1 - cosine between the word's similarity profiles over
  the union of its top-k neighborhoods; rotation invariant.

Scores are reported as "higher = more change"; callers wanting the raw
cosine similarity can invert cosine-based scores (similarity = 1 - score).
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Sequence

from .align import align_models
from .embed import (
    EmbeddingModel,
    TrainConfig,
    cosine_similarity,
    nearest_neighbors,
    train,
    train_compass,
)

METHODS = ("procrustes", "compass", "compass_cutoff", "nn", "second_order")


class CutoffError(ValueError):
    pass


class FilteredWordError(KeyError):
    """The word exists in the model but was removed by frequency cutoffs."""

    def __init__(self, word: str):
        super().__init__(f"{word!r} was filtered out by frequency cutoffs")
        self.word = word


@dataclass
class ChangeConfig:
    method: str = "compass"
    neighbor_k: int = 1000
    top_freq_cut: int = 200
    min_freq_cut: int = 200
    candidate_min_occurrences: int = 50

    def __post_init__(self) -> None:
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}, got {self.method!r}")
        if self.neighbor_k < 1:
            raise ValueError("neighbor_k must be >= 1")
        if min(self.top_freq_cut, self.min_freq_cut, self.candidate_min_occurrences) < 0:
            raise ValueError("cut-offs must be >= 0")


@dataclass
class ChangeRanking:
    method: str
    slice_a: str
    slice_b: str
    scores: dict[str, float]
    order: list[str]

    def __post_init__(self) -> None:
        if sorted(self.order) != sorted(self.scores):
            raise ValueError("order must be a permutation of the scored words")

    def top(self, k: int) -> list[str]:
        return self.order[:k]


def _change(cos: float) -> float:
    """1 - cosine, with values within 1e-12 of "no change" snapped to exactly
    0 so that identical inputs tie exactly and rank in vocabulary order."""
    score = 1.0 - cos
    return 0.0 if abs(score) < 1e-12 else score


def apply_frequency_cutoffs(model: EmbeddingModel, top_cut: int, min_cut: int) -> set[str]:
    """Vocabulary after removing the ``top_cut`` most frequent words (count
    ties broken by vocabulary order) and all words with count < ``min_cut``."""
    survivors = {
        w for w in model.vocab[top_cut:] if model.counts[w] >= min_cut
    }
    if not survivors:
        raise CutoffError(
            f"cut-offs (top {top_cut}, min count {min_cut}) empty the vocabulary"
        )
    return survivors


def score_procrustes(aligned_a: EmbeddingModel, model_b: EmbeddingModel, word: str) -> float:
    """1 - cosine of the word's target vectors; expects pre-aligned models."""
    return _change(cosine_similarity(aligned_a.vector(word), model_b.vector(word)))


def score_compass(
    model_a: EmbeddingModel,
    model_b: EmbeddingModel,
    word: str,
    allowed: set[str] | None = None,
) -> float:
    """1 - cosine of the word's free per-slice vectors from compass training.

    ``allowed`` is the cutoff-filtered vocabulary of the compass_cutoff
    variant; a word outside it raises FilteredWordError (distinct from the
    out-of-vocabulary error raised for unknown words).
    """
    if allowed is not None and word not in allowed:
        model_a.row(word)  # out-of-vocabulary has priority
        model_b.row(word)
        raise FilteredWordError(word)
    return _change(cosine_similarity(
        model_a.comparison_vector(word), model_b.comparison_vector(word)
    ))


def score_nn(
    model_a: EmbeddingModel,
    model_b: EmbeddingModel,
    word: str,
    k: int,
    allowed: set[str] | None = None,
    shared: set[str] | None = None,
) -> float:
    """1 - |top-k(a) intersect top-k(b)| / k over the shared (filtered) vocabulary.

    ``shared`` lets callers scoring many words pass the precomputed (and
    already cutoff-restricted) shared vocabulary instead of rebuilding it
    per word.
    """
    if allowed is not None and word not in allowed:
        model_a.row(word)
        model_b.row(word)
        raise FilteredWordError(word)
    if shared is None:
        shared = set(model_a.vocab) & set(model_b.vocab)
        if allowed is not None:
            shared = shared & allowed
    candidates = shared - {word}
    if len(candidates) < k:
        raise ValueError(
            f"only {len(candidates)} shared neighbor candidates for k={k}"
        )
    top_a = {w for w, _ in nearest_neighbors(model_a, word, k, restrict=candidates)}
    top_b = {w for w, _ in nearest_neighbors(model_b, word, k, restrict=candidates)}
    return 1.0 - len(top_a & top_b) / k


def score_second_order(
    model_a: EmbeddingModel,
    model_b: EmbeddingModel,
    word: str,
    k: int,
    shared: set[str] | None = None,
) -> float:
    """1 - cosine of the word's second-order similarity profiles.

    The profile is the vector of cosines between the word and the union of
    its top-k neighborhoods from both models, restricted to the shared
    vocabulary (precomputable via ``shared`` when scoring many words).
    """
    if shared is None:
        shared = set(model_a.vocab) & set(model_b.vocab)
    restrict = shared - {word}
    if not restrict:
        raise ValueError("models share no vocabulary besides the word itself")
    top_a = {w for w, _ in nearest_neighbors(model_a, word, k, restrict=restrict)}
    top_b = {w for w, _ in nearest_neighbors(model_b, word, k, restrict=restrict)}
    union = sorted(top_a | top_b)
    if len(union) < 2:
        raise ValueError(f"neighborhood union of {word!r} has fewer than 2 words")
    units_a = model_a.unit_matrix()
    units_b = model_b.unit_matrix()
    prof_a = units_a[[model_a.row(n) for n in union]] @ units_a[model_a.row(word)]
    prof_b = units_b[[model_b.row(n) for n in union]] @ units_b[model_b.row(word)]
    return _change(cosine_similarity(prof_a, prof_b))


def rank_changed_words(
    model_a: EmbeddingModel,
    model_b: EmbeddingModel,
    config: ChangeConfig,
) -> ChangeRanking:
    """Score and rank every candidate word by descending usage change.

    Candidates are the shared vocabulary with at least
    ``candidate_min_occurrences`` in one of the slices, or the
    cutoff-filtered shared vocabulary for the nn and compass_cutoff methods.
    Method prerequisites (alignment, compass training) must already hold.
    """
    shared = set(model_a.vocab) & set(model_b.vocab)
    if config.method in ("nn", "compass_cutoff"):
        allowed = apply_frequency_cutoffs(model_a, config.top_freq_cut, config.min_freq_cut)
        allowed &= apply_frequency_cutoffs(model_b, config.top_freq_cut, config.min_freq_cut)
        candidates = shared & allowed
    else:
        allowed = None
        candidates = {
            w
            for w in shared
            if max(model_a.counts[w], model_b.counts[w]) >= config.candidate_min_occurrences
        }
    if not candidates:
        raise CutoffError("no candidate words left to score")

    scores: dict[str, float] = {}
    for word in candidates:
        if config.method == "procrustes":
            scores[word] = score_procrustes(model_a, model_b, word)
        elif config.method in ("compass", "compass_cutoff"):
            scores[word] = score_compass(model_a, model_b, word, allowed=allowed)
        elif config.method == "nn":
            scores[word] = score_nn(model_a, model_b, word, config.neighbor_k,
                                    allowed=allowed, shared=candidates)
        else:
            scores[word] = score_second_order(model_a, model_b, word,
                                              config.neighbor_k, shared=shared)
    order = sorted(scores, key=lambda w: (-scores[w], w))
    return ChangeRanking(
        method=config.method,
        slice_a=model_a.slice_id,
        slice_b=model_b.slice_id,
        scores=scores,
        order=order,
    )


def prepare_models(
    tokens_a: Sequence[str],
    tokens_b: Sequence[str],
    train_config: TrainConfig,
    change_config: ChangeConfig,
    slice_a: str = "a",
    slice_b: str = "b",
) -> tuple[EmbeddingModel, EmbeddingModel]:
    """Train the models one slice pair needs for the configured method.

    Compass methods run two-phase training; the others train independent
    models with seeds ``seed`` and ``seed + 1``, and procrustes additionally
    aligns the first onto the second.
    """
    if change_config.method in ("compass", "compass_cutoff"):
        _, per_slice = train_compass({slice_a: tokens_a, slice_b: tokens_b}, train_config)
        return per_slice[slice_a], per_slice[slice_b]
    model_a = train(tokens_a, train_config, slice_id=slice_a)
    model_b = train(
        tokens_b, replace(train_config, seed=train_config.seed + 1), slice_id=slice_b
    )
    if change_config.method == "procrustes":
        model_a, _ = align_models(model_a, model_b)
    return model_a, model_b


def detect_changes(
    tokens_a: Sequence[str],
    tokens_b: Sequence[str],
    train_config: TrainConfig,
    change_config: ChangeConfig,
    slice_a: str = "a",
    slice_b: str = "b",
) -> ChangeRanking:
    """Full pipeline for one slice pair: train, align when required, rank."""
    model_a, model_b = prepare_models(
        tokens_a, tokens_b, train_config, change_config, slice_a, slice_b
    )
    return rank_changed_words(model_a, model_b, change_config)

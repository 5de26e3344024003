"""Quantitative harness: seeded-restart stability, bootstrap intervals,
topic tracking and party-name drift.

Stability follows the intersection@k protocol: retrain the full pipeline
n_runs times with seeds base..base+n_runs-1 (retraining, not rescoring, is
the point - the variability under study is the stochastic training), then
average the top-k overlap over all run pairs and attach percentile-bootstrap
confidence intervals.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field, replace
from typing import Callable, Mapping, Sequence

import numpy as np

from .detect import ChangeConfig, detect_changes
from .embed import EmbeddingModel, TrainConfig, cosine_similarity, nearest_neighbors, train_compass

DEFAULT_K_LIST = (10, 20, 50, 100, 200, 500, 1000)


class EvaluationError(RuntimeError):
    pass


def intersection_at_k(list_a: Sequence[str], list_b: Sequence[str], k: int) -> float:
    """|top-k(a) & top-k(b)| / k, symmetric in its arguments."""
    if k < 1:
        raise ValueError("k must be >= 1")
    if len(list_a) < k or len(list_b) < k:
        raise ValueError(f"both rankings need at least k={k} entries")
    top_a, top_b = set(list_a[:k]), set(list_b[:k])
    if len(top_a) != k or len(top_b) != k:
        raise ValueError("ranking entries must be distinct")
    return len(top_a & top_b) / k


def bootstrap_ci(
    samples: Sequence[float],
    level: float = 0.95,
    resamples: int = 10_000,
    seed: int = 0,
) -> tuple[float, float]:
    """Seeded percentile bootstrap of the mean."""
    if len(samples) < 2:
        raise ValueError("bootstrap needs at least 2 samples")
    if not 0 < level < 1:
        raise ValueError("confidence level must be in (0, 1)")
    arr = np.asarray(samples, dtype=np.float64)
    rng = np.random.default_rng(seed)
    idx = rng.integers(0, len(arr), size=(resamples, len(arr)))
    means = arr[idx].mean(axis=1)
    alpha = (1.0 - level) / 2.0
    lo, hi = np.percentile(means, [100 * alpha, 100 * (1 - alpha)])
    return float(lo), float(hi)


@dataclass
class StabilityConfig:
    method: str = "compass"
    n_runs: int = 10
    k_list: tuple[int, ...] = DEFAULT_K_LIST
    base_seed: int = 0
    bootstrap_resamples: int = 10_000
    confidence: float = 0.95

    def __post_init__(self) -> None:
        if self.n_runs < 2:
            raise ValueError("n_runs must be >= 2")
        ks = tuple(self.k_list)
        if not ks or any(k < 1 for k in ks) or list(ks) != sorted(set(ks)):
            raise ValueError("k_list must be ascending positive integers")
        self.k_list = ks

    @property
    def n_pairs(self) -> int:
        return self.n_runs * (self.n_runs - 1) // 2


@dataclass
class StabilityReport:
    method: str
    k_list: tuple[int, ...]
    mean: dict[int, float]
    ci_low: dict[int, float]
    ci_high: dict[int, float]
    n_pairs: int
    run_rankings: list[list[str]] = field(default_factory=list, repr=False)

    def __post_init__(self) -> None:
        for k in self.k_list:
            if not 0.0 <= self.ci_low[k] <= self.mean[k] <= self.ci_high[k] <= 1.0:
                raise ValueError(f"inconsistent interval at k={k}")

    def rows(self) -> list[tuple[int, float, float, float]]:
        return [(k, self.mean[k], self.ci_low[k], self.ci_high[k]) for k in self.k_list]


def run_stability(
    tokens_a: Sequence[str],
    tokens_b: Sequence[str],
    config: StabilityConfig,
    train_config: TrainConfig | None = None,
    change_config: ChangeConfig | None = None,
    ranker: Callable[[int], Sequence[str]] | None = None,
) -> StabilityReport:
    """Average intersection@k over all pairs of seeded restarts.

    ``ranker(seed)`` must return the descending-change word list for one
    run; by default it trains and ranks the configured method from scratch.
    A failed run aborts the harness with the failing seed named.
    """
    if train_config is None:
        train_config = TrainConfig()
    if change_config is None:
        change_config = ChangeConfig(method=config.method)
    if ranker is None:
        def ranker(seed: int) -> Sequence[str]:
            return detect_changes(
                tokens_a, tokens_b, replace(train_config, seed=seed), change_config
            ).order

    max_k = max(config.k_list)
    runs: list[list[str]] = []
    for i in range(config.n_runs):
        seed = config.base_seed + i
        try:
            ranking = list(ranker(seed))
        except Exception as exc:
            raise EvaluationError(f"stability run with seed {seed} failed: {exc}") from exc
        runs.append(ranking[:max_k])

    mean: dict[int, float] = {}
    lo: dict[int, float] = {}
    hi: dict[int, float] = {}
    for k in config.k_list:
        values = [
            intersection_at_k(ra, rb, k) for ra, rb in itertools.combinations(runs, 2)
        ]
        mean[k] = float(np.mean(values))
        if len(values) == 1:  # n_runs=2: a single pair has no spread
            lo[k] = hi[k] = mean[k]
        else:
            lo[k], hi[k] = bootstrap_ci(
                values,
                level=config.confidence,
                resamples=config.bootstrap_resamples,
                seed=config.base_seed + k,
            )
            lo[k] = min(lo[k], mean[k])
            hi[k] = max(hi[k], mean[k])
    return StabilityReport(
        method=config.method,
        k_list=config.k_list,
        mean=mean,
        ci_low=lo,
        ci_high=hi,
        n_pairs=config.n_pairs,
        run_rankings=runs,
    )


@dataclass
class DriftStat:
    word: str
    pair: tuple[str, str]
    mean_similarity: float
    ci_low: float
    ci_high: float
    n_seeds: int
    similarities: list[float] = field(default_factory=list, repr=False)


@dataclass
class DriftReport:
    entries: list[DriftStat]
    missing: dict[tuple[str, str], list[str]]
    n_seeds: int
    neighbor_reports: dict[str, tuple[tuple[str, str], dict[str, list[tuple[str, float]]]]] = field(
        default_factory=dict
    )

    def for_word(self, word: str) -> list[DriftStat]:
        return [e for e in self.entries if e.word == word]

    def minimum_pair(self, word: str) -> DriftStat | None:
        stats = self.for_word(word)
        return min(stats, key=lambda e: e.mean_similarity) if stats else None


def _consecutive_pairs(slices: Mapping[str, Sequence[str]]) -> list[tuple[str, str]]:
    ids = list(slices)
    if len(ids) < 2:
        raise EvaluationError("need at least two slices")
    return list(zip(ids, ids[1:]))


def _drift_statistics(
    words: Sequence[str],
    slices: Mapping[str, Sequence[str]],
    train_config: TrainConfig,
    n_seeds: int,
    base_seed: int,
    resamples: int,
    confidence: float,
    keep_base_models: bool = False,
):
    pairs = _consecutive_pairs(slices)
    entries: list[DriftStat] = []
    missing: dict[tuple[str, str], list[str]] = {}
    base_models: dict[tuple[str, str], tuple[EmbeddingModel, EmbeddingModel]] = {}
    for pair in pairs:
        sid_a, sid_b = pair
        values: dict[str, list[float]] = {w: [] for w in words}
        absent: set[str] | None = None
        for s in range(n_seeds):
            cfg = replace(train_config, seed=base_seed + s)
            _, per_slice = train_compass({sid_a: slices[sid_a], sid_b: slices[sid_b]}, cfg)
            ma, mb = per_slice[sid_a], per_slice[sid_b]
            if keep_base_models and s == 0:
                base_models[pair] = (ma, mb)
            if absent is None:  # vocabulary is deterministic across seeds
                absent = {w for w in words if w not in ma or w not in mb}
                if absent:
                    missing[pair] = sorted(absent)
            for w in words:
                if w not in absent:
                    values[w].append(
                        cosine_similarity(ma.comparison_vector(w), mb.comparison_vector(w))
                    )
        for w in words:
            vals = values[w]
            if not vals:
                continue
            if len(vals) >= 2:
                lo, hi = bootstrap_ci(vals, level=confidence, resamples=resamples,
                                      seed=base_seed)
                m = float(np.mean(vals))
                lo, hi = min(lo, m), max(hi, m)
            else:
                m = lo = hi = float(vals[0])
            entries.append(DriftStat(
                word=w, pair=pair, mean_similarity=m, ci_low=lo, ci_high=hi,
                n_seeds=len(vals), similarities=vals,
            ))
    return entries, missing, base_models


def track_topics(
    topics: Sequence[str],
    slices: Mapping[str, Sequence[str]],
    train_config: TrainConfig | None = None,
    n_seeds: int = 50,
    base_seed: int = 0,
    resamples: int = 10_000,
    confidence: float = 0.95,
) -> DriftReport:
    """Mean cosine similarity (plus bootstrap CI) of each topic word across
    every consecutive slice pair, over ``n_seeds`` compass retrainings.

    Low similarity flags high usage change. Topics absent from some pairs
    are reported per pair; a topic absent from every pair is an error.
    """
    if train_config is None:
        train_config = TrainConfig.for_compass()
    entries, missing, _ = _drift_statistics(
        topics, slices, train_config, n_seeds, base_seed, resamples, confidence
    )
    covered = {e.word for e in entries}
    nowhere = [t for t in topics if t not in covered]
    if nowhere:
        raise EvaluationError(f"topics absent from every slice pair: {nowhere}")
    return DriftReport(entries=entries, missing=missing, n_seeds=n_seeds)


def party_drift(
    tags: Sequence[str],
    slices: Mapping[str, Sequence[str]],
    train_config: TrainConfig | None = None,
    n_seeds: int = 50,
    base_seed: int = 0,
    resamples: int = 10_000,
    confidence: float = 0.95,
    neighbors_k: int = 10,
) -> DriftReport:
    """Same computation as :func:`track_topics` applied to party tags
    ("@" + abbreviation), plus a nearest-neighbor report for each tag's
    minimum-similarity pair (taken from the base-seed run's models).

    Tags missing from a pair are reported and the pair skipped for that tag.
    """
    if train_config is None:
        train_config = TrainConfig.for_compass()
    entries, missing, base_models = _drift_statistics(
        tags, slices, train_config, n_seeds, base_seed, resamples, confidence,
        keep_base_models=True,
    )
    report = DriftReport(entries=entries, missing=missing, n_seeds=n_seeds)
    for tag in tags:
        worst = report.minimum_pair(tag)
        if worst is None:
            continue
        ma, mb = base_models[worst.pair]
        report.neighbor_reports[tag] = (
            worst.pair,
            {
                worst.pair[0]: nearest_neighbors(ma, tag, neighbors_k),
                worst.pair[1]: nearest_neighbors(mb, tag, neighbors_k),
            },
        )
    return report

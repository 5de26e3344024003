import numpy as np
import pytest

from parlashift.embed import TrainConfig
from parlashift.evaluate import (
    EvaluationError,
    StabilityConfig,
    bootstrap_ci,
    intersection_at_k,
    party_drift,
    run_stability,
    track_topics,
)
from parlashift.synthetic import drift_series, synonym_corpus

COMPASS_SMALL = TrainConfig.for_compass(dim=16, epochs=3, min_count=1, seed=0,
                                        subsample=0.0)


class TestIntersectionAtK:
    def test_identical(self):
        words = [f"w{i}" for i in range(20)]
        assert intersection_at_k(words, list(words), 10) == 1.0

    def test_disjoint(self):
        a = [f"a{i}" for i in range(10)]
        b = [f"b{i}" for i in range(10)]
        assert intersection_at_k(a, b, 10) == 0.0

    def test_seven_of_ten(self):
        a = [f"s{i}" for i in range(7)] + ["x1", "x2", "x3"]
        b = [f"s{i}" for i in range(7)] + ["y1", "y2", "y3"]
        expected = len(set(a[:10]) & set(b[:10])) / 10
        assert expected == 0.7
        assert intersection_at_k(a, b, 10) == expected

    def test_symmetric(self):
        rng = np.random.default_rng(0)
        a = [f"w{i}" for i in rng.permutation(50)]
        b = [f"w{i}" for i in rng.permutation(50)]
        assert intersection_at_k(a, b, 20) == intersection_at_k(b, a, 20)

    def test_equals_one_iff_topk_sets_equal(self):
        a = ["x", "y", "z"]
        b = ["y", "x", "w"]
        assert intersection_at_k(a, b, 2) == 1.0
        assert intersection_at_k(a, b, 3) < 1.0

    def test_short_list_error(self):
        with pytest.raises(ValueError):
            intersection_at_k(["a"], ["a", "b"], 2)

    def test_duplicate_entries_rejected(self):
        with pytest.raises(ValueError):
            intersection_at_k(["a", "a"], ["a", "b"], 2)


class TestBootstrapCI:
    def test_constant_samples(self):
        assert bootstrap_ci([0.4] * 10) == (0.4, 0.4)

    def test_zero_one_interval_contains_half(self):
        lo, hi = bootstrap_ci([0.0, 1.0] * 20, seed=1)
        assert lo < 0.5 < hi

    def test_seeded_deterministic(self):
        samples = list(np.random.default_rng(2).normal(size=30))
        assert bootstrap_ci(samples, seed=9) == bootstrap_ci(samples, seed=9)

    def test_monotone_in_level(self):
        samples = list(np.random.default_rng(3).normal(size=25))
        lo95, hi95 = bootstrap_ci(samples, level=0.95, seed=4)
        lo99, hi99 = bootstrap_ci(samples, level=0.99, seed=4)
        assert lo99 <= lo95 and hi95 <= hi99

    def test_needs_two_samples(self):
        with pytest.raises(ValueError):
            bootstrap_ci([1.0])


class TestRunStability:
    K_LIST = (10, 20, 50, 100, 200, 500, 1000)

    def test_deterministic_dummy_scorer_full_stability(self):
        words = [f"w{i:04d}" for i in range(1000)]
        config = StabilityConfig(method="compass", n_runs=10, k_list=self.K_LIST,
                                 bootstrap_resamples=500)
        report = run_stability([], [], config, ranker=lambda seed: words)
        assert report.n_pairs == 45
        assert all(report.mean[k] == 1.0 for k in self.K_LIST)
        assert all(report.ci_low[k] == report.ci_high[k] == 1.0 for k in self.K_LIST)

    def test_random_permutation_scorer_near_zero_overlap(self):
        words = np.array([f"w{i:04d}" for i in range(1000)])

        def ranker(seed):
            return list(np.random.default_rng(seed).permutation(words))

        config = StabilityConfig(method="nn", n_runs=10, k_list=(10,),
                                 bootstrap_resamples=500)
        report = run_stability([], [], config, ranker=ranker)
        assert report.mean[10] <= 0.05

    def test_exactly_45_pairs_for_10_runs(self):
        assert StabilityConfig(n_runs=10).n_pairs == 45

    def test_failed_run_identifies_seed(self):
        def ranker(seed):
            if seed == 3:
                raise RuntimeError("boom")
            return [f"w{i}" for i in range(10)]

        config = StabilityConfig(n_runs=5, k_list=(5,), base_seed=0,
                                 bootstrap_resamples=100)
        with pytest.raises(EvaluationError, match="seed 3"):
            run_stability([], [], config, ranker=ranker)

    def test_real_pipeline_smoke(self, planted):
        from parlashift.detect import ChangeConfig

        config = StabilityConfig(method="compass", n_runs=2, k_list=(5, 10),
                                 base_seed=0, bootstrap_resamples=200)
        train_config = TrainConfig.for_compass(dim=16, epochs=2, min_count=1,
                                               subsample=0.0)
        change_config = ChangeConfig(method="compass", candidate_min_occurrences=50)
        report = run_stability(planted.tokens_a, planted.tokens_b, config,
                               train_config, change_config)
        assert report.n_pairs == 1
        assert len(report.run_rankings) == 2
        assert all(0.0 <= report.mean[k] <= 1.0 for k in (5, 10))

    def test_interval_invariant(self):
        words = [f"w{i:03d}" for i in range(100)]

        def ranker(seed):
            return list(np.random.default_rng(seed).permutation(words))

        config = StabilityConfig(n_runs=6, k_list=(5, 20), bootstrap_resamples=500)
        report = run_stability([], [], config, ranker=ranker)
        for k in (5, 20):
            assert 0.0 <= report.ci_low[k] <= report.mean[k] <= report.ci_high[k] <= 1.0

    def test_k_list_validation(self):
        with pytest.raises(ValueError):
            StabilityConfig(k_list=(20, 10))
        with pytest.raises(ValueError):
            StabilityConfig(n_runs=1)

    def test_report_is_deterministic(self):
        words = np.array([f"w{i:03d}" for i in range(200)])

        def ranker(seed):
            return list(np.random.default_rng(seed).permutation(words))

        config = StabilityConfig(n_runs=5, k_list=(10, 50), base_seed=3,
                                 bootstrap_resamples=500)
        r1 = run_stability([], [], config, ranker=ranker)
        r2 = run_stability([], [], config, ranker=ranker)
        assert r1.mean == r2.mean
        assert r1.ci_low == r2.ci_low and r1.ci_high == r2.ci_high
        assert r1.run_rankings == r2.run_rankings


class TestTrackTopics:
    def test_duplicate_slices_high_similarity(self):
        tokens, s1, *_ = synonym_corpus(sentences=600, seed=40)
        report = track_topics([s1], {"a": tokens, "b": list(tokens)},
                              COMPASS_SMALL, n_seeds=3, resamples=300)
        (entry,) = [e for e in report.entries if e.word == s1]
        assert entry.mean_similarity >= 0.9

    def test_planted_shift_pair_is_minimum_with_disjoint_ci(self):
        slices = drift_series(tracked="θεμα", n_slices=4, shift_at=2,
                              sentences=800, seed=3)
        report = track_topics(["θεμα"], slices, COMPASS_SMALL, n_seeds=5,
                              resamples=1000)
        stats = report.for_word("θεμα")
        assert len(stats) == 3
        worst = report.minimum_pair("θεμα")
        assert worst.pair == ("slice1", "slice2")
        others = [e for e in stats if e.pair != worst.pair]
        assert all(worst.ci_high < e.ci_low for e in others)

    def test_absent_topic_everywhere_is_error(self):
        tokens, *_ = synonym_corpus(sentences=300, seed=41)
        with pytest.raises(EvaluationError, match="ανύπαρκτο"):
            track_topics(["ανύπαρκτο"], {"a": tokens, "b": tokens},
                         COMPASS_SMALL, n_seeds=2, resamples=100)

    def test_partially_absent_topic_reported_per_pair(self):
        tokens, s1, *_ = synonym_corpus(sentences=300, seed=42)
        without_topic = [t for t in tokens if t != s1]
        slices = {"a": tokens, "b": list(tokens), "c": without_topic}
        report = track_topics([s1], slices, COMPASS_SMALL, n_seeds=2, resamples=100)
        assert ("b", "c") in report.missing
        assert s1 in report.missing[("b", "c")]


class TestPartyDrift:
    def test_constant_tag_high_similarity_and_swapped_tag_minimum(self):
        slices = drift_series(tracked="@κομμα", n_slices=3, shift_at=1,
                              sentences=800, seed=5)
        report = party_drift(["@κομμα"], slices, COMPASS_SMALL, n_seeds=4,
                             resamples=500)
        worst = report.minimum_pair("@κομμα")
        assert worst.pair == ("slice0", "slice1")
        stable = [e for e in report.for_word("@κομμα") if e.pair != worst.pair]
        assert all(e.mean_similarity > worst.mean_similarity for e in stable)

    def test_neighbor_report_for_minimum_pair(self):
        slices = drift_series(tracked="@κομμα", n_slices=3, shift_at=1,
                              sentences=600, seed=6)
        report = party_drift(["@κομμα"], slices, COMPASS_SMALL, n_seeds=2,
                             resamples=200, neighbors_k=5)
        pair, by_slice = report.neighbor_reports["@κομμα"]
        assert pair == report.minimum_pair("@κομμα").pair
        assert set(by_slice) == set(pair)
        for neighbors in by_slice.values():
            assert 1 <= len(neighbors) <= 5

    def test_missing_tag_skipped_not_fatal(self):
        tokens, *_ = synonym_corpus(sentences=300, seed=43)
        report = party_drift(["@απων"], {"a": tokens, "b": tokens},
                             COMPASS_SMALL, n_seeds=2, resamples=100)
        assert report.entries == []
        assert ("a", "b") in report.missing

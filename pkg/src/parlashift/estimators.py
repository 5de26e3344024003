"""Scikit-learn style estimators wrapping the fit-shaped core.

These compose with the wider ecosystem (get_params/set_params, cloning,
pipelines); the functional APIs in :mod:`embed`, :mod:`align` and
:mod:`detect` stay the primitive layer.
"""

from __future__ import annotations

from typing import Mapping, Sequence

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .align import orthogonal_procrustes
from .detect import ChangeConfig, rank_changed_words
from .embed import TrainConfig, train, train_compass

_TRAIN_PARAMS = (
    "dim", "window", "negative", "epochs", "learning_rate", "min_count",
    "subsample", "architecture", "seed", "deterministic", "workers", "batch_size",
)


class _TrainParamsMixin:
    def _train_config(self, **extra) -> TrainConfig:
        params = {name: getattr(self, name) for name in _TRAIN_PARAMS}
        params.update(extra)
        return TrainConfig(**params)


class NegativeSamplingEmbedder(_TrainParamsMixin, BaseEstimator):
    """Estimator facade over :func:`parlashift.embed.train`.

    fit(X) with X a token sequence learns the model (exposed as ``model_``);
    transform(words) maps words to their comparison vectors.
    """

    def __init__(self, dim=100, window=5, negative=5, epochs=5, learning_rate=0.025,
                 min_count=5, subsample=1e-3, architecture="skipgram", seed=0,
                 deterministic=True, workers=1, batch_size=1024):
        self.dim = dim
        self.window = window
        self.negative = negative
        self.epochs = epochs
        self.learning_rate = learning_rate
        self.min_count = min_count
        self.subsample = subsample
        self.architecture = architecture
        self.seed = seed
        self.deterministic = deterministic
        self.workers = workers
        self.batch_size = batch_size

    def fit(self, X: Sequence[str], y=None):
        self.model_ = train(list(X), self._train_config())
        return self

    def transform(self, X: Sequence[str]) -> np.ndarray:
        check_is_fitted(self, "model_")
        return np.array([self.model_.comparison_vector(w) for w in X])


class CompassEmbedder(_TrainParamsMixin, BaseEstimator):
    """Two-phase compass training over a mapping of slice id to tokens.

    After fit, ``compass_`` holds the atemporal model and ``models_`` the
    per-slice models whose free vectors are cross-slice comparable.
    """

    def __init__(self, dim=100, window=5, negative=5, epochs=5, learning_rate=0.025,
                 min_count=5, subsample=1e-3, architecture="cbow", seed=0,
                 deterministic=True, workers=1, batch_size=1024,
                 compass_frozen="target"):
        self.dim = dim
        self.window = window
        self.negative = negative
        self.epochs = epochs
        self.learning_rate = learning_rate
        self.min_count = min_count
        self.subsample = subsample
        self.architecture = architecture
        self.seed = seed
        self.deterministic = deterministic
        self.workers = workers
        self.batch_size = batch_size
        self.compass_frozen = compass_frozen

    def fit(self, X: Mapping[str, Sequence[str]], y=None):
        config = self._train_config(compass_frozen=self.compass_frozen)
        self.compass_, self.models_ = train_compass(X, config)
        return self

    def similarity(self, word: str, slice_a: str, slice_b: str) -> float:
        check_is_fitted(self, "models_")
        from .embed import cosine_similarity

        return cosine_similarity(
            self.models_[slice_a].comparison_vector(word),
            self.models_[slice_b].comparison_vector(word),
        )


class ProcrustesAligner(TransformerMixin, BaseEstimator):
    """Learn the orthogonal rotation mapping X onto Y; transform applies it."""

    def fit(self, X, y):
        X = check_array(X, dtype=np.float64)
        y = check_array(y, dtype=np.float64)
        self.rotation_ = orthogonal_procrustes(X, y)
        return self

    def transform(self, X) -> np.ndarray:
        check_is_fitted(self, "rotation_")
        X = check_array(X, dtype=np.float64)
        return X @ self.rotation_


class UsageChangeDetector(BaseEstimator):
    """Fit on a pair of token sequences, rank words by usage change.

    ``train_config`` carries the embedding hyperparameters; the detector's
    own parameters mirror ChangeConfig. After fit, ``ranking_`` holds the
    ChangeRanking and predict(words) returns the change scores.
    """

    def __init__(self, method="compass", neighbor_k=1000, top_freq_cut=200,
                 min_freq_cut=200, candidate_min_occurrences=50, train_config=None):
        self.method = method
        self.neighbor_k = neighbor_k
        self.top_freq_cut = top_freq_cut
        self.min_freq_cut = min_freq_cut
        self.candidate_min_occurrences = candidate_min_occurrences
        self.train_config = train_config

    def _change_config(self) -> ChangeConfig:
        return ChangeConfig(
            method=self.method,
            neighbor_k=self.neighbor_k,
            top_freq_cut=self.top_freq_cut,
            min_freq_cut=self.min_freq_cut,
            candidate_min_occurrences=self.candidate_min_occurrences,
        )

    def fit(self, X, y=None):
        from .detect import prepare_models

        tokens_a, tokens_b = X
        train_config = self.train_config or TrainConfig()
        self.models_ = prepare_models(tokens_a, tokens_b, train_config, self._change_config())
        self.ranking_ = rank_changed_words(*self.models_, self._change_config())
        return self

    def predict(self, X: Sequence[str]) -> np.ndarray:
        check_is_fitted(self, "ranking_")
        try:
            return np.array([self.ranking_.scores[w] for w in X])
        except KeyError as exc:
            raise KeyError(
                f"word {exc.args[0]!r} was not scored (out of vocabulary or filtered)"
            ) from None

    def top(self, k: int) -> list[str]:
        check_is_fitted(self, "ranking_")
        return self.ranking_.top(k)

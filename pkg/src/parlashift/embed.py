"""Word embeddings trained from scratch with negative sampling.

Two matrices are learned per model: ``target`` holds a word's vector as a
*predicted* word (the output side of the network), ``context`` holds its
vector as a *predictor* (the input side). Skip-gram feeds the center word
through the context matrix and scores window words against the target
matrix; CBOW feeds the averaged window through the context matrix and
scores the center word.

Compass mode trains in two phases: phase 1 fits an atemporal model on the
concatenation of all time slices, phase 2 retrains each slice with one
matrix copied from the compass and frozen. Because every slice shares the
frozen coordinate system, the free per-slice vectors of a word are directly
comparable across slices. Which matrix is frozen is configurable
(``compass_frozen``): the default "target" freezes the output side and
compares context vectors; "context" inverts the roles.

Training is mini-batch SGD: window pairs are generated per epoch (with the
usual window-size shrink and frequency subsampling), shuffled, and applied
in batches. In deterministic mode a single worker and one counter-based
random stream (Philox) make runs bitwise reproducible for equal seeds; fast
mode shards batches over threads whose unsynchronized updates may lose
writes and is only statistically reproducible.
"""

from __future__ import annotations

import struct
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

MODEL_MAGIC = b"GPEM"
MODEL_VERSION = 1

_FROZEN_CODES = {None: 0, "target": 1, "context": 2}
_FROZEN_NAMES = {v: k for k, v in _FROZEN_CODES.items()}


class TrainingError(ValueError):
    pass


class OutOfVocabularyError(KeyError):
    def __init__(self, word: str, detail: str = "not in vocabulary"):
        super().__init__(f"{word!r} {detail}")
        self.word = word


@dataclass
class TrainConfig:
    dim: int = 100
    window: int = 5
    negative: int = 5
    epochs: int = 5
    learning_rate: float = 0.025
    min_count: int = 5
    subsample: float = 1e-3
    architecture: str = "skipgram"
    seed: int = 0
    deterministic: bool = True
    workers: int = 1
    compass_frozen: str = "target"
    batch_size: int = 1024

    def __post_init__(self) -> None:
        for name in ("dim", "window", "negative", "epochs", "min_count", "batch_size", "workers"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be > 0")
        if self.subsample < 0:
            raise ValueError("subsample must be >= 0 (0 disables)")
        if self.architecture not in ("skipgram", "cbow"):
            raise ValueError(f"unknown architecture {self.architecture!r}")
        if self.compass_frozen not in ("target", "context"):
            raise ValueError(f"compass_frozen must be 'target' or 'context'")

    @classmethod
    def for_compass(cls, **overrides) -> "TrainConfig":
        """Defaults for compass training (CBOW, as in the compass method)."""
        overrides.setdefault("architecture", "cbow")
        return cls(**overrides)


@dataclass
class EmbeddingModel:
    vocab: list[str]
    counts: dict[str, int]
    dim: int
    target: np.ndarray
    context: np.ndarray
    slice_id: str = ""
    seed: int = 0
    frozen: str | None = None
    epoch_losses: list[float] = field(default_factory=list, repr=False)

    def __post_init__(self) -> None:
        if self.dim < 1:
            raise ValueError("dim must be >= 1")
        n = len(self.vocab)
        if self.target.shape != (n, self.dim) or self.context.shape != (n, self.dim):
            raise ValueError("matrix rows must align with the vocabulary")
        if any(self.counts.get(w, 0) <= 0 for w in self.vocab):
            raise ValueError("every vocabulary word needs a positive count")
        self._index = {w: i for i, w in enumerate(self.vocab)}
        self._unit_cache: dict[str, np.ndarray] = {}

    def __len__(self) -> int:
        return len(self.vocab)

    def row(self, word: str) -> int:
        try:
            return self._index[word]
        except KeyError:
            raise OutOfVocabularyError(word) from None

    def __contains__(self, word: str) -> bool:
        return word in self._index

    def matrix(self, which: str) -> np.ndarray:
        if which == "target":
            return self.target
        if which == "context":
            return self.context
        if which == "comparison":
            return self.comparison_matrix
        raise ValueError(f"unknown matrix {which!r}")

    @property
    def comparison_matrix(self) -> np.ndarray:
        """The matrix meant for cross-model comparison: the free (unfrozen)
        matrix of a compass-trained model, otherwise the target matrix."""
        if self.frozen == "target":
            return self.context
        return self.target

    def vector(self, word: str, which: str = "target") -> np.ndarray:
        return self.matrix(which)[self.row(word)]

    def comparison_vector(self, word: str) -> np.ndarray:
        return self.comparison_matrix[self.row(word)]

    def unit_matrix(self, which: str = "comparison") -> np.ndarray:
        """Row-normalized copy of a matrix, cached (models are immutable
        after training)."""
        if which == "comparison":
            which = "context" if self.frozen == "target" else "target"
        cached = self._unit_cache.get(which)
        if cached is None:
            m = self.matrix(which).astype(np.float64)
            norms = np.linalg.norm(m, axis=1, keepdims=True)
            cached = np.divide(m, norms, out=np.zeros_like(m), where=norms > 0)
            self._unit_cache[which] = cached
        return cached


def cosine_similarity(u: np.ndarray, v: np.ndarray) -> float:
    """Standard cosine similarity; rejects zero vectors."""
    nu = np.linalg.norm(u)
    nv = np.linalg.norm(v)
    if nu == 0 or nv == 0:
        raise ValueError("cosine similarity is undefined for zero vectors")
    return float(np.dot(u, v) / (nu * nv))


def nearest_neighbors(
    model: EmbeddingModel,
    word: str,
    k: int,
    restrict: Iterable[str] | None = None,
    which: str = "comparison",
) -> list[tuple[str, float]]:
    """Top-k neighbors of ``word`` by descending cosine, query excluded.

    ``restrict`` limits candidates to the given words; ties break on
    vocabulary order. Asking for more neighbors than exist returns them all.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    qrow = model.row(word)
    units = model.unit_matrix(which)
    q = units[qrow]
    if not np.any(q):
        raise ValueError(f"{word!r} has a zero vector")
    if restrict is None:
        cand = np.array([i for i in range(len(model)) if i != qrow], dtype=np.int64)
    else:
        rows = {model._index[w] for w in restrict if w in model._index}
        rows.discard(qrow)
        cand = np.array(sorted(rows), dtype=np.int64)
    if cand.size == 0:
        raise ValueError("no neighbor candidates available")
    sims = units[cand] @ q
    order = np.argsort(-sims, kind="stable")[:k]
    return [(model.vocab[int(cand[i])], float(sims[i])) for i in order]


# -- numerics ------------------------------------------------------------------

def _sigmoid(x: np.ndarray) -> np.ndarray:
    with np.errstate(over="ignore"):
        return 1.0 / (1.0 + np.exp(-x))


def _log_sigmoid(x: np.ndarray) -> np.ndarray:
    return -np.logaddexp(0.0, -x)


def negative_sampling_loss(
    input_vec: np.ndarray, output_vecs: np.ndarray, labels: np.ndarray
) -> tuple[float, np.ndarray, np.ndarray]:
    """Logistic loss of one input vector against labeled output vectors.

    Returns (loss, d loss/d input_vec, d loss/d output_vecs). This is the
    reference step the vectorized trainer must agree with; it is also the
    function numerical gradient checks differentiate.
    """
    scores = output_vecs @ input_vec
    loss = -(labels * _log_sigmoid(scores) + (1 - labels) * _log_sigmoid(-scores)).sum()
    g = _sigmoid(scores) - labels
    return float(loss), g @ output_vecs, np.outer(g, input_vec)


def cbow_loss(
    context_vecs: np.ndarray, output_vecs: np.ndarray, labels: np.ndarray
) -> tuple[float, np.ndarray, np.ndarray]:
    """CBOW step: the input is the mean of the window's context vectors."""
    h = context_vecs.mean(axis=0)
    loss, grad_h, grad_out = negative_sampling_loss(h, output_vecs, labels)
    grad_ctx = np.tile(grad_h / len(context_vecs), (len(context_vecs), 1))
    return loss, grad_ctx, grad_out


def _batched_ns(
    in_vecs: np.ndarray, out_vecs: np.ndarray, labels: np.ndarray
) -> tuple[float, np.ndarray, np.ndarray]:
    """Vectorized negative_sampling_loss over a batch.

    in_vecs: (B, d); out_vecs: (B, K, d); labels: (K,) shared by all rows.
    """
    scores = np.einsum("bd,bkd->bk", in_vecs, out_vecs)
    loss = -(
        labels * _log_sigmoid(scores) + (1.0 - labels) * _log_sigmoid(-scores)
    ).sum(dtype=np.float64)
    g = _sigmoid(scores) - labels
    grad_in = np.einsum("bk,bkd->bd", g, out_vecs)
    grad_out = g[:, :, None] * in_vecs[:, None, :]
    return float(loss), grad_in, grad_out


# -- vocabulary and pair generation -------------------------------------------

def _build_vocab(tokens: Iterable[str], min_count: int) -> tuple[list[str], dict[str, int]]:
    counts = Counter(tokens)
    kept = {w: c for w, c in counts.items() if c >= min_count}
    vocab = sorted(kept, key=lambda w: (-kept[w], w))
    return vocab, {w: kept[w] for w in vocab}


def _sample_negatives(rng: np.random.Generator, cumdist: np.ndarray, shape) -> np.ndarray:
    return np.searchsorted(cumdist, rng.random(shape), side="right").astype(np.int64)


def _keep_probabilities(counts: np.ndarray, subsample: float) -> np.ndarray | None:
    if subsample <= 0:
        return None
    freqs = counts / counts.sum()
    ratio = subsample / freqs
    return np.minimum(1.0, np.sqrt(ratio) + ratio)


def _skipgram_pairs(pos: np.ndarray, shrink: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """(center, context) index pairs for a subsampled position sequence."""
    n = len(pos)
    centers, contexts = [], []
    for off in range(1, int(shrink.max()) + 1 if n else 1):
        use = shrink >= off
        left = np.nonzero(use[off:])[0] + off
        if left.size:
            centers.append(pos[left])
            contexts.append(pos[left - off])
        # the slice bound must not go negative when off exceeds the
        # (possibly subsampled) sequence length
        right = np.nonzero(use[: max(0, n - off)])[0]
        if right.size:
            centers.append(pos[right])
            contexts.append(pos[right + off])
    if not centers:
        return np.empty(0, dtype=np.int64), np.empty(0, dtype=np.int64)
    return np.concatenate(centers), np.concatenate(contexts)


def _cbow_windows(
    pos: np.ndarray, shrink: np.ndarray, window: int
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Per-center padded context index matrix and its mask."""
    n = len(pos)
    ctx = np.zeros((n, 2 * window), dtype=np.int64)
    mask = np.zeros((n, 2 * window), dtype=bool)
    idx = np.arange(n)
    col = 0
    for off in range(1, window + 1):
        use = shrink >= off
        left = use & (idx >= off)
        ctx[left, col] = pos[idx[left] - off]
        mask[left, col] = True
        col += 1
        right = use & (idx < n - off)
        ctx[right, col] = pos[idx[right] + off]
        mask[right, col] = True
        col += 1
    have = mask.any(axis=1)
    return ctx[have], mask[have], pos[have]


# -- trainer -------------------------------------------------------------------

def _train_model(
    ids: np.ndarray,
    vocab: list[str],
    counts: dict[str, int],
    config: TrainConfig,
    seed: int,
    slice_id: str = "",
    init: tuple[np.ndarray, np.ndarray] | None = None,
    frozen: str | None = None,
) -> EmbeddingModel:
    nv, dim = len(vocab), config.dim
    rng = np.random.Generator(np.random.Philox(key=seed))
    if init is None:
        target = ((rng.random((nv, dim), dtype=np.float32) - 0.5) / dim).astype(np.float32)
        context = ((rng.random((nv, dim), dtype=np.float32) - 0.5) / dim).astype(np.float32)
    else:
        target = init[0].astype(np.float32).copy()
        context = init[1].astype(np.float32).copy()

    counts_arr = np.array([counts[w] for w in vocab], dtype=np.float64)
    noise = counts_arr ** 0.75
    cumdist = np.cumsum(noise / noise.sum())
    keep = _keep_probabilities(counts_arr, config.subsample)
    labels = np.zeros(1 + config.negative, dtype=np.float32)
    labels[0] = 1.0

    update_target = frozen != "target"
    update_context = frozen != "context"
    parallel = config.workers > 1 and not config.deterministic
    lr0 = config.learning_rate
    lr_floor = lr0 * 1e-4
    # Batched updates accumulate the gradients of duplicate rows computed
    # from one stale snapshot; on tiny vocabularies that overshoots and can
    # diverge, so the effective batch is capped at a few rows' worth.
    batch_size = max(1, min(config.batch_size, 4 * nv))
    epoch_losses: list[float] = []

    def run_batches(batches, worker_rng):
        loss_sum, pair_sum = 0.0, 0
        for frac, batch in batches:
            alpha = max(lr_floor, lr0 * (1.0 - frac))
            if config.architecture == "skipgram":
                c, o = batch
                neg = _sample_negatives(worker_rng, cumdist, (len(c), config.negative))
                out_idx = np.concatenate([o[:, None], neg], axis=1)
                in_vecs = context[c]
                loss, grad_in, grad_out = _batched_ns(in_vecs, target[out_idx], labels)
                if update_context:
                    np.add.at(context, c, (-alpha * grad_in).astype(np.float32))
                if update_target:
                    np.add.at(target, out_idx, (-alpha * grad_out).astype(np.float32))
                loss_sum += loss
                pair_sum += len(c)
            else:
                ctx_idx, mask, center = batch
                neg = _sample_negatives(worker_rng, cumdist, (len(center), config.negative))
                out_idx = np.concatenate([center[:, None], neg], axis=1)
                nctx = mask.sum(axis=1, dtype=np.float32)[:, None]
                h = (context[ctx_idx] * mask[:, :, None]).sum(axis=1) / nctx
                loss, grad_h, grad_out = _batched_ns(h, target[out_idx], labels)
                if update_context:
                    spread = (-alpha) * (grad_h / nctx)[:, None, :] * mask[:, :, None]
                    np.add.at(context, ctx_idx, spread.astype(np.float32))
                if update_target:
                    np.add.at(target, out_idx, (-alpha * grad_out).astype(np.float32))
                loss_sum += loss
                pair_sum += len(center)
        return loss_sum, pair_sum

    for epoch in range(config.epochs):
        if keep is not None:
            pos = ids[rng.random(len(ids)) < keep[ids]]
        else:
            pos = ids
        if len(pos) < 2:
            epoch_losses.append(float("nan"))
            continue
        shrink = rng.integers(1, config.window + 1, size=len(pos))
        if config.architecture == "skipgram":
            centers, contexts = _skipgram_pairs(pos, shrink)
            order = rng.permutation(len(centers))
            centers, contexts = centers[order], contexts[order]
            n_items = len(centers)
            slicer = lambda s, e: (centers[s:e], contexts[s:e])
        else:
            ctx_idx, mask, center = _cbow_windows(pos, shrink, config.window)
            order = rng.permutation(len(center))
            ctx_idx, mask, center = ctx_idx[order], mask[order], center[order]
            n_items = len(center)
            slicer = lambda s, e: (ctx_idx[s:e], mask[s:e], center[s:e])
        if n_items == 0:
            epoch_losses.append(float("nan"))
            continue

        starts = range(0, n_items, batch_size)
        batches = []
        for s in starts:
            e = min(s + batch_size, n_items)
            frac = (epoch + s / n_items) / config.epochs
            batches.append((frac, slicer(s, e)))

        if not parallel:
            loss_sum, pair_sum = run_batches(batches, rng)
        else:
            shards = [batches[i :: config.workers] for i in range(config.workers)]
            rngs = [
                np.random.Generator(np.random.Philox(key=[seed, (epoch << 32) | w]))
                for w in range(config.workers)
            ]
            loss_sum, pair_sum = 0.0, 0
            with ThreadPoolExecutor(max_workers=config.workers) as pool:
                for ls, ps in pool.map(run_batches, shards, rngs):
                    loss_sum += ls
                    pair_sum += ps
        epoch_losses.append(loss_sum / max(pair_sum, 1))

    return EmbeddingModel(
        vocab=vocab,
        counts=dict(counts),
        dim=dim,
        target=target,
        context=context,
        slice_id=slice_id,
        seed=seed,
        frozen=frozen,
        epoch_losses=epoch_losses,
    )


def train(tokens: Sequence[str], config: TrainConfig, slice_id: str = "") -> EmbeddingModel:
    """Train a model on one token sequence.

    Deterministic given the seed in deterministic mode; words below
    ``min_count`` are excluded; negatives follow the unigram^0.75
    distribution.
    """
    vocab, counts = _build_vocab(tokens, config.min_count)
    if not vocab:
        raise TrainingError("vocabulary is empty after min-count filtering")
    index = {w: i for i, w in enumerate(vocab)}
    ids = np.fromiter((index[t] for t in tokens if t in index), dtype=np.int64)
    if len(ids) < config.window + 1:
        raise TrainingError(
            f"corpus too small: {len(ids)} in-vocabulary tokens for window {config.window}"
        )
    return _train_model(ids, vocab, counts, config, seed=config.seed, slice_id=slice_id)


def train_compass(
    slices: Mapping[str, Sequence[str]], config: TrainConfig
) -> tuple[EmbeddingModel, dict[str, EmbeddingModel]]:
    """Two-phase compass training.

    Phase 1 trains the compass on all slices concatenated (seed =
    ``config.seed``); phase 2 retrains each slice (seed = ``config.seed`` +
    1 + slice position) starting from the compass matrices with the
    ``config.compass_frozen`` matrix never updated. Each slice model keeps
    the subset of the compass vocabulary that occurs in the slice, so its
    frozen rows are bitwise equal to the corresponding compass rows.
    """
    if len(slices) < 2:
        raise TrainingError("compass training needs at least two slices")
    for sid, toks in slices.items():
        if len(toks) == 0:
            raise TrainingError(f"slice {sid!r} has no tokens")

    concatenated: list[str] = []
    for toks in slices.values():
        concatenated.extend(toks)
    compass = train(concatenated, config, slice_id="compass")

    shared: set[str] | None = None
    for toks in slices.values():
        present = set(toks) & set(compass.vocab)
        shared = present if shared is None else shared & present
    if not shared:
        raise TrainingError("slices share no vocabulary after min-count filtering")

    per_slice: dict[str, EmbeddingModel] = {}
    for i, (sid, toks) in enumerate(slices.items()):
        slice_counts = Counter(t for t in toks if t in compass)
        vocab = sorted(slice_counts, key=lambda w: (-slice_counts[w], w))
        if not vocab:
            raise TrainingError(f"slice {sid!r} shares no vocabulary with the compass")
        rows = np.array([compass.row(w) for w in vocab], dtype=np.int64)
        index = {w: j for j, w in enumerate(vocab)}
        ids = np.fromiter((index[t] for t in toks if t in index), dtype=np.int64)
        if len(ids) < config.window + 1:
            raise TrainingError(f"slice {sid!r} is smaller than one window")
        per_slice[sid] = _train_model(
            ids,
            vocab,
            dict(slice_counts),
            config,
            seed=config.seed + 1 + i,
            slice_id=sid,
            init=(compass.target[rows], compass.context[rows]),
            frozen=config.compass_frozen,
        )
    return compass, per_slice


# -- model files ---------------------------------------------------------------

def save_model(model: EmbeddingModel, path: str | Path) -> None:
    """Write the documented binary format (little-endian throughout):

    magic "GPEM", version u8, dim u32, vocab size u64, slice-id (u16 length +
    UTF-8), seed i64, frozen-matrix code u8; then per word: u16 length +
    UTF-8 word, count u64, target row and context row as float32.
    """
    with open(path, "wb") as fh:
        sid = model.slice_id.encode("utf-8")
        fh.write(MODEL_MAGIC)
        fh.write(struct.pack("<BIQ", MODEL_VERSION, model.dim, len(model.vocab)))
        fh.write(struct.pack("<H", len(sid)))
        fh.write(sid)
        fh.write(struct.pack("<qB", model.seed, _FROZEN_CODES[model.frozen]))
        target = np.ascontiguousarray(model.target, dtype="<f4")
        context = np.ascontiguousarray(model.context, dtype="<f4")
        for i, word in enumerate(model.vocab):
            wb = word.encode("utf-8")
            fh.write(struct.pack("<H", len(wb)))
            fh.write(wb)
            fh.write(struct.pack("<Q", model.counts[word]))
            fh.write(target[i].tobytes())
            fh.write(context[i].tobytes())


def load_model(path: str | Path) -> EmbeddingModel:
    data = Path(path).read_bytes()
    if data[:4] != MODEL_MAGIC:
        raise ValueError(f"{path}: not a model file (bad magic)")
    off = 4
    version, dim, nv = struct.unpack_from("<BIQ", data, off)
    off += struct.calcsize("<BIQ")
    if version != MODEL_VERSION:
        raise ValueError(f"{path}: unsupported format version {version}")
    (sid_len,) = struct.unpack_from("<H", data, off)
    off += 2
    slice_id = data[off : off + sid_len].decode("utf-8")
    off += sid_len
    seed, frozen_code = struct.unpack_from("<qB", data, off)
    off += struct.calcsize("<qB")

    vocab: list[str] = []
    counts: dict[str, int] = {}
    target = np.empty((nv, dim), dtype=np.float32)
    context = np.empty((nv, dim), dtype=np.float32)
    row_bytes = 4 * dim
    for i in range(nv):
        (wlen,) = struct.unpack_from("<H", data, off)
        off += 2
        word = data[off : off + wlen].decode("utf-8")
        off += wlen
        (count,) = struct.unpack_from("<Q", data, off)
        off += 8
        target[i] = np.frombuffer(data, dtype="<f4", count=dim, offset=off)
        off += row_bytes
        context[i] = np.frombuffer(data, dtype="<f4", count=dim, offset=off)
        off += row_bytes
        vocab.append(word)
        counts[word] = count
    return EmbeddingModel(
        vocab=vocab, counts=counts, dim=dim, target=target, context=context,
        slice_id=slice_id, seed=seed, frozen=_FROZEN_NAMES[frozen_code],
    )


def export_text(model: EmbeddingModel, path: str | Path, which: str = "comparison") -> None:
    """Plain-text export: header "vocab dim", then word + space-joined floats."""
    m = model.matrix(which)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{len(model.vocab)} {model.dim}\n")
        for i, word in enumerate(model.vocab):
            fh.write(word + " " + " ".join(f"{x:.7g}" for x in m[i]) + "\n")

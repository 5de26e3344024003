"""Orthogonal Procrustes alignment of independently trained embedding spaces.

The rotation minimizing ||X R - Y||_F over orthogonal R is U Vt where
U S Vt is the SVD of Xt Y. Alignment solves on the length-normalized shared
rows of the target matrices and then rotates every row of the source model,
leaving the reference untouched.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .embed import EmbeddingModel


class AlignmentError(ValueError):
    pass


@dataclass
class AlignmentResult:
    rotation: np.ndarray
    shared_words: list[str]
    residual: float
    rank_deficient: bool = False

    def __post_init__(self) -> None:
        d = self.rotation.shape[0]
        if self.rotation.shape != (d, d):
            raise ValueError("rotation must be square")
        defect = np.abs(self.rotation.T @ self.rotation - np.eye(d)).max()
        if defect > 1e-6:
            raise ValueError(f"rotation is not orthogonal (defect {defect:.2e})")
        if not self.shared_words:
            raise ValueError("shared_words must be non-empty")


def _procrustes_svd(x: np.ndarray, y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    if x.shape != y.shape:
        raise AlignmentError(f"shape mismatch: {x.shape} vs {y.shape}")
    if x.ndim != 2:
        raise AlignmentError("expected 2-d matrices")
    if x.shape[0] < x.shape[1]:
        raise AlignmentError(f"need at least d={x.shape[1]} rows, got {x.shape[0]}")
    m = x.T.astype(np.float64) @ y.astype(np.float64)
    u, s, vt = np.linalg.svd(m)
    return u @ vt, s


def orthogonal_procrustes(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """The d x d orthogonal matrix minimizing ||x @ R - y||_F.

    A rank-deficient cross-product still yields a valid orthogonal matrix
    (the minimizer is then not unique).
    """
    rotation, _ = _procrustes_svd(x, y)
    return rotation


def align_models(
    source: EmbeddingModel,
    reference: EmbeddingModel,
    center: bool = False,
) -> tuple[EmbeddingModel, AlignmentResult]:
    """Rotate ``source`` into the coordinate system of ``reference``.

    The solve uses the shared vocabulary's target rows, length-normalized
    (mean-centered first when ``center`` is set); the resulting rotation is
    applied to all rows of both source matrices so intra-model geometry is
    preserved. Requires at least ``dim`` shared words.
    """
    if source.dim != reference.dim:
        raise AlignmentError(f"dimension mismatch: {source.dim} vs {reference.dim}")
    shared = sorted(set(source.vocab) & set(reference.vocab))
    if not shared:
        raise AlignmentError("models share no vocabulary")
    if len(shared) < source.dim:
        raise AlignmentError(
            f"only {len(shared)} shared words for dim {source.dim}; "
            "reduce the dimensionality or merge more data"
        )
    x = np.array([source.vector(w) for w in shared], dtype=np.float64)
    y = np.array([reference.vector(w) for w in shared], dtype=np.float64)
    if center:
        x -= x.mean(axis=0)
        y -= y.mean(axis=0)
    x = _unit_rows(x)
    y = _unit_rows(y)
    rotation, singular = _procrustes_svd(x, y)
    rank_deficient = bool(singular.min() <= singular.max() * 1e-12)

    aligned = replace(
        source,
        target=(source.target.astype(np.float64) @ rotation).astype(np.float32),
        context=(source.context.astype(np.float64) @ rotation).astype(np.float32),
        counts=dict(source.counts),
        vocab=list(source.vocab),
        epoch_losses=list(source.epoch_losses),
    )
    result = AlignmentResult(
        rotation=rotation,
        shared_words=shared,
        residual=float(np.linalg.norm(x @ rotation - y)),
        rank_deficient=rank_deficient,
    )
    return aligned, result


def _unit_rows(m: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(m, axis=1, keepdims=True)
    return np.divide(m, norms, out=np.zeros_like(m), where=norms > 0)

"""Independent reference implementations used as test oracles.

These are written straight from the definitions, on purpose with different
code structure than the package, and stay independent of the paths they
check.
"""

from __future__ import annotations

import itertools

import numpy as np


def jaro_winkler_reference(s: str, t: str) -> float:
    """Jaro-Winkler from the formula: matching window floor(max/2)-1,
    transpositions = out-of-order matched pairs // 2, prefix boost 0.1 up to
    4 characters, both-empty defined as 1."""
    if s == t:
        return 1.0
    if len(s) == 0 or len(t) == 0:
        return 0.0
    window = max(len(s), len(t)) // 2 - 1
    window = max(window, 0)

    taken = [False] * len(t)
    s_matched = []
    t_positions = []
    for i, ch in enumerate(s):
        for j in range(max(0, i - window), min(len(t), i + window + 1)):
            if not taken[j] and t[j] == ch:
                taken[j] = True
                s_matched.append(ch)
                t_positions.append(j)
                break
    m = len(s_matched)
    if m == 0:
        return 0.0
    t_matched = [t[j] for j in sorted(t_positions)]
    mismatched = sum(1 for a, b in zip(s_matched, t_matched) if a != b)
    transpositions = mismatched // 2

    jaro = (m / len(s) + m / len(t) + (m - transpositions) / m) / 3.0
    prefix = 0
    for a, b in zip(s[:4], t[:4]):
        if a != b:
            break
        prefix += 1
    return jaro + prefix * 0.1 * (1.0 - jaro)


def count_stats_reference(tokens, raw_text: str) -> tuple[int, int, int, int, int]:
    """One-liner style counts: characters, tokens (no '.'), unique tokens,
    sentences (non-empty between full stops), unique sentences."""
    words = [w for w in tokens if w != "."]
    sents = [p.strip() for p in raw_text.split(".") if p.strip()]
    return len(raw_text), len(words), len(set(words)), len(sents), len(set(sents))


def brute_force_neighbors(matrix: np.ndarray, vocab, word: str, k: int, restrict=None):
    """All-pairs cosine, python sort; tie-break by vocabulary position."""
    idx = {w: i for i, w in enumerate(vocab)}
    q = matrix[idx[word]].astype(np.float64)
    q = q / np.linalg.norm(q)
    pool = [w for w in vocab if w != word and (restrict is None or w in restrict)]
    scored = []
    for w in pool:
        v = matrix[idx[w]].astype(np.float64)
        scored.append((-float(np.dot(q, v / np.linalg.norm(v))), idx[w], w))
    scored.sort()
    return [(w, -neg) for neg, _, w in scored[:k]]


def second_order_reference(mat_a, mat_b, vocab_a, vocab_b, word, k) -> float:
    """Second-order change score via explicit loops."""
    shared = [w for w in vocab_a if w in set(vocab_b) and w != word]
    na = {w for w, _ in brute_force_neighbors(mat_a, vocab_a, word, k, restrict=set(shared))}
    nb = {w for w, _ in brute_force_neighbors(mat_b, vocab_b, word, k, restrict=set(shared))}
    union = sorted(na | nb)
    ia = {w: i for i, w in enumerate(vocab_a)}
    ib = {w: i for i, w in enumerate(vocab_b)}

    def cos(u, v):
        return float(np.dot(u, v) / (np.linalg.norm(u) * np.linalg.norm(v)))

    sa = np.array([cos(mat_a[ia[word]], mat_a[ia[w]]) for w in union])
    sb = np.array([cos(mat_b[ib[word]], mat_b[ib[w]]) for w in union])
    return 1.0 - cos(sa, sb)


def enumerate_variants_reference(name: str, nicknames=None) -> set[str]:
    """Brute-force variant enumeration: subsets keeping >= 2 words (>= 1 for
    single-word names), nickname substitutions, all orders."""
    nicknames = nicknames or {}
    words = name.split()
    low = 2 if len(words) >= 2 else 1
    out = {name}
    for r in range(low, len(words) + 1):
        for subset in itertools.combinations(words, r):
            pools = []
            for w in subset:
                alts = nicknames.get(w, [])
                if isinstance(alts, str):
                    alts = [alts]
                pools.append([w] + list(alts))
            for combo in itertools.product(*pools):
                for perm in itertools.permutations(combo):
                    out.add(" ".join(perm))
    return out


def random_orthogonal(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Orthonormalize a random Gaussian matrix (QR with sign fix)."""
    q, r = np.linalg.qr(rng.standard_normal((dim, dim)))
    return q * np.sign(np.diag(r))

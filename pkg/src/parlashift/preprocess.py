"""Text normalization for parliamentary speech.

The pipeline order is fixed: party references are tagged first (so the
"@"-prefixed tags survive punctuation removal), then tokens are normalized:
accents stripped, punctuation except full stops removed, short tokens
dropped, stopwords masked with "@sw".
"""

from __future__ import annotations

import csv
import re
import unicodedata
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

STOPWORD_TOKEN = "@sw"
SENTENCE_TOKEN = "."

# Characters that survive punctuation removal. "@" marks party/stopword tags,
# the full stop is kept as a standalone token for sentence statistics.
_KEEP_PUNCT = {".", "@"}


def strip_accents(text: str) -> str:
    """Remove combining accent marks (NFD decompose, drop marks, recompose)."""
    decomposed = unicodedata.normalize("NFD", text)
    stripped = "".join(c for c in decomposed if not unicodedata.combining(c))
    return unicodedata.normalize("NFC", stripped)


def _is_punctuation(char: str) -> bool:
    return unicodedata.category(char).startswith("P")


def normalize_tokens(
    text: str,
    stopwords: Iterable[str] = (),
    lowercase: bool = True,
) -> list[str]:
    """Normalize raw speech text into the token stream used for training.

    Order of operations: strip accents, remove punctuation except full stops
    (each full stop becomes its own token), whitespace-tokenize, replace
    stopword tokens with "@sw", drop what is left of length < 2 (the
    full-stop token and "@"-tagged tokens are exempt). Masking runs before
    the length filter so that one-letter stopwords still become "@sw" -
    every stopword occurrence is masked, none silently dropped.

    Stopwords are matched after accent stripping and lowercasing, so the
    stopword file should contain unaccented lowercase forms.
    """
    stopset = {strip_accents(w).lower() if lowercase else strip_accents(w) for w in stopwords}
    text = strip_accents(text)
    if lowercase:
        text = text.lower()

    chars: list[str] = []
    for c in text:
        if c == ".":
            chars.append(" . ")
        elif c in _KEEP_PUNCT:
            chars.append(c)
        elif _is_punctuation(c):
            chars.append(" ")
        else:
            chars.append(c)
    tokens = "".join(chars).split()

    out: list[str] = []
    for tok in tokens:
        if tok in stopset:
            out.append(STOPWORD_TOKEN)
            continue
        if tok == "@":  # a bare "@" left by stray punctuation
            continue
        if len(tok) < 2 and tok != SENTENCE_TOKEN and not tok.startswith("@"):
            continue
        out.append(tok)
    return out


def render_tokens(tokens: Sequence[str]) -> str:
    """Canonical text rendering of a normalized token stream.

    Tokens are space-joined with the standalone full-stop token attached to
    the preceding word, so character statistics reflect text volume rather
    than tokenization artifacts.
    """
    out: list[str] = []
    for tok in tokens:
        if tok == SENTENCE_TOKEN and out:
            out[-1] += SENTENCE_TOKEN
        else:
            out.append(tok)
    return " ".join(out)


def load_stopwords(path: str | Path) -> set[str]:
    """Read a stopword file: one word per line, '#' comments allowed."""
    words = set()
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        line = line.strip()
        if line and not line.startswith("#"):
            words.add(line)
    return words


@dataclass
class PartyTagTable:
    """Regex patterns that map party-name mentions to "@"-prefixed tags.

    Each pattern should cover the grammatical cases and spelling variants of
    one party name; abbreviations must be unique.
    """

    patterns: list[tuple[str, str]]
    _compiled: list[tuple[re.Pattern, str]] = field(init=False, repr=False)

    def __post_init__(self) -> None:
        if not self.patterns:
            raise ValueError("party table needs at least one pattern")
        abbrevs = [a for _, a in self.patterns]
        if len(set(abbrevs)) != len(abbrevs):
            raise ValueError("party abbreviations must be unique")
        # Longest pattern first so e.g. a multi-word party name wins over a
        # single-word one contained in it.
        ordered = sorted(self.patterns, key=lambda pa: len(pa[0]), reverse=True)
        self._compiled = [
            (re.compile(pat, re.IGNORECASE | re.UNICODE), abbrev) for pat, abbrev in ordered
        ]

    @classmethod
    def from_file(cls, path: str | Path, delimiter: str = ",") -> "PartyTagTable":
        """Load a two-column delimited file: pattern, abbreviation."""
        patterns = []
        with open(path, encoding="utf-8", newline="") as fh:
            for row in csv.reader(fh, delimiter=delimiter):
                if not row or row[0].lstrip().startswith("#"):
                    continue
                if len(row) < 2:
                    raise ValueError(f"party table row needs 2 columns: {row!r}")
                patterns.append((row[0].strip(), row[1].strip()))
        return cls(patterns)


def tag_party_references(text: str, table: PartyTagTable) -> str:
    """Replace every party-name occurrence with "@" + its abbreviation.

    Idempotent: the emitted tags never match a party pattern again.
    """
    for pattern, abbrev in table._compiled:
        text = pattern.sub("@" + abbrev, text)
    return text


def merge_periods(slicing, merge_map: dict[str, str]):
    """Merge time slices according to ``merge_map`` (source period -> target).

    The merged slice keeps the target's id, unions the source periods and
    widens the date range to the envelope. Chains (a -> b, b -> c) are
    followed to the final target. Output length = input length - merges.
    """
    from .corpus import TimeSlice  # local import to avoid a cycle

    by_period: dict[str, str] = {}
    for ts in slicing:
        for p in ts.source_periods:
            by_period[p] = ts.id

    def final_target(period: str) -> str:
        seen = set()
        while period in merge_map:
            if period in seen:
                raise ValueError(f"cyclic merge map at period {period!r}")
            seen.add(period)
            if merge_map[period] == period:
                raise ValueError(f"merge source equals target: {period!r}")
            period = merge_map[period]
        return period

    for src, dst in merge_map.items():
        if src == dst:
            raise ValueError(f"merge source equals target: {src!r}")
        if dst not in by_period:
            raise ValueError(f"merge target period {dst!r} not in slicing")
        if src not in by_period:
            raise ValueError(f"merge source period {src!r} not in slicing")

    target_slice: dict[str, str] = {}  # slice id -> destination slice id
    for ts in slicing:
        dests = {by_period[final_target(p)] if p in merge_map else ts.id for p in ts.source_periods}
        # A slice is absorbed when all its periods point at another slice.
        if dests == {ts.id}:
            target_slice[ts.id] = ts.id
        else:
            others = dests - {ts.id}
            if len(others) != 1:
                raise ValueError(f"slice {ts.id!r} merges into multiple targets: {sorted(others)}")
            target_slice[ts.id] = others.pop()

    merged: dict[str, list] = {}
    order: list[str] = []
    for ts in slicing:
        dst = target_slice[ts.id]
        while target_slice[dst] != dst:
            dst = target_slice[dst]
        if dst not in merged:
            merged[dst] = []
            order.append(dst)
        merged[dst].append(ts)

    out = []
    for sid in order:
        members = merged[sid]
        periods: list[str] = []
        for ts in members:
            periods.extend(p for p in ts.source_periods if p not in periods)
        ranges = [ts.date_range for ts in members if ts.date_range is not None]
        envelope = None
        if ranges:
            envelope = (min(r[0] for r in ranges), max(r[1] for r in ranges))
        out.append(TimeSlice(id=sid, source_periods=periods, date_range=envelope))
    return out

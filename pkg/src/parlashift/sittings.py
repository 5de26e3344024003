"""Segmentation of raw sitting transcripts into speaker/speech pairs.

A speaker mention is a run of uppercase words (Greek or Latin), optionally
followed by a parenthetical, terminated by a colon. Real records deviate
from that format - mentions mid-line, missing closing brackets - so the
matcher is tolerant and flags what it had to tolerate instead of dropping it.
Pattern sets are data-driven: a config file can replace the built-ins.
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass
from pathlib import Path

logger = logging.getLogger(__name__)

# Uppercase letters accepted in speaker names: Latin, Greek, accented Greek.
_UC = "A-ZΑ-ΩΆΈΉΊΌΎΏΪΫ"

# One name word: >=2 letters with optional hyphenated parts and an optional
# abbreviation dot, or a single initial like "Κ.".
_WORD = rf"(?:[{_UC}]+(?:-[{_UC}]+)*\.?|[{_UC}]\.)"

# Closed parenthetical first (colons allowed inside), then an unclosed one
# that stops before the colon ending the mention.
_PAREN = r"(?P<paren>\([^)\n]*\)|\([^():\n]*)"

DEFAULT_ROLE_HEADERS = (
    "ΠΡΟΕΔΡΟΣ",
    "ΠΡΟΕΔΡΕΥΩΝ",
    "ΠΡΟΕΔΡΕΥΟΥΣΑ",
    "ΓΡΑΜΜΑΤΕΑΣ",
)


def _default_patterns(role_headers: tuple[str, ...]) -> list[str]:
    multiword = rf"(?P<name>{_WORD}(?: {_WORD})+) ?{_PAREN}? ?:"
    roles = "|".join(re.escape(r) for r in role_headers)
    role_only = rf"(?P<name>(?:{roles})) ?{_PAREN}? ?:"
    return [multiword, role_only]


@dataclass
class RawSitting:
    """One transcript file; ``intro_span`` covers the preamble before the debate."""

    file_id: str
    text: str
    intro_span: tuple[int, int] = (0, 0)

    def __post_init__(self) -> None:
        lo, hi = self.intro_span
        if not (0 <= lo <= hi <= len(self.text)):
            raise ValueError(f"intro_span {self.intro_span} outside text bounds")


@dataclass
class SpeakerMention:
    raw_name: str
    parenthetical: str | None
    span: tuple[int, int]
    line_start: bool
    paren_closed: bool = True

    def __post_init__(self) -> None:
        if self.span[0] >= self.span[1]:
            raise ValueError("mention span must be non-empty")


class SpeakerPatterns:
    """Compiled mention patterns. Each regex must define a ``name`` group and
    may define a ``paren`` group."""

    def __init__(self, patterns: list[str] | None = None, role_headers=DEFAULT_ROLE_HEADERS):
        self.role_headers = tuple(role_headers)
        if patterns is None:
            patterns = _default_patterns(self.role_headers)
        self.sources = list(patterns)
        self.compiled = []
        for pat in self.sources:
            if "(?P<name>" not in pat:
                raise ValueError(f"pattern missing (?P<name>...) group: {pat!r}")
            self.compiled.append(re.compile(pat, re.UNICODE))

    @classmethod
    def from_file(cls, path: str | Path) -> "SpeakerPatterns":
        """Load a pattern file: one regex per line, '#' comments.

        A line of the form ``!roles: A, B`` replaces the role-only header
        list used by the built-in patterns; regex lines replace the built-in
        pattern list entirely.
        """
        patterns: list[str] = []
        roles = DEFAULT_ROLE_HEADERS
        for line in Path(path).read_text(encoding="utf-8").splitlines():
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if line.startswith("!roles:"):
                roles = tuple(r.strip() for r in line[len("!roles:"):].split(",") if r.strip())
                continue
            patterns.append(line)
        return cls(patterns or None, role_headers=roles)


def detect_speaker_lines(text: str, patterns: SpeakerPatterns | None = None) -> list[SpeakerMention]:
    """Find speaker mentions, ordered by position, non-overlapping.

    Mentions that do not begin a line are still matched but carry
    ``line_start=False``; an unclosed parenthetical is consumed up to the
    colon and flagged with ``paren_closed=False``.
    """
    if patterns is None:
        patterns = SpeakerPatterns()
    raw: list[tuple[int, int, re.Match]] = []
    for rx in patterns.compiled:
        for m in rx.finditer(text):
            raw.append((m.start(), -m.end(), m))
    raw.sort(key=lambda t: (t[0], t[1]))

    mentions: list[SpeakerMention] = []
    last_end = -1
    for start, _, m in raw:
        if start < last_end:
            continue  # overlapping alternative match
        paren = m.groupdict().get("paren")
        closed = True
        if paren is not None:
            closed = paren.endswith(")")
            paren = paren[1:-1] if closed else paren[1:]
        mentions.append(
            SpeakerMention(
                raw_name=m.group("name"),
                parenthetical=paren,
                span=(start, m.end()),
                line_start=_at_line_start(text, start),
                paren_closed=closed,
            )
        )
        last_end = m.end()
    return mentions


def _at_line_start(text: str, pos: int) -> bool:
    i = pos - 1
    while i >= 0 and text[i] in " \t":
        i -= 1
    return i < 0 or text[i] == "\n"


def segment_speeches(
    sitting: RawSitting, mentions: list[SpeakerMention]
) -> list[tuple[SpeakerMention, str]]:
    """Cut the sitting text into per-mention speeches.

    Speech i runs from the end of mention i to the start of mention i+1 (or
    the end of the file); the text before the first mention is the sitting's
    introduction, available through ``sitting.intro_span``. Empty speeches
    between adjacent mentions are kept (empty string) and logged.
    """
    text = sitting.text
    for a, b in zip(mentions, mentions[1:]):
        if a.span[0] >= b.span[0]:
            raise ValueError("mentions must be sorted by span start")
        if a.span[1] > b.span[0]:
            raise ValueError("mentions must not overlap")
    out: list[tuple[SpeakerMention, str]] = []
    for i, mention in enumerate(mentions):
        end = mentions[i + 1].span[0] if i + 1 < len(mentions) else len(text)
        speech = text[mention.span[1]:end]
        if not speech.strip():
            logger.warning(
                "%s: empty speech after mention %r at %d", sitting.file_id, mention.raw_name,
                mention.span[0],
            )
        out.append((mention, speech))
    return out


@dataclass
class ParsedSitting:
    sitting: RawSitting
    speeches: list[tuple[SpeakerMention, str]]

    @property
    def intro(self) -> str:
        lo, hi = self.sitting.intro_span
        return self.sitting.text[lo:hi]


def parse_sitting(text: str, file_id: str = "", patterns: SpeakerPatterns | None = None) -> ParsedSitting:
    """Detect mentions and segment in one step; unmatched files become all-intro."""
    mentions = detect_speaker_lines(text, patterns)
    intro_end = mentions[0].span[0] if mentions else len(text)
    sitting = RawSitting(file_id=file_id, text=text, intro_span=(0, intro_end))
    return ParsedSitting(sitting=sitting, speeches=segment_speeches(sitting, mentions))

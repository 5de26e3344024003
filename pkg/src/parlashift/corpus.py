"""Speech records, time slices and descriptive corpus statistics.

The speech table is a delimited UTF-8 file with one speech per row and the
eleven metadata columns in :data:`SPEECH_COLUMNS` order; ``roles`` is a
semicolon-joined list. All loading is streaming and side-effect free.
"""

from __future__ import annotations

import csv
import datetime as dt
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterable, Iterator, Sequence

SPEECH_COLUMNS = (
    "member_name",
    "sitting_date",
    "parliamentary_period",
    "parliamentary_session",
    "parliamentary_sitting",
    "political_party",
    "government",
    "member_region",
    "roles",
    "member_gender",
    "speech",
)

GENDERS = ("female", "male", "unknown")


class SpeechTableError(ValueError):
    """A malformed speech-table row; carries the 1-based line number."""

    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


@dataclass
class SpeechRecord:
    member_name: str
    sitting_date: dt.date
    parliamentary_period: str
    parliamentary_session: str
    parliamentary_sitting: str
    political_party: str
    government: str
    member_region: str
    roles: list[str]
    member_gender: str
    speech: str

    def __post_init__(self) -> None:
        if self.member_gender not in GENDERS:
            raise ValueError(f"member_gender must be one of {GENDERS}, got {self.member_gender!r}")
        if not self.speech:
            raise ValueError("speech must be non-empty")


@dataclass
class TimeSlice:
    """A sub-corpus identified by parliamentary periods, optionally dated."""

    id: str
    source_periods: list[str]
    date_range: tuple[dt.date, dt.date] | None = None

    def __post_init__(self) -> None:
        if not self.source_periods:
            raise ValueError(f"slice {self.id!r} needs at least one source period")
        if self.date_range is not None and self.date_range[0] > self.date_range[1]:
            raise ValueError(f"slice {self.id!r} has an inverted date range")

    def __hash__(self) -> int:
        return hash(self.id)

    def contains(self, record: SpeechRecord) -> bool:
        if record.parliamentary_period:
            return record.parliamentary_period in self.source_periods
        if self.date_range is not None:
            return self.date_range[0] <= record.sitting_date <= self.date_range[1]
        return False


@dataclass
class CorpusStats:
    characters: int
    tokens: int
    unique_tokens: int
    sentences: int
    unique_sentences: int

    def __post_init__(self) -> None:
        if self.unique_tokens > self.tokens:
            raise ValueError("unique_tokens cannot exceed tokens")
        if self.unique_sentences > self.sentences:
            raise ValueError("unique_sentences cannot exceed sentences")


def _parse_date(value: str) -> dt.date:
    return dt.date.fromisoformat(value.strip())


def load_speeches(
    path: str | Path,
    delimiter: str = ",",
    errors: str = "raise",
    error_sink: list | None = None,
    min_date: dt.date | None = None,
    max_date: dt.date | None = None,
) -> Iterator[SpeechRecord]:
    """Stream SpeechRecords from a speech table, in file order.

    Malformed rows are never silently dropped: with ``errors="raise"`` a
    :class:`SpeechTableError` carrying the line number is raised, with
    ``errors="collect"`` the error is appended to ``error_sink`` and the row
    skipped. ``min_date``/``max_date`` optionally bound the sitting dates
    (the reference corpus spans 1989-07-01 to 2020-07-31).
    """
    if errors not in ("raise", "collect"):
        raise ValueError("errors must be 'raise' or 'collect'")
    if errors == "collect" and error_sink is None:
        raise ValueError("errors='collect' needs an error_sink list")
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(path)

    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh, delimiter=delimiter)
        try:
            header = next(reader)
        except StopIteration:
            raise SpeechTableError(1, "missing header row")
        if tuple(h.strip() for h in header) != SPEECH_COLUMNS:
            raise SpeechTableError(1, f"unexpected header {header!r}")
        for row in reader:
            line = reader.line_num
            try:
                yield _row_to_record(row, line, min_date, max_date)
            except SpeechTableError as exc:
                if errors == "raise":
                    raise
                error_sink.append(exc)


def _row_to_record(
    row: Sequence[str], line: int, min_date: dt.date | None, max_date: dt.date | None
) -> SpeechRecord:
    if len(row) != len(SPEECH_COLUMNS):
        raise SpeechTableError(line, f"expected {len(SPEECH_COLUMNS)} columns, got {len(row)}")
    try:
        date = _parse_date(row[1])
    except ValueError:
        raise SpeechTableError(line, f"invalid sitting_date {row[1]!r}")
    if min_date is not None and date < min_date:
        raise SpeechTableError(line, f"sitting_date {date} before {min_date}")
    if max_date is not None and date > max_date:
        raise SpeechTableError(line, f"sitting_date {date} after {max_date}")
    try:
        return SpeechRecord(
            member_name=row[0],
            sitting_date=date,
            parliamentary_period=row[2],
            parliamentary_session=row[3],
            parliamentary_sitting=row[4],
            political_party=row[5],
            government=row[6],
            member_region=row[7],
            roles=[r for r in row[8].split(";") if r],
            member_gender=row[9],
            speech=row[10],
        )
    except ValueError as exc:
        raise SpeechTableError(line, str(exc))


def write_speeches(records: Iterable[SpeechRecord], path: str | Path, delimiter: str = ",") -> int:
    """Write a speech table; inverse of :func:`load_speeches`. Returns row count."""
    n = 0
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, delimiter=delimiter, lineterminator="\n")
        writer.writerow(SPEECH_COLUMNS)
        for rec in records:
            writer.writerow(
                [
                    rec.member_name,
                    rec.sitting_date.isoformat(),
                    rec.parliamentary_period,
                    rec.parliamentary_session,
                    rec.parliamentary_sitting,
                    rec.political_party,
                    rec.government,
                    rec.member_region,
                    ";".join(rec.roles),
                    rec.member_gender,
                    rec.speech,
                ]
            )
            n += 1
    return n


@dataclass
class SlicedCorpus:
    """Per-slice token sequences plus bookkeeping about excluded records."""

    tokens: dict[str, list[str]]
    excluded_records: int = 0
    excluded_tokens: int = 0


def slice_corpus(
    records: Iterable[SpeechRecord],
    slicing: Sequence[TimeSlice],
    tokenizer: Callable[[str], list[str]] = str.split,
) -> SlicedCorpus:
    """Assign records to time slices and concatenate their tokens.

    A record lands in the first slice whose periods contain its
    parliamentary_period (date-range fallback for records without a period
    label); records matching no slice are counted and excluded. Token order
    within a slice follows record order.
    """
    _check_disjoint(slicing)
    out = SlicedCorpus(tokens={ts.id: [] for ts in slicing})
    for rec in records:
        toks = tokenizer(rec.speech)
        for ts in slicing:
            if ts.contains(rec):
                out.tokens[ts.id].extend(toks)
                break
        else:
            out.excluded_records += 1
            out.excluded_tokens += len(toks)
    return out


def _check_disjoint(slicing: Sequence[TimeSlice]) -> None:
    seen: dict[str, str] = {}
    for ts in slicing:
        for p in ts.source_periods:
            if p in seen:
                raise ValueError(f"period {p!r} appears in slices {seen[p]!r} and {ts.id!r}")
            seen[p] = ts.id


def corpus_stats(tokens: Sequence[str], raw_text: str) -> CorpusStats:
    """Descriptive statistics over a token sequence and the text it came from.

    ``characters`` counts every character of ``raw_text``; sentences are the
    non-empty segments between full stops. The standalone "." sentence marker
    emitted by preprocessing is not counted as a token.
    """
    words = [t for t in tokens if t != "."]
    sentences = [s.strip() for s in raw_text.split(".")]
    sentences = [s for s in sentences if s]
    return CorpusStats(
        characters=len(raw_text),
        tokens=len(words),
        unique_tokens=len(set(words)),
        sentences=len(sentences),
        unique_sentences=len(set(sentences)),
    )


def shared_vocabulary(a: Iterable[str], b: Iterable[str]) -> tuple[set[str], int]:
    """Intersection of the distinct tokens of two sequences, with its size."""
    shared = set(a) & set(b)
    return shared, len(shared)


def gender_participation(
    records: Iterable[SpeechRecord],
) -> dict[tuple[str, str], tuple[float, float]]:
    """Female participation per (party, period) cell.

    Returns ``{(party, period): (member_pct, speech_char_pct)}`` where
    member_pct is the fraction of distinct female members among members with
    known gender and speech_char_pct the fraction of speech characters
    delivered by female members. Cells without any known-gender member are
    omitted.
    """
    members: dict[tuple[str, str], dict[str, str]] = {}
    chars: dict[tuple[str, str], list[int]] = {}
    for rec in records:
        key = (rec.political_party, rec.parliamentary_period)
        members.setdefault(key, {})[rec.member_name] = rec.member_gender
        cell = chars.setdefault(key, [0, 0])
        cell[1] += len(rec.speech)
        if rec.member_gender == "female":
            cell[0] += len(rec.speech)

    out: dict[tuple[str, str], tuple[float, float]] = {}
    for key, names in members.items():
        known = [g for g in names.values() if g != "unknown"]
        if not known:
            continue
        member_pct = sum(1 for g in known if g == "female") / len(known)
        female_chars, total_chars = chars[key]
        speech_pct = female_chars / total_chars if total_chars else 0.0
        out[key] = (member_pct, speech_pct)
    return out


def load_slicing(path: str | Path) -> list[TimeSlice]:
    """Parse a slicing file.

    One slice per line::

        <slice id> : <period>, <period>, ... [| YYYY-MM-DD..YYYY-MM-DD]

    '#' starts a comment. The optional date range is used as a fallback for
    records without a period label.
    """
    slices = []
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if ":" not in line:
            raise ValueError(f"slicing line {lineno}: missing ':'")
        sid, rest = line.split(":", 1)
        date_range = None
        if "|" in rest:
            rest, dates = rest.split("|", 1)
            lo, _, hi = dates.strip().partition("..")
            date_range = (_parse_date(lo), _parse_date(hi))
        periods = [p.strip() for p in rest.split(",") if p.strip()]
        slices.append(TimeSlice(id=sid.strip(), source_periods=periods, date_range=date_range))
    _check_disjoint(slices)
    return slices

"""Match extracted speaker mentions to registry members.

Matching works on accent-folded uppercase strings: every official name is
expanded into variants (word reorderings, nickname substitutions, dropped
middle names), a mention is scored against the variants with Jaro-Winkler
similarity and accepted at similarity >= 0.95.
"""

from __future__ import annotations

import csv
import datetime as dt
import itertools
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .preprocess import strip_accents

logger = logging.getLogger(__name__)

MATCH_THRESHOLD = 0.95

REGISTRY_COLUMNS = (
    "official_name",
    "gender",
    "start_date",
    "end_date",
    "party",
    "region",
    "roles",
    "government",
)


def jaro_winkler(a: str, b: str) -> float:
    """Jaro-Winkler similarity in [0, 1].

    Jaro base with matching window floor(max(|a|,|b|)/2) - 1 and the
    transposition count halved (rounded down), boosted by 0.1 per common
    prefix character (at most 4). Two empty strings compare as 1.0.
    """
    if a == b:
        return 1.0
    if not a or not b:
        return 0.0
    window = max(len(a), len(b)) // 2 - 1
    if window < 0:
        window = 0

    a_match = [False] * len(a)
    b_match = [False] * len(b)
    matches = 0
    for i, ca in enumerate(a):
        lo = max(0, i - window)
        hi = min(i + window + 1, len(b))
        for j in range(lo, hi):
            if not b_match[j] and b[j] == ca:
                a_match[i] = True
                b_match[j] = True
                matches += 1
                break
    if matches == 0:
        return 0.0

    b_matched = [b[j] for j in range(len(b)) if b_match[j]]
    k = 0
    half_transpositions = 0
    for i, ca in enumerate(a):
        if a_match[i]:
            if ca != b_matched[k]:
                half_transpositions += 1
            k += 1
    transpositions = half_transpositions // 2

    jaro = (
        matches / len(a) + matches / len(b) + (matches - transpositions) / matches
    ) / 3.0

    prefix = 0
    for ca, cb in zip(a, b):
        if ca != cb or prefix == 4:
            break
        prefix += 1
    return jaro + prefix * 0.1 * (1.0 - jaro)


def normalize_name(name: str) -> str:
    """Accent-fold, uppercase and collapse whitespace."""
    return " ".join(strip_accents(name).upper().split())


@dataclass
class NameVariantSet:
    canonical: str
    variants: set[str]

    def __post_init__(self) -> None:
        if self.canonical not in self.variants:
            raise ValueError("canonical name must be among its variants")
        if any(not v for v in self.variants):
            raise ValueError("variants must be non-empty strings")


def generate_variants(
    official_name: str, nicknames: Mapping[str, Sequence[str] | str] | None = None
) -> NameVariantSet:
    """All plausible written forms of an official name.

    Variants are built from every subset of the name's words that keeps at
    least two words (one-word names stay whole), every word order, and every
    nickname substitution from the two-column nickname table.
    """
    words = official_name.split()
    if not words:
        raise ValueError("official name needs at least one word")
    nicknames = nicknames or {}
    options: list[list[str]] = []
    for w in words:
        alts = nicknames.get(w, [])
        if isinstance(alts, str):
            alts = [alts]
        options.append([w, *alts])

    min_keep = 2 if len(words) >= 2 else 1
    variants: set[str] = set()
    for size in range(min_keep, len(words) + 1):
        for idx in itertools.combinations(range(len(words)), size):
            for chosen in itertools.product(*(options[i] for i in idx)):
                for perm in itertools.permutations(chosen):
                    variants.add(" ".join(perm))
    variants.add(official_name)
    return NameVariantSet(canonical=official_name, variants=variants)


@dataclass
class NameCaseTable:
    """Maps any written form of a Greek name word to (nominative, gender)."""

    entries: dict[str, tuple[str, str]]

    def __post_init__(self) -> None:
        for form, (nom, gender) in list(self.entries.items()):
            if nom not in self.entries:
                self.entries[nom] = (nom, gender)
        for form, (nom, _) in self.entries.items():
            if self.entries[nom][0] != nom:
                raise ValueError(f"nominative {nom!r} must map to itself")

    @classmethod
    def from_file(cls, path: str | Path, delimiter: str = ",") -> "NameCaseTable":
        """Three-column file: form, nominative, gender."""
        entries: dict[str, tuple[str, str]] = {}
        with open(path, encoding="utf-8", newline="") as fh:
            for row in csv.reader(fh, delimiter=delimiter):
                if not row or row[0].lstrip().startswith("#"):
                    continue
                if len(row) < 3:
                    raise ValueError(f"case table row needs 3 columns: {row!r}")
                entries[normalize_name(row[0])] = (normalize_name(row[1]), row[2].strip())
        return cls(entries)


def genitive_to_nominative(name: str, table: NameCaseTable) -> tuple[str, str]:
    """Convert a name word-by-word to nominative and deduce the gender.

    Words missing from the table pass through unchanged; the overall gender
    is the table gender of the first word when known, otherwise "unknown".
    """
    words = normalize_name(name).split()
    out = []
    gender = "unknown"
    for i, w in enumerate(words):
        hit = table.entries.get(w)
        if hit is None:
            out.append(w)
            continue
        nom, g = hit
        out.append(nom)
        if i == 0 and g in ("female", "male"):
            gender = g
    return " ".join(out), gender


@dataclass
class ServiceInterval:
    start: dt.date
    end: dt.date
    party: str = ""
    region: str = ""
    roles: tuple[str, ...] = ()
    government: str = ""

    def __post_init__(self) -> None:
        if self.start > self.end:
            raise ValueError(f"interval start {self.start} after end {self.end}")
        self.roles = tuple(self.roles)

    def contains(self, date: dt.date) -> bool:
        return self.start <= date <= self.end


@dataclass
class MemberEntry:
    official_name: str
    gender: str = "unknown"
    intervals: list[ServiceInterval] = field(default_factory=list)

    def __post_init__(self) -> None:
        for a, b in itertools.combinations(self.intervals, 2):
            if a.start <= b.end and b.start <= a.end and set(a.roles) == set(b.roles) \
                    and a.party == b.party:
                raise ValueError(
                    f"{self.official_name}: overlapping intervals with identical roles"
                )

    def active_on(self, date: dt.date) -> list[ServiceInterval]:
        return [iv for iv in self.intervals if iv.contains(date)]


class RegistryIndex:
    """Registry members with precomputed, normalized name variants."""

    def __init__(self, entries: Sequence[MemberEntry], nicknames: Mapping | None = None):
        norm_nicknames = {}
        for key, val in (nicknames or {}).items():
            vals = [val] if isinstance(val, str) else list(val)
            norm_nicknames[normalize_name(key)] = [normalize_name(v) for v in vals]
        self.entries = list(entries)
        self.variants: list[set[str]] = [
            generate_variants(normalize_name(e.official_name), norm_nicknames).variants
            for e in self.entries
        ]


def _common_prefix_len(a: str, b: str) -> int:
    n = 0
    for ca, cb in zip(a, b):
        if ca != cb:
            break
        n += 1
    return n


def resolve_speaker(
    mention,
    registry: RegistryIndex | Sequence[MemberEntry],
    date: dt.date | None = None,
    threshold: float = MATCH_THRESHOLD,
) -> MemberEntry | None:
    """Resolve a speaker mention against the registry; None when unresolved.

    The best-scoring entry wins if its similarity is >= threshold, preferring
    entries with an interval containing ``date`` (the date filter is dropped
    when no dated candidate passes). Ties break on longer common prefix with
    the matched variant, then on the entry's official name.
    """
    if not isinstance(registry, RegistryIndex):
        registry = RegistryIndex(registry)
    if not registry.entries:
        return None
    query = normalize_name(getattr(mention, "raw_name", mention))
    scored = []
    for entry, variants in zip(registry.entries, registry.variants):
        best_sim, best_prefix = 0.0, 0
        for v in variants:
            sim = jaro_winkler(query, v)
            if sim > best_sim or (sim == best_sim and _common_prefix_len(query, v) > best_prefix):
                best_sim = sim
                best_prefix = _common_prefix_len(query, v)
        if best_sim >= threshold:
            scored.append((best_sim, best_prefix, entry))
    if not scored:
        return None
    if date is not None:
        dated = [s for s in scored if s[2].active_on(date)]
        if dated:
            scored = dated
    scored.sort(key=lambda s: (-s[0], -s[1], s[2].official_name))
    return scored[0][2]


# -- support dataset rows and the registry merge ------------------------------

@dataclass
class MemberRow:
    name: str
    gender: str
    start: dt.date
    end: dt.date
    party: str = ""
    region: str = ""
    roles: tuple[str, ...] = ()


@dataclass
class GovMemberRow:
    name: str
    role: str
    start: dt.date
    end: dt.date
    gender: str = "unknown"


@dataclass
class GovernmentRow:
    name: str
    start: dt.date
    end: dt.date


@dataclass
class ExtraPostRow:
    name: str
    role: str
    start: dt.date
    end: dt.date
    gender: str = "unknown"


def government_on(governments: Sequence[GovernmentRow], date: dt.date) -> str:
    for gov in governments:
        if gov.start <= date <= gov.end:
            return gov.name
    return ""


def merge_support_datasets(
    members: Iterable[MemberRow],
    government_members: Iterable[GovMemberRow] = (),
    governments: Sequence[GovernmentRow] = (),
    extra_posts: Iterable[ExtraPostRow] = (),
) -> list[MemberEntry]:
    """Fuse the support datasets into one registry entry per person.

    People are keyed by normalized full name; intervals from all sources are
    unioned (exact duplicates collapse, which makes the merge idempotent) and
    each interval is stamped with the government in power at its start date.
    Gender conflicts keep the first known value and are logged.
    """
    people: dict[str, MemberEntry] = {}
    interval_sets: dict[str, set] = {}

    def add(name: str, gender: str, interval: ServiceInterval) -> None:
        key = normalize_name(name)
        entry = people.get(key)
        if entry is None:
            entry = MemberEntry(official_name=key, gender=gender)
            people[key] = entry
            interval_sets[key] = set()
        elif gender != "unknown":
            if entry.gender == "unknown":
                entry.gender = gender
            elif entry.gender != gender:
                logger.warning("gender conflict for %s: keeping %r, ignoring %r",
                               key, entry.gender, gender)
        sig = (interval.start, interval.end, interval.party, interval.region,
               interval.roles, interval.government)
        if sig not in interval_sets[key]:
            interval_sets[key].add(sig)
            entry.intervals.append(interval)

    for row in members:
        add(row.name, row.gender, ServiceInterval(
            start=row.start, end=row.end, party=row.party, region=row.region,
            roles=tuple(row.roles), government=government_on(governments, row.start)))
    for row in government_members:
        add(row.name, row.gender, ServiceInterval(
            start=row.start, end=row.end, roles=(row.role,),
            government=government_on(governments, row.start)))
    for row in extra_posts:
        add(row.name, row.gender, ServiceInterval(
            start=row.start, end=row.end, roles=(row.role,),
            government=government_on(governments, row.start)))

    out = []
    for key in sorted(people):
        entry = people[key]
        entry.intervals.sort(key=lambda iv: (iv.start, iv.end, iv.roles))
        out.append(MemberEntry(entry.official_name, entry.gender, entry.intervals))
    return out


def registry_to_member_rows(entries: Iterable[MemberEntry]) -> list[MemberRow]:
    """Flatten a registry back to member rows (round-trips through the merge)."""
    rows = []
    for entry in entries:
        for iv in entry.intervals:
            rows.append(MemberRow(
                name=entry.official_name, gender=entry.gender, start=iv.start,
                end=iv.end, party=iv.party, region=iv.region, roles=iv.roles))
    return rows


def write_registry(entries: Iterable[MemberEntry], path: str | Path, delimiter: str = ",") -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, delimiter=delimiter, lineterminator="\n")
        writer.writerow(REGISTRY_COLUMNS)
        for entry in entries:
            for iv in entry.intervals:
                writer.writerow([
                    entry.official_name, entry.gender, iv.start.isoformat(),
                    iv.end.isoformat(), iv.party, iv.region, ";".join(iv.roles),
                    iv.government,
                ])


def load_registry(path: str | Path, delimiter: str = ",") -> list[MemberEntry]:
    people: dict[str, MemberEntry] = {}
    order: list[str] = []
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh, delimiter=delimiter)
        header = next(reader)
        if tuple(h.strip() for h in header) != REGISTRY_COLUMNS:
            raise ValueError(f"unexpected registry header: {header!r}")
        for row in reader:
            name, gender = row[0], row[1]
            iv = ServiceInterval(
                start=dt.date.fromisoformat(row[2]), end=dt.date.fromisoformat(row[3]),
                party=row[4], region=row[5],
                roles=tuple(r for r in row[6].split(";") if r), government=row[7])
            if name not in people:
                people[name] = MemberEntry(official_name=name, gender=gender)
                order.append(name)
            people[name].intervals.append(iv)
    return [people[n] for n in order]


def _two_column_file(path: str | Path, delimiter: str = ",") -> list[tuple[str, str]]:
    rows = []
    with open(path, encoding="utf-8", newline="") as fh:
        for row in csv.reader(fh, delimiter=delimiter):
            if not row or row[0].lstrip().startswith("#"):
                continue
            if len(row) < 2:
                raise ValueError(f"expected 2 columns: {row!r}")
            rows.append((row[0].strip(), row[1].strip()))
    return rows


def load_nicknames(path: str | Path, delimiter: str = ",") -> dict[str, list[str]]:
    """Two-column table official name word -> nickname; repeats accumulate."""
    table: dict[str, list[str]] = {}
    for official, nick in _two_column_file(path, delimiter):
        table.setdefault(official, []).append(nick)
    return table

"""Command-line pipeline: ingest -> preprocess -> stats -> train -> detect ->
evaluate -> plot data.

Every command writes its artifacts plus a run manifest into the output
directory. Configuration precedence is command-line flags, then the
--config key=value file, then built-in defaults. Exit codes: 0 success,
1 input/usage error, 2 internal error.
"""

from __future__ import annotations

import argparse
import dataclasses
import datetime as dt
import hashlib
import json
import sys
import traceback
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .align import align_models
from .corpus import (
    SpeechRecord,
    corpus_stats,
    gender_participation,
    load_slicing,
    load_speeches,
    shared_vocabulary,
    slice_corpus,
    write_speeches,
)
from .detect import ChangeConfig, prepare_models, rank_changed_words
from .embed import (
    TrainConfig,
    export_text,
    load_model,
    nearest_neighbors,
    save_model,
    train,
    train_compass,
)
from .evaluate import (
    DEFAULT_K_LIST,
    EvaluationError,
    StabilityConfig,
    party_drift,
    run_stability,
    track_topics,
)
from .preprocess import (
    PartyTagTable,
    load_stopwords,
    merge_periods,
    normalize_tokens,
    render_tokens,
    tag_party_references,
)
from .reports import render_svg
from .resolve import (
    ExtraPostRow,
    GovMemberRow,
    GovernmentRow,
    MemberRow,
    NameCaseTable,
    RegistryIndex,
    genitive_to_nominative,
    government_on,
    load_nicknames,
    normalize_name,
    resolve_speaker,
)
from .sittings import SpeakerPatterns, parse_sitting

import csv as _csv


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # exit 1 on usage errors, not argparse's 2
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


@dataclass
class RunManifest:
    command: str
    options: dict
    input_hashes: dict[str, str]
    base_seed: int
    version: str
    started: str
    finished: str = ""

    def write(self, outdir: Path) -> Path:
        path = outdir / "manifest.json"
        path.write_text(json.dumps(dataclasses.asdict(self), indent=2, sort_keys=True) + "\n",
                        encoding="utf-8")
        return path


def _sha256(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _parse_config_file(path: str | None) -> dict[str, str]:
    if not path:
        return {}
    out: dict[str, str] = {}
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"config line {lineno}: expected key=value")
        key, value = line.split("=", 1)
        out[key.strip()] = value.strip()
    return out


class Options:
    """Flag > config file > default resolution for one command invocation."""

    def __init__(self, args: argparse.Namespace):
        self.args = vars(args)
        self.config = _parse_config_file(self.args.get("config"))
        self.resolved: dict = {}

    def get(self, key: str, default=None, cast=None):
        value = self.args.get(key)
        if value is None and key in self.config:
            raw = self.config[key]
            if cast is None and default is not None:
                cast = type(default)
            if cast is bool:
                value = raw.lower() in ("1", "true", "yes", "on")
            elif cast is not None:
                value = cast(raw)
            else:
                value = raw
        if value is None:
            value = default
        self.resolved[key] = value if not isinstance(value, Path) else str(value)
        return value


def _manifest(command: str, opts: Options, inputs: list[Path], seed: int) -> RunManifest:
    return RunManifest(
        command=command,
        options={k: _jsonable(v) for k, v in sorted(opts.resolved.items())},
        input_hashes={str(p): _sha256(p) for p in inputs if p and Path(p).is_file()},
        base_seed=seed,
        version=__version__,
        started=dt.datetime.now(dt.timezone.utc).isoformat(),
    )


def _jsonable(v):
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, Path):
        return str(v)
    return v


def _finish(manifest: RunManifest, outdir: Path) -> None:
    manifest.finished = dt.datetime.now(dt.timezone.utc).isoformat()
    manifest.write(outdir)


def _outdir(opts: Options) -> Path:
    out = Path(opts.get("output", "out"))
    out.mkdir(parents=True, exist_ok=True)
    return out


def _train_config(opts: Options, architecture_default: str = "skipgram") -> TrainConfig:
    return TrainConfig(
        dim=opts.get("dim", 100),
        window=opts.get("window", 5),
        negative=opts.get("negative", 5),
        epochs=opts.get("epochs", 5),
        learning_rate=opts.get("learning_rate", 0.025),
        min_count=opts.get("min_count", 5),
        subsample=opts.get("subsample", 1e-3),
        architecture=opts.get("architecture", architecture_default),
        seed=opts.get("seed", 0),
        deterministic=opts.get("deterministic", True),
        workers=opts.get("workers", 1),
        compass_frozen=opts.get("compass_frozen", "target"),
    )


def _change_config(opts: Options, method: str) -> ChangeConfig:
    return ChangeConfig(
        method=method,
        neighbor_k=opts.get("neighbor_k", 1000),
        top_freq_cut=opts.get("top_freq_cut", 200),
        min_freq_cut=opts.get("min_freq_cut", 200),
        candidate_min_occurrences=opts.get("candidate_min_occurrences", 50),
    )


def _load_sliced(opts: Options, path: Path):
    slicing = load_slicing(opts.get("slicing"))
    merge_arg = opts.get("merge_map", "")
    if merge_arg:
        merge_map = dict(item.split(":", 1) for item in merge_arg.split(","))
        slicing = merge_periods(slicing, merge_map)
    records = load_speeches(path, delimiter=opts.get("delimiter", ","))
    return slicing, slice_corpus(records, slicing)


def _rows_file(path: Path, delimiter=","):
    with open(path, encoding="utf-8", newline="") as fh:
        reader = _csv.reader(fh, delimiter=delimiter)
        header = next(reader)
        for row in reader:
            yield dict(zip([h.strip() for h in header], row))


def _date(value: str) -> dt.date:
    return dt.date.fromisoformat(value.strip())


# -- ingest --------------------------------------------------------------------

def _load_support_tables(opts: Options):
    members = []
    for row in _rows_file(Path(opts.get("members"))):
        members.append(MemberRow(
            name=row["name"], gender=row.get("gender", "unknown") or "unknown",
            start=_date(row["start_date"]), end=_date(row["end_date"]),
            party=row.get("party", ""), region=row.get("region", ""),
            roles=tuple(r for r in row.get("roles", "").split(";") if r)))
    governments = []
    if opts.get("governments"):
        for row in _rows_file(Path(opts.get("governments"))):
            governments.append(GovernmentRow(
                name=row["name"], start=_date(row["start_date"]), end=_date(row["end_date"])))
    case_table = None
    if opts.get("case_table"):
        case_table = NameCaseTable.from_file(opts.get("case_table"))
    gov_members = []
    if opts.get("gov_members"):
        for row in _rows_file(Path(opts.get("gov_members"))):
            name, gender = row["name"], "unknown"
            if case_table is not None:
                name, gender = genitive_to_nominative(name, case_table)
            gov_members.append(GovMemberRow(
                name=name, role=row["role"], gender=gender,
                start=_date(row["start_date"]), end=_date(row["end_date"])))
    extra_posts = []
    if opts.get("extra_posts"):
        for row in _rows_file(Path(opts.get("extra_posts"))):
            extra_posts.append(ExtraPostRow(
                name=row["name"], role=row["role"],
                gender=row.get("gender", "unknown") or "unknown",
                start=_date(row["start_date"]), end=_date(row["end_date"])))
    return members, gov_members, governments, extra_posts


def _sitting_metadata(path: Path) -> tuple[str, str, str, dt.date]:
    """Filename convention: <period>_<session>_<sitting>_<YYYY-MM-DD>.txt"""
    parts = path.stem.split("_")
    if len(parts) != 4:
        raise ValueError(
            f"{path.name}: expected <period>_<session>_<sitting>_<date>.txt"
        )
    return parts[0], parts[1], parts[2], _date(parts[3])


def cmd_ingest(args: argparse.Namespace) -> int:
    from .resolve import merge_support_datasets

    opts = Options(args)
    indir = Path(opts.get("input"))
    if not indir.is_dir():
        raise FileNotFoundError(f"input directory {indir} does not exist")
    outdir = _outdir(opts)
    patterns = SpeakerPatterns()
    if opts.get("patterns"):
        patterns = SpeakerPatterns.from_file(opts.get("patterns"))
    members, gov_members, governments, extra_posts = _load_support_tables(opts)
    registry = merge_support_datasets(members, gov_members, governments, extra_posts)
    nicknames = load_nicknames(opts.get("nicknames")) if opts.get("nicknames") else None
    index = RegistryIndex(registry, nicknames)
    role_headers = {normalize_name(r) for r in patterns.role_headers}

    files = sorted(indir.glob("*.txt"))
    if not files:
        raise FileNotFoundError(f"no .txt sitting files under {indir}")
    # chronological debate order
    files.sort(key=lambda p: (_sitting_metadata(p)[3], p.name))
    records: list[SpeechRecord] = []
    skipped_empty = 0
    unresolved = 0
    for path in files:
        period, session, sitting, date = _sitting_metadata(path)
        parsed = parse_sitting(path.read_text(encoding="utf-8"), file_id=path.name,
                               patterns=patterns)
        for mention, speech in parsed.speeches:
            speech = speech.strip()
            if not speech:
                skipped_empty += 1
                continue
            query = mention.raw_name
            if normalize_name(query) in role_headers and mention.parenthetical:
                query = mention.parenthetical
            entry = resolve_speaker(query, index, date)
            if entry is None:
                unresolved += 1
                name, gender, party, region, roles = (
                    normalize_name(mention.raw_name), "unknown", "", "", [])
            else:
                name, gender = entry.official_name, entry.gender
                active = entry.active_on(date)
                party = next((iv.party for iv in active if iv.party), "")
                region = next((iv.region for iv in active if iv.region), "")
                roles = sorted({r for iv in active for r in iv.roles})
            records.append(SpeechRecord(
                member_name=name, sitting_date=date, parliamentary_period=period,
                parliamentary_session=session, parliamentary_sitting=sitting,
                political_party=party, government=government_on(governments, date),
                member_region=region, roles=roles, member_gender=gender, speech=speech))

    from .resolve import write_registry

    manifest = _manifest("ingest", opts, [Path(f) for f in files], seed=0)
    delim = opts.get("delimiter", ",")
    n = write_speeches(records, outdir / "speeches.csv", delimiter=delim)
    write_registry(registry, outdir / "registry.csv")
    _finish(manifest, outdir)
    print(f"ingest: {n} speeches from {len(files)} files "
          f"({skipped_empty} empty segments skipped, {unresolved} unresolved speakers)")
    return 0


# -- stats ---------------------------------------------------------------------

def _write_csv(path: Path, header, rows) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = _csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def cmd_stats(args: argparse.Namespace) -> int:
    opts = Options(args)
    infile = Path(opts.get("input"))
    outdir = _outdir(opts)
    stopwords = load_stopwords(opts.get("stopwords")) if opts.get("stopwords") else None

    delim = opts.get("delimiter", ",")
    if opts.get("slicing"):
        slicing, sliced = _load_sliced(opts, infile)
        slice_texts: dict[str, list[str]] = {ts.id: [] for ts in slicing}
        for rec in load_speeches(infile, delimiter=delim):
            for ts in slicing:
                if ts.contains(rec):
                    slice_texts[ts.id].append(rec.speech)
                    break
        groups = {sid: ("\n".join(slice_texts[sid]), sliced.tokens[sid]) for sid in slice_texts}
    else:
        texts, tokens = [], []
        for rec in load_speeches(infile, delimiter=delim):
            texts.append(rec.speech)
            tokens.extend(rec.speech.split())
        groups = {"all": ("\n".join(texts), tokens)}

    stat_rows = []
    pp_tokens: dict[str, list[str]] = {}
    for sid, (text, tokens) in groups.items():
        stats = corpus_stats(tokens, text)
        stat_rows.append((sid, "raw", stats.characters, stats.tokens, stats.unique_tokens,
                          stats.sentences, stats.unique_sentences))
        if stopwords is not None:
            toks = normalize_tokens(text, stopwords)
            pp_tokens[sid] = toks
            pp_text = render_tokens(toks)
            stats = corpus_stats(toks, pp_text)
            stat_rows.append((sid, "preprocessed", stats.characters, stats.tokens,
                              stats.unique_tokens, stats.sentences, stats.unique_sentences))
    _write_csv(outdir / "stats.csv",
               ("slice", "stage", "characters", "tokens", "unique_tokens", "sentences",
                "unique_sentences"), stat_rows)

    ids = list(groups)
    overlap_rows = []
    for a, b in zip(ids, ids[1:]):
        tok_a = pp_tokens.get(a, groups[a][1])
        tok_b = pp_tokens.get(b, groups[b][1])
        _, size = shared_vocabulary(tok_a, tok_b)
        overlap_rows.append((f"{a}:{b}", size))
    _write_csv(outdir / "vocab_overlap.csv", ("pair", "shared_vocabulary"), overlap_rows)

    gender = gender_participation(load_speeches(infile, delimiter=delim))
    _write_csv(outdir / "gender.csv", ("party", "period", "member_pct", "speech_char_pct"),
               [(p, per, f"{m:.6f}", f"{s:.6f}") for (p, per), (m, s) in sorted(gender.items())])

    manifest = _manifest("stats", opts, [infile], seed=0)
    _finish(manifest, outdir)
    print(f"stats: wrote stats.csv, vocab_overlap.csv, gender.csv to {outdir}")
    return 0


# -- preprocess ----------------------------------------------------------------

def cmd_preprocess(args: argparse.Namespace) -> int:
    opts = Options(args)
    infile = Path(opts.get("input"))
    outdir = _outdir(opts)
    stopwords = load_stopwords(opts.get("stopwords")) if opts.get("stopwords") else set()
    party_table = None
    if opts.get("party_table"):
        party_table = PartyTagTable.from_file(opts.get("party_table"))

    dropped = 0

    delim = opts.get("delimiter", ",")

    def transformed():
        nonlocal dropped
        for rec in load_speeches(infile, delimiter=delim):
            text = rec.speech
            if party_table is not None:
                text = tag_party_references(text, party_table)
            tokens = normalize_tokens(text, stopwords)
            if not tokens:
                dropped += 1
                continue
            yield dataclasses.replace(rec, speech=" ".join(tokens))

    n = write_speeches(transformed(), outdir / "speeches.csv", delimiter=delim)
    manifest = _manifest("preprocess", opts, [infile], seed=0)
    _finish(manifest, outdir)
    print(f"preprocess: {n} speeches written ({dropped} empty after normalization)")
    return 0


# -- train / align -------------------------------------------------------------

def cmd_train(args: argparse.Namespace) -> int:
    opts = Options(args)
    infile = Path(opts.get("input"))
    outdir = _outdir(opts)
    mode = opts.get("mode", "compass")
    config = _train_config(opts, architecture_default="cbow" if mode == "compass" else "skipgram")
    slicing, sliced = _load_sliced(opts, infile)

    saved = []
    if mode == "compass":
        compass, per_slice = train_compass(sliced.tokens, config)
        save_model(compass, outdir / "compass.gpem")
        saved.append("compass")
        models = per_slice
    elif mode == "single":
        models = {}
        for i, (sid, tokens) in enumerate(sliced.tokens.items()):
            models[sid] = train(tokens, dataclasses.replace(config, seed=config.seed + i),
                                slice_id=sid)
    else:
        raise ValueError(f"unknown training mode {mode!r}")
    for sid, model in models.items():
        save_model(model, outdir / f"{sid}.gpem")
        if opts.get("text_export", False):
            export_text(model, outdir / f"{sid}.txt")
        saved.append(sid)

    manifest = _manifest("train", opts, [infile], seed=config.seed)
    _finish(manifest, outdir)
    print(f"train: saved models {', '.join(saved)} to {outdir}")
    return 0


def cmd_align(args: argparse.Namespace) -> int:
    opts = Options(args)
    source = load_model(opts.get("source"))
    reference = load_model(opts.get("reference"))
    outdir = _outdir(opts)
    aligned, result = align_models(source, reference, center=opts.get("center", False))
    save_model(aligned, outdir / "aligned.gpem")
    info = {
        "shared_words": len(result.shared_words),
        "residual": result.residual,
        "rank_deficient": result.rank_deficient,
        "orthogonality_defect": float(
            np.abs(result.rotation.T @ result.rotation - np.eye(source.dim)).max()
        ),
    }
    (outdir / "alignment.json").write_text(json.dumps(info, indent=2) + "\n", encoding="utf-8")
    manifest = _manifest("align", opts, [Path(opts.get("source")), Path(opts.get("reference"))],
                         seed=0)
    _finish(manifest, outdir)
    print(f"align: residual {result.residual:.4f} over {len(result.shared_words)} shared words")
    return 0


# -- detect --------------------------------------------------------------------

def _pair_tokens(opts: Options, infile: Path) -> tuple[str, str, list[str], list[str]]:
    pair = opts.get("pair")
    if not pair or ":" not in pair:
        raise ValueError("--pair must be '<slice_a>:<slice_b>'")
    sid_a, sid_b = pair.split(":", 1)
    _, sliced = _load_sliced(opts, infile)
    for sid in (sid_a, sid_b):
        if sid not in sliced.tokens:
            raise ValueError(f"slice {sid!r} not in the slicing")
    return sid_a, sid_b, sliced.tokens[sid_a], sliced.tokens[sid_b]


def cmd_detect(args: argparse.Namespace) -> int:
    opts = Options(args)
    infile = Path(opts.get("input"))
    outdir = _outdir(opts)
    method = opts.get("method", "compass")
    train_config = _train_config(
        opts, architecture_default="cbow" if method.startswith("compass") else "skipgram")
    change_config = _change_config(opts, method)
    sid_a, sid_b, tokens_a, tokens_b = _pair_tokens(opts, infile)

    model_a, model_b = prepare_models(tokens_a, tokens_b, train_config, change_config,
                                      slice_a=sid_a, slice_b=sid_b)
    ranking = rank_changed_words(model_a, model_b, change_config)

    as_similarity = opts.get("similarity", False)
    score_col = "similarity" if as_similarity else "score"
    rows = []
    for rank, word in enumerate(ranking.order, start=1):
        score = ranking.scores[word]
        if as_similarity:
            score = 1.0 - score
        rows.append((rank, word, f"{score:.6f}", model_a.counts.get(word, 0),
                     model_b.counts.get(word, 0)))
    _write_csv(outdir / "ranking.csv", ("rank", "word", score_col, "count_a", "count_b"), rows)

    top_n = opts.get("report_top", 20)
    nk = opts.get("report_neighbors", 10)
    neighbor_rows = []
    for word in ranking.top(top_n):
        for sid, model in ((sid_a, model_a), (sid_b, model_b)):
            try:
                nbrs = nearest_neighbors(model, word, nk)
            except (KeyError, ValueError):
                continue
            neighbor_rows.append((word, sid, ";".join(w for w, _ in nbrs)))
    _write_csv(outdir / "neighbors.csv", ("word", "slice", "neighbors"), neighbor_rows)

    manifest = _manifest("detect", opts, [infile], seed=train_config.seed)
    _finish(manifest, outdir)
    print(f"detect[{method}] {sid_a} vs {sid_b}: top changed: "
          f"{', '.join(ranking.top(min(5, len(ranking.order))))}")
    return 0


# -- stability / track / party-drift -------------------------------------------

def cmd_stability(args: argparse.Namespace) -> int:
    opts = Options(args)
    infile = Path(opts.get("input"))
    outdir = _outdir(opts)
    method = opts.get("method", "compass")
    train_config = _train_config(
        opts, architecture_default="cbow" if method.startswith("compass") else "skipgram")
    change_config = _change_config(opts, method)
    k_list = tuple(int(k) for k in str(opts.get("k", ",".join(map(str, DEFAULT_K_LIST))))
                   .split(",") if k)
    config = StabilityConfig(
        method=method, n_runs=opts.get("runs", 10), k_list=k_list,
        base_seed=opts.get("seed", 0),
        bootstrap_resamples=opts.get("bootstrap_resamples", 10_000),
        confidence=opts.get("confidence", 0.95),
    )
    sid_a, sid_b, tokens_a, tokens_b = _pair_tokens(opts, infile)
    report = run_stability(tokens_a, tokens_b, config, train_config, change_config)

    _write_csv(outdir / "stability.csv", ("method", "k", "mean", "ci_low", "ci_high", "n_pairs"),
               [(report.method, k, f"{m:.6f}", f"{lo:.6f}", f"{hi:.6f}", report.n_pairs)
                for k, m, lo, hi in report.rows()])
    (outdir / "runs.json").write_text(
        json.dumps({"method": report.method, "runs": report.run_rankings}, ensure_ascii=False,
                   indent=2) + "\n", encoding="utf-8")
    manifest = _manifest("stability", opts, [infile], seed=config.base_seed)
    _finish(manifest, outdir)
    print(f"stability[{method}] {sid_a} vs {sid_b}: "
          + ", ".join(f"i@{k}={report.mean[k]:.3f}" for k in report.k_list))
    return 0


def _drift_command(args: argparse.Namespace, kind: str) -> int:
    opts = Options(args)
    infile = Path(opts.get("input"))
    outdir = _outdir(opts)
    if kind == "topic":
        words = [w.strip() for w in Path(opts.get("topics")).read_text(encoding="utf-8")
                 .splitlines() if w.strip() and not w.startswith("#")]
    else:
        spec = opts.get("parties")
        if Path(spec).is_file():
            words = [w.strip() for w in Path(spec).read_text(encoding="utf-8").splitlines()
                     if w.strip() and not w.startswith("#")]
        else:
            words = [w.strip() for w in spec.split(",") if w.strip()]
        words = [w if w.startswith("@") else "@" + w for w in words]
    train_config = _train_config(opts, architecture_default="cbow")
    slicing, sliced = _load_sliced(opts, infile)
    kwargs = dict(
        train_config=train_config, n_seeds=opts.get("seeds", 50),
        base_seed=opts.get("seed", 0),
        resamples=opts.get("bootstrap_resamples", 10_000),
        confidence=opts.get("confidence", 0.95),
    )
    if kind == "topic":
        report = track_topics(words, sliced.tokens, **kwargs)
        name = "topics.csv"
    else:
        report = party_drift(words, sliced.tokens, **kwargs)
        name = "parties.csv"

    _write_csv(outdir / name,
               ("word", "pair", "mean_similarity", "ci_low", "ci_high", "n_seeds"),
               [(e.word, f"{e.pair[0]}:{e.pair[1]}", f"{e.mean_similarity:.6f}",
                 f"{e.ci_low:.6f}", f"{e.ci_high:.6f}", e.n_seeds) for e in report.entries])
    if report.missing:
        (outdir / "missing.json").write_text(
            json.dumps({f"{a}:{b}": words for (a, b), words in report.missing.items()},
                       ensure_ascii=False, indent=2) + "\n", encoding="utf-8")
    if report.neighbor_reports:
        rows = []
        for tag, (pair, by_slice) in report.neighbor_reports.items():
            for sid, nbrs in by_slice.items():
                for rank, (w, sim) in enumerate(nbrs, start=1):
                    rows.append((tag, f"{pair[0]}:{pair[1]}", sid, rank, w, f"{sim:.6f}"))
        _write_csv(outdir / "party_neighbors.csv",
                   ("tag", "pair", "slice", "rank", "word", "similarity"), rows)
    manifest = _manifest(kind if kind == "topic" else "party-drift", opts, [infile],
                         seed=opts.get("seed", 0))
    _finish(manifest, outdir)
    print(f"{kind}: {len(report.entries)} (word, pair) rows written to {outdir / name}")
    return 0


def cmd_track(args: argparse.Namespace) -> int:
    return _drift_command(args, "topic")


def cmd_party_drift(args: argparse.Namespace) -> int:
    return _drift_command(args, "party")


# -- plot ----------------------------------------------------------------------

def _read_report_rows(path: Path) -> list[dict]:
    return list(_rows_file(path))


def cmd_plot(args: argparse.Namespace) -> int:
    opts = Options(args)
    report_path = Path(opts.get("report"))
    kind = opts.get("kind")
    outdir = _outdir(opts)
    rows = _read_report_rows(report_path)

    if kind == "stability":
        by_method: dict[str, list] = {}
        for r in rows:
            by_method.setdefault(r["method"], []).append(
                (r["k"], float(r["mean"]), float(r["ci_low"]), float(r["ci_high"])))
        series = {f"stability_{m}": rs for m, rs in by_method.items()}
    elif kind in ("topic", "party"):
        series = {}
        for r in rows:
            key = f"{kind}_{r['word'].lstrip('@')}"
            series.setdefault(key, []).append(
                (r["pair"], float(r["mean_similarity"]), float(r["ci_low"]),
                 float(r["ci_high"])))
    elif kind == "gender":
        series = {}
        for r in rows:
            series.setdefault(f"gender_{r['party']}", []).append(
                (r["period"], float(r["member_pct"]), float(r["speech_char_pct"])))
    elif kind == "vocab_overlap":
        series = {"vocab_overlap": [
            (r["pair"], float(r["shared_vocabulary"]), float(r["shared_vocabulary"]),
             float(r["shared_vocabulary"])) for r in rows]}
    else:
        raise ValueError(f"unknown plot kind {kind!r}")

    paths = []
    for name, series_rows in series.items():
        path = outdir / f"{name}.csv"
        header = ("period", "member_pct", "speech_char_pct") if kind == "gender" \
            else ("x", "y", "ci_low", "ci_high")
        _write_csv(path, header, series_rows)
        paths.append(path)
    if opts.get("render", False) and kind != "gender":
        render_svg(series, outdir / f"{kind}.svg", title=kind)
    manifest = _manifest("plot", opts, [report_path], seed=0)
    _finish(manifest, outdir)
    print(f"plot: wrote {len(paths)} series files to {outdir}")
    return 0


# -- parser --------------------------------------------------------------------

def build_parser() -> _Parser:
    parser = _Parser(prog="parlashift", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser, output=True):
        p.add_argument("--config", help="key=value config file")
        p.add_argument("--seed", type=int)
        p.add_argument("--workers", type=int)
        p.add_argument("--deterministic", action="store_const", const=True)
        p.add_argument("--delimiter", help="speech-table delimiter (default ',')")
        if output:
            p.add_argument("--output", "-o", help="output directory")

    def training(p: argparse.ArgumentParser):
        p.add_argument("--dim", type=int)
        p.add_argument("--window", type=int)
        p.add_argument("--negative", type=int)
        p.add_argument("--epochs", type=int)
        p.add_argument("--learning-rate", dest="learning_rate", type=float)
        p.add_argument("--min-count", dest="min_count", type=int)
        p.add_argument("--subsample", type=float)
        p.add_argument("--architecture", choices=("skipgram", "cbow"))
        p.add_argument("--compass-frozen", dest="compass_frozen",
                       choices=("target", "context"))

    def slicing(p: argparse.ArgumentParser):
        p.add_argument("--slicing", required=True, help="slicing spec file")
        p.add_argument("--merge-map", dest="merge_map",
                       help="period merges, e.g. '5:7,6:7'")

    def change(p: argparse.ArgumentParser):
        p.add_argument("--neighbor-k", dest="neighbor_k", type=int)
        p.add_argument("--top-freq-cut", dest="top_freq_cut", type=int)
        p.add_argument("--min-freq-cut", dest="min_freq_cut", type=int)
        p.add_argument("--candidate-min-occurrences", dest="candidate_min_occurrences",
                       type=int)

    p = sub.add_parser("ingest", help="parse sitting transcripts into a speech table")
    p.add_argument("--input", "-i", required=True, help="directory of .txt sitting files")
    p.add_argument("--members", required=True)
    p.add_argument("--gov-members", dest="gov_members")
    p.add_argument("--governments")
    p.add_argument("--extra-posts", dest="extra_posts")
    p.add_argument("--case-table", dest="case_table")
    p.add_argument("--nicknames")
    p.add_argument("--patterns")
    common(p)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("stats", help="descriptive statistics, vocabulary overlap, gender")
    p.add_argument("--input", "-i", required=True, help="speech table")
    p.add_argument("--slicing")
    p.add_argument("--merge-map", dest="merge_map")
    p.add_argument("--stopwords")
    common(p)
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("preprocess", help="normalize speech text")
    p.add_argument("--input", "-i", required=True)
    p.add_argument("--stopwords")
    p.add_argument("--party-table", dest="party_table")
    common(p)
    p.set_defaults(func=cmd_preprocess)

    p = sub.add_parser("train", help="train per-slice embedding models")
    p.add_argument("--input", "-i", required=True, help="preprocessed speech table")
    slicing(p)
    p.add_argument("--mode", choices=("compass", "single"))
    p.add_argument("--text-export", dest="text_export", action="store_const", const=True)
    training(p)
    common(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("align", help="orthogonal Procrustes alignment of two models")
    p.add_argument("--source", required=True)
    p.add_argument("--reference", required=True)
    p.add_argument("--center", action="store_const", const=True)
    common(p)
    p.set_defaults(func=cmd_align)

    p = sub.add_parser("detect", help="rank words by usage change for a slice pair")
    p.add_argument("--input", "-i", required=True)
    slicing(p)
    p.add_argument("--pair", required=True, help="'<slice_a>:<slice_b>'")
    p.add_argument("--method", choices=("procrustes", "compass", "compass_cutoff",
                                        "nn", "second_order"))
    p.add_argument("--similarity", action="store_const", const=True,
                   help="emit raw cosine similarity instead of change score")
    p.add_argument("--report-top", dest="report_top", type=int)
    p.add_argument("--report-neighbors", dest="report_neighbors", type=int)
    change(p)
    training(p)
    common(p)
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("stability", help="intersection@k over seeded restarts")
    p.add_argument("--input", "-i", required=True)
    slicing(p)
    p.add_argument("--pair", required=True)
    p.add_argument("--method", choices=("procrustes", "compass", "compass_cutoff",
                                        "nn", "second_order"))
    p.add_argument("--runs", type=int)
    p.add_argument("--k", help="comma-separated k list")
    p.add_argument("--bootstrap-resamples", dest="bootstrap_resamples", type=int)
    p.add_argument("--confidence", type=float)
    change(p)
    training(p)
    common(p)
    p.set_defaults(func=cmd_stability)

    p = sub.add_parser("track", help="topic usage change across consecutive slices")
    p.add_argument("--input", "-i", required=True)
    slicing(p)
    p.add_argument("--topics", required=True, help="file with one topic word per line")
    p.add_argument("--seeds", type=int)
    p.add_argument("--bootstrap-resamples", dest="bootstrap_resamples", type=int)
    p.add_argument("--confidence", type=float)
    training(p)
    common(p)
    p.set_defaults(func=cmd_track)

    p = sub.add_parser("party-drift", help="party-name usage change across slices")
    p.add_argument("--input", "-i", required=True)
    slicing(p)
    p.add_argument("--parties", required=True,
                   help="comma list of party abbreviations or a file")
    p.add_argument("--seeds", type=int)
    p.add_argument("--bootstrap-resamples", dest="bootstrap_resamples", type=int)
    p.add_argument("--confidence", type=float)
    training(p)
    common(p)
    p.set_defaults(func=cmd_party_drift)

    p = sub.add_parser("plot", help="emit per-curve plot data from a report")
    p.add_argument("--report", required=True, help="report CSV produced by another command")
    p.add_argument("--kind", required=True,
                   choices=("stability", "topic", "party", "gender", "vocab_overlap"))
    p.add_argument("--render", action="store_const", const=True,
                   help="also render a simple SVG")
    common(p)
    p.set_defaults(func=cmd_plot)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 1
    try:
        return args.func(args)
    except (OSError, ValueError, KeyError, EvaluationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # internal errors
        traceback.print_exc()
        print(f"internal error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

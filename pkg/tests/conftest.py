from __future__ import annotations

import csv
import datetime as dt
from pathlib import Path

import pytest

from parlashift.detect import ChangeConfig
from parlashift.embed import TrainConfig, train, train_compass
from parlashift.resolve import MemberRow, RegistryIndex, load_nicknames, merge_support_datasets
from parlashift.synthetic import planted_shift_corpus

DATA = Path(__file__).parent / "data"


def pytest_runtest_logreport(report):
    """One visible PASS/FAIL line per acceptance criterion."""
    if report.when != "call" or "test_acceptance" not in report.nodeid:
        return
    name = report.nodeid.split("::")[-1]
    if name.startswith("test_criterion"):
        outcome = "PASS" if report.passed else ("SKIP" if report.skipped else "FAIL")
        print(f"\n[acceptance] {name}: {outcome}", flush=True)

# One TrainConfig per architecture for the shared planted-shift models; small
# enough to keep the suite fast, strong enough that the topical structure is
# clearly learned.
SG_CONFIG = TrainConfig(dim=40, window=4, epochs=6, min_count=1, seed=7,
                        subsample=0.0, learning_rate=0.05, architecture="skipgram")
CBOW_CONFIG = TrainConfig(dim=40, window=4, epochs=6, min_count=1, seed=7,
                          subsample=0.0, learning_rate=0.05, architecture="cbow")

FIXTURE_CHANGE = dict(neighbor_k=25, top_freq_cut=10, min_freq_cut=50,
                      candidate_min_occurrences=50)


def fixture_change_config(method: str) -> ChangeConfig:
    return ChangeConfig(method=method, **FIXTURE_CHANGE)


@pytest.fixture(scope="session")
def planted():
    return planted_shift_corpus(seed=11)


@pytest.fixture(scope="session")
def planted_sg_models(planted):
    """Independent skip-gram models for the two slices (seeds 7 and 8)."""
    from dataclasses import replace

    model_a = train(planted.tokens_a, SG_CONFIG, slice_id="a")
    model_b = train(planted.tokens_b, replace(SG_CONFIG, seed=SG_CONFIG.seed + 1),
                    slice_id="b")
    return model_a, model_b


@pytest.fixture(scope="session")
def planted_compass(planted):
    compass, per_slice = train_compass(
        {"a": planted.tokens_a, "b": planted.tokens_b}, CBOW_CONFIG
    )
    return compass, per_slice


@pytest.fixture(scope="session")
def registry():
    rows = []
    with open(DATA / "registry" / "members.csv", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            rows.append(MemberRow(
                name=row["name"], gender=row["gender"],
                start=dt.date.fromisoformat(row["start_date"]),
                end=dt.date.fromisoformat(row["end_date"]),
                party=row["party"], region=row["region"],
                roles=tuple(r for r in row["roles"].split(";") if r)))
    return merge_support_datasets(rows)


@pytest.fixture(scope="session")
def registry_index(registry):
    return RegistryIndex(registry, load_nicknames(DATA / "registry" / "nicknames.csv"))

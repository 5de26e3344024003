import csv

import pytest

from parlashift.evaluate import DriftReport, DriftStat, StabilityReport
from parlashift.reports import emit_plot_data, render_svg


def stability_report(method="compass"):
    k_list = (10, 20, 50)
    return StabilityReport(
        method=method, k_list=k_list,
        mean={10: 0.8, 20: 0.7, 50: 0.6},
        ci_low={10: 0.75, 20: 0.65, 50: 0.55},
        ci_high={10: 0.85, 20: 0.75, 50: 0.65},
        n_pairs=45,
    )


def drift_report():
    entries = [
        DriftStat("@σπ", ("p1", "p2"), 0.9, 0.85, 0.95, 5),
        DriftStat("@σπ", ("p2", "p3"), 0.5, 0.45, 0.55, 5),
        DriftStat("@κδ", ("p1", "p2"), 0.8, 0.7, 0.9, 5),
    ]
    return DriftReport(entries=entries, missing={}, n_seeds=5)


class TestEmitPlotData:
    def test_stability_one_file_per_method_one_row_per_k(self, tmp_path):
        reports = [stability_report(m) for m in
                   ("procrustes", "compass", "compass_cutoff", "nn", "second_order")]
        paths = emit_plot_data(reports, "stability", tmp_path)
        assert len(paths) == 5
        for path in paths:
            rows = list(csv.reader(path.open()))
            assert rows[0] == ["x", "y", "ci_low", "ci_high"]
            assert len(rows) - 1 == 3

    def test_topic_one_file_per_topic_one_row_per_pair(self, tmp_path):
        paths = emit_plot_data(drift_report(), "topic", tmp_path)
        assert len(paths) == 2
        by_name = {p.name: list(csv.reader(p.open()))[1:] for p in paths}
        assert len(by_name["topic_σπ.csv"]) == 2
        assert len(by_name["topic_κδ.csv"]) == 1

    def test_gender_schema(self, tmp_path):
        cells = {("ΣΠ", "9"): (0.25, 0.1), ("ΣΠ", "10"): (0.5, 0.4)}
        (path,) = emit_plot_data(cells, "gender", tmp_path)
        rows = list(csv.reader(path.open()))
        assert rows[0] == ["period", "member_pct", "speech_char_pct"]
        assert len(rows) - 1 == 2

    def test_vocab_overlap(self, tmp_path):
        (path,) = emit_plot_data([("a:b", 120), ("b:c", 80)], "vocab_overlap", tmp_path)
        rows = list(csv.reader(path.open()))
        assert len(rows) - 1 == 2

    def test_kind_mismatch_rejected(self, tmp_path):
        with pytest.raises(ValueError):
            emit_plot_data(stability_report(), "topic", tmp_path)
        with pytest.raises(ValueError):
            emit_plot_data(drift_report(), "stability", tmp_path)
        with pytest.raises(ValueError):
            emit_plot_data(drift_report(), "unknown-kind", tmp_path)


class TestRenderSvg:
    def test_renders_deterministic_svg(self, tmp_path):
        series = {"curve": [("10", 0.5, 0.4, 0.6), ("20", 0.7, 0.65, 0.75)]}
        p1, p2 = tmp_path / "a.svg", tmp_path / "b.svg"
        render_svg(series, p1, title="t")
        render_svg(series, p2, title="t")
        content = p1.read_text()
        assert content == p2.read_text()
        assert content.startswith("<svg") and "polyline" in content

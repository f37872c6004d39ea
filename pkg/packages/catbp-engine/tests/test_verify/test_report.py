"""Tests for metric rows and study reports."""

import json
import math

import pytest

from catbp_engine.verify.report import COLUMNS, MetricRow, Rule, StudyReport


def _row(metric, value, rule=Rule.RECORD, tolerance=math.nan, stderr=math.nan, param="n=10"):
    return MetricRow("demo", param, metric, value, stderr=stderr, tolerance=tolerance, rule=rule)


@pytest.fixture
def report():
    rows = (
        _row("ks", 0.01, Rule.BELOW, 0.05),
        _row("violations", 0.0, Rule.AT_MOST, 0.0),
        _row("gap", 0.2, Rule.WITHIN_SE, 3.0, stderr=0.1),
        _row("runtime_hint", 12.0),
    )
    return StudyReport("demo", (10,), rows, seed=7, runtime=1.5, settings={"reps": 100}, notes=("ok",))


class TestMetricRow:
    @pytest.mark.parametrize(
        "rule,value,tolerance,expected",
        [
            (Rule.BELOW, 0.04, 0.05, True),
            (Rule.BELOW, 0.05, 0.05, False),
            (Rule.AT_MOST, 0.05, 0.05, True),
            (Rule.ABOVE, 0.05, 0.05, False),
            (Rule.ABOVE, 0.06, 0.05, True),
        ],
    )
    def test_threshold_rules(self, rule, value, tolerance, expected):
        assert _row("m", value, rule, tolerance).verdict is expected

    def test_within_se(self):
        assert _row("m", -0.29, Rule.WITHIN_SE, 3.0, stderr=0.1).verdict is True
        assert _row("m", 0.31, Rule.WITHIN_SE, 3.0, stderr=0.1).verdict is False

    def test_nan_value_fails(self):
        assert _row("m", math.nan, Rule.BELOW, 0.05).verdict is False

    def test_record_has_no_verdict(self):
        assert _row("m", 1.0).verdict is None

    def test_as_dict_follows_columns(self):
        assert tuple(_row("m", 1.0).as_dict()) == COLUMNS


class TestStudyReport:
    def test_passed_ignores_record_rows(self, report):
        assert report.passed
        assert report.verdicts == [True, True, True]
        assert report.failures == []

    def test_failures(self, report):
        failing = StudyReport("demo", (10,), report.rows + (_row("ks2", 0.2, Rule.BELOW, 0.05),), seed=7)
        assert not failing.passed
        assert [row.metric for row in failing.failures] == ["ks2"]

    def test_metric_lookup(self, report):
        assert report.metric("gap").value == 0.2
        assert report.metric("ks", "n=10").rule is Rule.BELOW
        with pytest.raises(KeyError):
            report.metric("ks", "n=20")

    def test_json_round_trip(self, report):
        document = json.loads(json.dumps(report.to_json()))
        assert document["passed"] is True
        assert document["rows"][3]["stderr"] is None
        rebuilt = StudyReport.from_json(document)
        assert rebuilt.to_json() == report.to_json()

    def test_from_json_recomputes_verdicts(self, report):
        document = report.to_json()
        document["rows"][0]["value"] = 0.9
        document["rows"][0]["verdict"] = True
        assert not StudyReport.from_json(document).passed

    def test_frame(self, report):
        frame = report.to_frame()
        assert list(frame.columns) == list(COLUMNS)
        assert len(frame) == 4
        assert frame["rule"].tolist() == ["below", "at_most", "within_se", "record"]

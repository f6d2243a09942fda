"""Tests for result documents and reporters."""
import io
import json

import pandas as pd
import pytest

from spin_parity.cli import run_command
from spin_parity.document import ResultDocument
from spin_parity.montecarlo import run_exact, run_trials
from spin_parity.reporters import get_reporter
from spin_parity.scenario import ScenarioConfig, parse_scenario


@pytest.fixture
def sampled_document():
    scenario = ScenarioConfig(protocol="ghz3", m=2, trials=400, seed=21)
    return ResultDocument(scenario=scenario, stats=run_trials(scenario, scenario.trials, scenario.seed))


@pytest.fixture
def exact_document():
    scenario = ScenarioConfig(protocol="ghz_n", n=8, strategy="pair_merge", trials=0)
    return ResultDocument(scenario=scenario, exact=run_exact(scenario))


@pytest.fixture
def table1_document():
    return run_command(ScenarioConfig(protocol="table1", trials=0))


class TestResultDocument:

    def test_needs_exactly_one_result(self):
        with pytest.raises(ValueError):
            ResultDocument(scenario=ScenarioConfig(protocol="ghz3"))

    def test_modes(self, sampled_document, exact_document):
        assert sampled_document.mode == "sampled"
        assert exact_document.mode == "exact"

    def test_scenario_text_reproduces_scenario(self, sampled_document):
        assert parse_scenario(sampled_document.scenario_text) == sampled_document.scenario

    def test_outcome_rows_sorted(self, sampled_document):
        outcomes = [row["outcome"] for row in sampled_document.outcome_rows()]
        assert outcomes == sorted(outcomes)

    def test_table_rows(self, table1_document):
        assert table1_document.table_rows() == [
            {"readout": "D(t)", "Ψ+": "01", "Ψ−": "01", "Φ+": "10", "Φ−": "10"},
            {"readout": "D(2t)", "Ψ+": "01", "Ψ−": "10", "Φ+": "10", "Φ−": "01"},
        ]


class TestJsonReporter:

    def test_document_fields(self, exact_document):
        data = json.loads(get_reporter("json").render(exact_document))
        assert data["mode"] == "exact"
        assert data["scenario"]["n"] == 8
        assert data["summary"]["success_probability"] == pytest.approx(0.125)
        assert {row["outcome"] for row in data["outcomes"]} == {"success", "failure"}

    def test_detector_table(self, table1_document):
        data = json.loads(get_reporter("json").render(table1_document))
        assert data["detector_table"]["PsiMinus"] == ["01", "10"]

    def test_same_document_same_bytes(self, sampled_document):
        reporter = get_reporter("json")
        assert reporter.render(sampled_document) == reporter.render(sampled_document)


class TestCsvReporter:

    def test_sampled_columns(self, sampled_document):
        frame = pd.read_csv(io.StringIO(get_reporter("csv").render(sampled_document)))
        assert list(frame.columns) == ["outcome", "count", "frequency", "ci_low", "ci_high"]
        assert frame["count"].sum() == 400

    def test_exact_columns(self, exact_document):
        lines = get_reporter("csv").render(exact_document).splitlines()
        assert lines[0] == "outcome,probability"
        assert "success,0.125" in lines

    def test_detector_table_appended(self, table1_document):
        content = get_reporter("csv").render(table1_document)
        assert "readout,Ψ+,Ψ−,Φ+,Φ−\nD(t),01,01,10,10\nD(2t),01,10,10,01\n" in content


class TestTextReporter:

    def test_banner_and_scenario(self, sampled_document):
        text = get_reporter("text").render(sampled_document)
        assert text.startswith("=" * 60)
        assert "protocol=ghz3" in text
        assert "seed: 21" in text
        assert "success_rate:" in text

    def test_detector_table(self, table1_document):
        text = get_reporter("text").render(table1_document)
        assert "01    01    10    10" in text
        assert "01    10    10    01" in text

    def test_missing_values_render_as_dash(self):
        scenario = ScenarioConfig(protocol="bell_gen", input="up_up", trials=0)
        text = get_reporter("text").render(ResultDocument(scenario=scenario, exact=run_exact(scenario)))
        assert "success_probability: -" in text


class TestGetReporter:

    def test_unknown_format(self):
        with pytest.raises(ValueError):
            get_reporter("xml")

    def test_generate_writes_file(self, tmp_path, exact_document):
        path = tmp_path / "out" / "result.json"
        content = get_reporter("json").generate(exact_document, path)
        assert path.read_text(encoding="utf-8") == content

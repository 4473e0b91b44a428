"""Headless runner: metrics accounting, determinism, paired compensation
runs, and report/log persistence."""

import json
import math

import pytest

from cobotsim.errors import DivergenceError
from cobotsim.runner import (
    MetricsReport,
    export_csv,
    export_json,
    load_log,
    load_report,
    run_paired,
    run_scenario,
    save_log,
)
from cobotsim.scenario import parse_scenario
from cobotsim.session import LatencyModel, replay

from tests.test_scenario import fixture_doc


@pytest.fixture(scope="module")
def carpenter():
    return parse_scenario(fixture_doc("carpenter.json"))


@pytest.fixture(scope="module")
def minimal():
    return parse_scenario(fixture_doc("minimal.json"))


@pytest.fixture(scope="module")
def carpenter_result(carpenter):
    return run_scenario(carpenter)


def test_zero_event_scenario_has_zero_effort_and_commands(minimal):
    result = run_scenario(minimal)
    report = result.report
    assert report.effort_integral == 0.0
    assert report.command_log == ()
    assert report.modes() == ("autonomy",)
    assert report.manual_grasped_path == 0.0
    assert report.effort_per_meter is None
    assert report.ticks == 100


def test_same_seed_gives_bitwise_equal_reports(carpenter, carpenter_result):
    again = run_scenario(carpenter)
    assert again.report == carpenter_result.report
    assert again.log_records == carpenter_result.log_records


def test_carpenter_mode_sequence(carpenter_result):
    assert carpenter_result.report.modes() == ("autonomy", "blended", "manual")


def test_carpenter_effort_matches_closed_form(carpenter_result):
    # wrench (2, -0.5) is active for exactly 3 s of the manual phase
    per_tick = math.hypot(2.0, -0.5)
    assert carpenter_result.report.manual_grasped_effort == pytest.approx(
        per_tick * 3.0, rel=1e-12
    )


def test_paired_compensation_lowers_effort_per_meter(carpenter):
    with_comp, without = run_paired(carpenter)
    assert with_comp.report.manual_grasped_path == without.report.manual_grasped_path
    assert with_comp.report.tracking_rms == without.report.tracking_rms
    assert with_comp.report.effort_per_meter < without.report.effort_per_meter
    # supporting a 5 kg beam dominates the guidance force
    assert without.report.effort_per_meter / with_comp.report.effort_per_meter > 10


def test_compensation_flag_only_changes_effort_accounting(carpenter):
    with_comp, without = run_paired(carpenter)
    assert with_comp.report.final_hash == without.report.final_hash
    assert with_comp.report.comp_torque_integral > 0.0
    assert without.report.comp_torque_integral == 0.0


def test_latency_keeps_mode_sequence(carpenter):
    result = run_scenario(
        carpenter, latency=LatencyModel(base_ms=50.0, jitter_ms=10.0, seed=7)
    )
    assert result.report.modes() == ("autonomy", "blended", "manual")
    assert result.report != run_scenario(carpenter).report  # shifted apply ticks


def test_command_log_records_acks(carpenter_result):
    kinds = {entry["kind"] for entry in carpenter_result.report.command_log}
    assert "ack" in kinds
    notes = [e.get("note", "") for e in carpenter_result.report.command_log]
    assert any(n.startswith("grasped=") for n in notes)


def test_report_json_round_trip(tmp_path, carpenter_result):
    path = tmp_path / "report.json"
    export_json(carpenter_result.report, path)
    assert load_report(path) == carpenter_result.report


def test_report_dict_round_trip(carpenter_result):
    doc = json.loads(json.dumps(carpenter_result.report.to_dict()))
    assert MetricsReport.from_dict(doc) == carpenter_result.report


def test_csv_rows_equal_timeline_plus_header(tmp_path, carpenter_result):
    path = tmp_path / "report.csv"
    export_csv(carpenter_result.report, path)
    rows = path.read_text().strip().splitlines()
    assert len(rows) == len(carpenter_result.report.mode_timeline) + 1
    assert rows[0] == "t,mode"
    assert rows[1].endswith("autonomy")


def test_log_round_trip_and_replay(tmp_path, carpenter, carpenter_result):
    path = tmp_path / "log.ndjson"
    save_log(path, carpenter_result.log_records, carpenter)
    records = load_log(path)
    assert records == carpenter_result.log_records
    hashes = replay(records, carpenter)
    assert hashes[-1] == carpenter_result.report.final_hash


def test_replay_detects_wrong_scenario(tmp_path, carpenter, carpenter_result, minimal):
    with pytest.raises(DivergenceError):
        replay(carpenter_result.log_records, minimal)


def test_report_rejects_non_finite_metrics(carpenter_result):
    doc = carpenter_result.report.to_dict()
    doc["tracking_rms"] = math.inf
    with pytest.raises(ValueError):
        MetricsReport.from_dict(doc)


def test_mode_timeline_matches_session_history(carpenter, carpenter_result):
    assert carpenter_result.report.mode_timeline == tuple(
        carpenter_result.session.mode_timeline
    )

"""Exit-code and report contracts, exercised by invoking the binary."""

import json
import subprocess
import sys

import pytest

from locckit.locc import protocol_structural_difference, verify_distinguishing
from locckit.scenario import load_scenario

CLI = [sys.executable, "-m", "locckit.cli"]


def run_cli(*args):
    return subprocess.run(CLI + list(args), capture_output=True, text=True)


def machine(result):
    return json.loads(result.stdout)


def test_verify_pass_exit_zero():
    result = run_cli("verify", "--scenario", "computational_2x2",
                     "--protocol", "product_distinguisher", "--report", "machine")
    assert result.returncode == 0
    report = machine(result)
    assert report["verdict"] == "PASS"
    assert report["details"]["max_deviation"] < 1e-9
    assert set(report["per_label"]) == {"00", "01", "10", "11"}


def test_verify_fail_exit_one():
    result = run_cli("verify", "--scenario", "bell_basis",
                     "--protocol", "zz_measure", "--report", "machine")
    assert result.returncode == 1
    assert machine(result)["verdict"] == "FAIL"


def test_verify_unknown_protocol_exit_two():
    result = run_cli("verify", "--scenario", "bell_basis", "--protocol", "nope")
    assert result.returncode == 2
    assert "nope" in result.stderr


def test_usage_error_exit_two():
    result = run_cli("verify", "--scenario", "bell_basis")  # missing --protocol
    assert result.returncode == 2


def test_missing_scenario_exit_two():
    result = run_cli("check-family", "--scenario", "no_such_file.json")
    assert result.returncode == 2
    assert "bundled" in result.stderr


def test_reverse_round_trip(tmp_path):
    first = tmp_path / "reversed.json"
    second = tmp_path / "double.json"
    result = run_cli("reverse", "--scenario", "computational_2x2",
                     "--protocol", "product_distinguisher",
                     "--out", str(first), "--report", "machine")
    assert result.returncode == 0
    report = machine(result)
    assert report["details"]["original_unital"] is True
    assert report["details"]["reversed_normalised"] is True
    result2 = run_cli("reverse", "--scenario", str(first),
                      "--protocol", "product_distinguisher", "--out", str(second))
    assert result2.returncode == 0
    original = load_scenario("computational_2x2").protocols["product_distinguisher"]
    doubled = load_scenario(str(second)).protocols["product_distinguisher"]
    assert protocol_structural_difference(original, doubled) <= 1e-12
    assert verify_distinguishing(
        doubled, load_scenario("computational_2x2").family).passed


def test_reverse_reports_duality_flags():
    result = run_cli("reverse", "--scenario", "bell_basis",
                     "--protocol", "zz_measure", "--report", "machine")
    assert result.returncode == 0
    details = machine(result)["details"]
    assert details["original_normalised"] is True
    assert details["reversed_unital"] is True


def test_refute_bell_exit_zero():
    result = run_cli("refute", "--scenario", "bell_basis", "--suite", "6",
                     "--seed", "7", "--report", "machine")
    assert result.returncode == 0
    report = machine(result)
    assert report["verdict"] == "PASS"
    assert report["details"]["passing_candidates"] == []
    assert report["details"]["max_projective_optimal_success"] == pytest.approx(
        0.5, abs=1e-6)
    assert report["details"]["max_success"] <= 1 - 1e-6


def test_refute_not_applicable_on_product_family():
    result = run_cli("refute", "--scenario", "computational_2x2",
                     "--suite", "2", "--report", "machine")
    assert result.returncode == 0
    assert machine(result)["verdict"] == "NOT_APPLICABLE"


def test_refute_is_deterministic():
    args = ("refute", "--scenario", "four_state_basis", "--suite", "4",
            "--seed", "11", "--report", "machine")
    first, second = machine(run_cli(*args)), machine(run_cli(*args))
    first.pop("wall_time_s")
    second.pop("wall_time_s")
    assert json.dumps(first, sort_keys=True) == json.dumps(second, sort_keys=True)


def test_distinguish_computational(tmp_path):
    out = tmp_path / "distinguisher.json"
    result = run_cli("distinguish", "--scenario", "computational_2x2",
                     "--out", str(out), "--report", "machine")
    assert result.returncode == 0
    report = machine(result)
    assert report["verdict"] == "CONSISTENT_DISTINGUISHES"
    assert report["details"]["unital"] is True
    written = load_scenario(str(out))
    assert "product_distinguisher" in written.protocols


def test_distinguish_bell_contradicts_hypothesis():
    result = run_cli("distinguish", "--scenario", "bell_basis", "--report", "machine")
    assert result.returncode == 1
    report = machine(result)
    assert report["verdict"] == "CONTRADICTION_HYPOTHESIS"
    assert set(report["details"]["entangled_labels"]) == {
        "phi_plus", "phi_minus", "psi_plus", "psi_minus"}
    ranks = report["details"]["sequential_cut_ranks"]
    assert all(r == [2] for r in ranks.values())


def test_distinguish_domino_converse():
    result = run_cli("distinguish", "--scenario", "domino_basis",
                     "--report", "machine")
    assert result.returncode == 0
    report = machine(result)
    assert report["verdict"] == "CONSISTENT_DISTINGUISHES"
    assert report["details"]["max_deviation"] < 1e-9
    assert report["details"]["unital"] is True


def test_check_family_exit_codes():
    good = run_cli("check-family", "--scenario", "four_state_basis",
                   "--report", "machine")
    assert good.returncode == 0
    report = machine(good)
    assert report["verdict"] == "PASS"
    assert set(report["details"]["entangled_labels"]) == {"+", "-"}

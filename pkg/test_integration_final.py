"""
End-to-end tests of the command line through click's CliRunner.
"""
import csv
import io
import json
from pathlib import Path

import pytest
from click.testing import CliRunner

from app import cli
from errors import INFEASIBLE_MESSAGE
from soc_format import load_soc

FIXTURES = Path(__file__).parent / "fixtures"
D695 = str(FIXTURES / "d695.soc")
BENCH_K = [28, 24, 22, 20, 18, 16, 14, 14, 12, 12, 12]

PAIR_SOC = """Soc pair
Module A
  Inputs 2
  Outputs 2
  ScanChains 3 : 8 6 4
  Patterns 10
Module B
  ScanChains 2 : 5 5
  Patterns 8
"""


@pytest.fixture
def runner():
    """
    CliRunner fixture for invoking the command line in-process.

    Returns:
        click.testing.CliRunner
    """
    return CliRunner()


@pytest.fixture
def pair_soc(tmp_path):
    path = tmp_path / "pair.soc"
    path.write_text(PAIR_SOC)
    return str(path)


def run_json(runner, args):
    result = runner.invoke(cli, args + ["--format", "json"])
    assert result.exit_code == 0, result.output
    return json.loads(result.output)


def read_csv(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_optimize_d695_step1_matches_benchmark(runner):
    """
    Test the Step-1 section of an optimize report on d695 at 64K with broadcast.

    Validates:
    - k within 2 channels of the published 22
    - n_max = floor(512 / k) - 1
    - the best plan is the maximum of the per-n curve
    """
    report = run_json(runner, ["optimize", D695, "--channels", "256", "--depth", "64K", "--broadcast"])
    step1 = report["step1"]
    assert abs(step1["k"] - 22) <= 2
    assert step1["w"] == step1["k"] // 2
    assert report["n_max"] == 512 // step1["k"] - 1
    assert 1 <= report["n_opt"] <= report["n_max"]
    assert report["best"]["D_th"] == max(row["D_th"] for row in report["curve"])
    assert [row["n"] for row in report["curve"]] == list(range(report["n_max"], 0, -1))
    assert report["tool"] == "siteopt"


def test_optimize_text_report(runner):
    result = runner.invoke(cli, ["optimize", D695, "--channels", "256", "--depth", "64K"])
    assert result.exit_code == 0, result.output
    assert "Step 1: k=" in result.output
    assert "Step 2: n_opt=" in result.output
    assert "s38584" in result.output


def test_json_and_csv_carry_identical_numbers(runner):
    args = ["optimize", D695, "--channels", "256", "--depth", "96K", "--pc", "0.9995", "--pm", "0.9",
            "--abort-on-fail"]
    report = run_json(runner, args)
    result = runner.invoke(cli, args + ["--format", "csv"])
    assert result.exit_code == 0, result.output
    rows = read_csv(result.output)
    assert len(rows) == len(report["curve"])
    for row, plan in zip(rows, report["curve"]):
        assert int(row["n"]) == plan["n"]
        assert int(row["k"]) == plan["k"]
        assert float(row["D_th"]) == plan["D_th"]
        assert float(row["t_a"]) == plan["t_a"]
        assert float(row["P_c"]) == plan["P_c"]


def test_reruns_are_byte_identical(runner):
    args = ["bench-table", D695, "--format", "csv"]
    first = runner.invoke(cli, args)
    second = runner.invoke(cli, args)
    assert first.exit_code == 0
    assert first.output == second.output


def test_bench_table_against_reference(runner):
    """
    Test the d695 benchmark table over the eleven depths 48K..128K.

    Validates:
    - every k within 2 channels of the reference
    - n_max = floor(512 / k) - 1 on every row
    - n_max equals the reference whenever k does
    """
    report = run_json(runner, ["bench-table", D695, "--expected", str(FIXTURES / "d695_table1.csv")])
    rows = report["rows"]
    assert [row["k_ref"] for row in rows] == BENCH_K
    for row in rows:
        assert row["k"] is not None
        assert abs(row["dk"]) <= 2
        assert row["n_max"] == 512 // row["k"] - 1
        if row["dk"] == 0:
            assert row["n_max"] == row["n_max_ref"]
    last = rows[-1]
    assert last["depth"] == 128 * 1024
    if last["k"] == 12:
        assert last["n_max"] == 41
    assert report["summary"]["compared"] == 11


def test_bench_table_decimal_depths(runner):
    report = run_json(runner, ["bench-table", D695, "--depths", "48K,128K", "--base", "1000"])
    assert [row["depth"] for row in report["rows"]] == [48000, 128000]
    assert report["base"] == 1000


def test_bench_table_empty_depth_list(runner):
    result = runner.invoke(cli, ["bench-table", D695, "--depths", ""])
    assert result.exit_code == 2
    assert "empty depth list" in result.output


def test_sweep_channels_doubles_throughput(runner):
    result = runner.invoke(cli, ["sweep", D695, "--sweep", "channels:256:512:256", "--depth", "128K"])
    assert result.exit_code == 0, result.output
    rows = read_csv(result.output)
    assert [int(row["value"]) for row in rows] == [256, 512]
    low, high = (float(row["D_th"]) for row in rows)
    assert high >= 2 * low * (1 - 1e-12)


def test_sweep_pm_effective_test_time(runner):
    """With abort-on-fail the effective test time at five sites never drops as p_m grows."""
    result = runner.invoke(cli, ["sweep", D695, "--sweep", "p_m:0.5:1.0:0.1", "--abort-on-fail",
                                 "--channels", "256", "--depth", "128K"])
    assert result.exit_code == 0, result.output
    rows = read_csv(result.output)
    assert len(rows) == 6
    column = [float(row["t_m_eff_n5"]) for row in rows]
    assert column == sorted(column)


def test_sweep_sites_json(runner):
    report = run_json(runner, ["sweep", D695, "--sweep", "sites:1:3:1", "--channels", "256", "--depth", "128K"])
    assert [row["n"] for row in report["rows"]] == [1, 2, 3]
    assert all(row["feasible"] for row in report["rows"])


def test_sweep_step_zero_is_input_error(runner):
    result = runner.invoke(cli, ["sweep", D695, "--sweep", "channels:256:512:0"])
    assert result.exit_code == 2


def test_sweep_unknown_parameter(runner):
    result = runner.invoke(cli, ["sweep", D695, "--sweep", "voltage:1:2:1"])
    assert result.exit_code == 2
    assert "unknown sweep parameter" in result.output


def test_unreadable_file(runner, tmp_path):
    result = runner.invoke(cli, ["optimize", str(tmp_path / "missing.soc")])
    assert result.exit_code == 2
    assert "error:" in result.output


def test_binary_file_is_input_error(runner, tmp_path):
    path = tmp_path / "bin.soc"
    path.write_bytes(b"\xff\xfe\x00bad")
    result = runner.invoke(cli, ["optimize", str(path)])
    assert result.exit_code == 2
    assert "not a UTF-8 text file" in result.output


def test_single_module_too_wide(runner, tmp_path):
    path = tmp_path / "flat.soc"
    path.write_text("Soc flat\nModule core\n  Inputs 40\n  ScanChains 1 : 5000\n  Patterns 900\n")
    result = runner.invoke(cli, ["optimize", str(path), "--channels", "8", "--depth", "64K"])
    assert result.exit_code == 1
    assert INFEASIBLE_MESSAGE in result.output


def test_validate_command(runner, tmp_path):
    result = runner.invoke(cli, ["validate", D695, "--channels", "256", "--depth", "64K"])
    assert result.exit_code == 0, result.output
    assert "feasible" in result.output
    path = tmp_path / "flat.soc"
    path.write_text("Soc flat\nModule core\n  ScanChains 1 : 5000\n  Patterns 900\n")
    result = runner.invoke(cli, ["validate", str(path), "--depth", "64K"])
    assert result.exit_code == 1
    assert "cannot be tested: core" in result.output


def test_oracle_cross_check(runner, pair_soc):
    report = run_json(runner, ["optimize", pair_soc, "--channels", "8", "--depth", "150", "--oracle"])
    assert (report["step1"]["k"], report["step1"]["T"]) == (6, 120)
    assert (report["oracle"]["k"], report["oracle"]["T"]) == (6, 120)


def test_oracle_refuses_large_instances(runner):
    result = runner.invoke(cli, ["optimize", D695, "--channels", "256", "--depth", "64K", "--oracle"])
    assert result.exit_code == 2
    assert "modules >" in result.output


def test_compare_upgrades_zero_budget(runner):
    report = run_json(runner, ["compare-upgrades", D695, "--channels", "256", "--depth", "64K", "--budget", "0"])
    gains = {row["scenario"]: row["gain"] for row in report["scenarios"]}
    assert gains == {"baseline": 0.0, "channels": 0.0, "memory": 0.0}
    assert report["preferred"] == "baseline"


def test_compare_upgrades_defaults(runner):
    """
    Test the upgrade comparison on d695 at N=256, V=64K with the default prices.

    Validates:
    - the budget defaults to the full memory upgrade (16 blocks at 1500)
    - the recorded verdict: doubling the memory beats three extra channel blocks
    """
    report = run_json(runner, ["compare-upgrades", D695, "--channels", "256", "--depth", "64K"])
    assert report["budget"] == 16 * 1500.0
    assert report["preferred"] == "memory"
    scenarios = {row["scenario"]: row for row in report["scenarios"]}
    assert list(scenarios) == ["baseline", "channels", "memory"]
    assert (scenarios["baseline"]["n_opt"], scenarios["baseline"]["k"]) == (11, 22)
    assert scenarios["baseline"]["throughput"] == pytest.approx(54785.9, abs=0.1)
    assert scenarios["channels"]["n_opt"] == 13
    assert scenarios["channels"]["throughput"] == pytest.approx(64746.9, abs=0.1)
    assert (scenarios["memory"]["n_opt"], scenarios["memory"]["k"]) == (21, 12)
    assert scenarios["memory"]["throughput"] == pytest.approx(102831.8, abs=0.1)
    assert scenarios["memory"]["depth"] == 2 * 64 * 1024
    assert scenarios["memory"]["throughput"] == report["full_memory_throughput"]
    assert [row["preferred"] for row in report["scenarios"]] == [False, False, True]


def test_compare_upgrades_equal_costs_flags_dominant_scenario(runner):
    """With one price for both upgrades the scenario with the higher throughput is the preferred one."""
    report = run_json(runner, ["compare-upgrades", D695, "--channels", "256", "--depth", "64K",
                               "--channel-block-cost", "1500", "--memory-upgrade-cost", "1500"])
    scenarios = {row["scenario"]: row for row in report["scenarios"]}
    channels, memory = scenarios["channels"], scenarios["memory"]
    assert channels["spent"] == memory["spent"] == 24000.0
    assert channels["throughput"] != memory["throughput"]
    winner = max((channels, memory), key=lambda row: row["throughput"])
    assert winner["gain"] > 0
    assert report["preferred"] == winner["scenario"]
    assert [row["scenario"] for row in report["scenarios"] if row["preferred"]] == [winner["scenario"]]


def test_compare_upgrades_respects_site_cap(runner):
    args = ["--channels", "256", "--depth", "64K", "--max-sites", "2"]
    optimized = run_json(runner, ["optimize", D695] + args)
    report = run_json(runner, ["compare-upgrades", D695] + args)
    assert all(row["n_opt"] <= 2 for row in report["scenarios"])
    assert report["scenarios"][0]["n_opt"] == optimized["n_opt"]


def test_compare_upgrades_negative_budget(runner):
    result = runner.invoke(cli, ["compare-upgrades", D695, "--budget=-5"])
    assert result.exit_code == 2


def test_convert_itc02(runner, tmp_path):
    target = tmp_path / "d695.soc"
    result = runner.invoke(cli, ["convert-itc02", str(FIXTURES / "d695.itc02"), "-o", str(target)])
    assert result.exit_code == 0, result.output
    converted = load_soc(target)
    native = load_soc(D695)
    assert [m.test_bits for m in converted.modules] == [m.test_bits for m in native.modules]


def test_bad_depth_option(runner):
    result = runner.invoke(cli, ["optimize", D695, "--depth", "lots"])
    assert result.exit_code == 2
    assert "invalid depth" in result.output

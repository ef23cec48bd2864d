"""test_app.py"""

# pylint: disable=all

import json
from pathlib import Path

import pytest
from click.testing import CliRunner

from app import EXIT_FAIL, EXIT_INCONCLUSIVE, EXIT_PASS, EXIT_USAGE, cli

TEST_FIXTURE_DIR = Path(__file__).resolve().parent / "fixtures"
REPO_FIXTURE_DIR = Path(__file__).resolve().parent.parent.parent / "fixtures"

ALL_PASS = str(TEST_FIXTURE_DIR / "all_pass.fix")


@pytest.fixture
def runner():
    return CliRunner(mix_stderr=False)


def test_verify_pass(runner):
    result = runner.invoke(cli, ["verify", "--fixture", ALL_PASS])
    assert result.exit_code == EXIT_PASS
    assert "fixture: all_pass" in result.stdout
    assert "PASS  free-Sx" in result.stdout
    assert "3 checks, exit code 0" in result.stdout


@pytest.mark.parametrize(
    "name, code",
    [("expected_fail", EXIT_FAIL), ("inconclusive", EXIT_INCONCLUSIVE), ("malformed", EXIT_USAGE)],
)
def test_verify_exit_codes(runner, name, code):
    result = runner.invoke(cli, ["verify", "--fixture", str(TEST_FIXTURE_DIR / f"{name}.fix")])
    assert result.exit_code == code


def test_verify_reports_unexpected(runner):
    result = runner.invoke(cli, ["verify", "--fixture", ALL_PASS, "--check", "free-Sx"])
    assert result.exit_code == EXIT_PASS
    assert "not as expected" not in result.stderr
    result = runner.invoke(
        cli, ["verify", "--fixture", str(TEST_FIXTURE_DIR / "inconclusive.fix")]
    )
    assert "not as expected" not in result.stderr


def test_verify_unknown_check(runner):
    result = runner.invoke(cli, ["verify", "--fixture", ALL_PASS, "--check", "nope"])
    assert result.exit_code == EXIT_USAGE
    assert "error:" in result.stderr


def test_verify_json_is_stable(runner):
    first = runner.invoke(cli, ["verify", "--fixture", ALL_PASS, "--json"])
    second = runner.invoke(cli, ["verify", "--fixture", ALL_PASS, "--json"])
    assert first.stdout == second.stdout
    data = json.loads(first.stdout)
    assert [c["id"] for c in data["checks"]] == ["free-Sx", "resolution-Sx", "supp-Sx"]


def test_verify_out_and_baseline(runner, tmp_path):
    out = tmp_path / "report.json"
    result = runner.invoke(cli, ["verify", "--fixture", ALL_PASS, "--out", str(out)])
    assert result.exit_code == EXIT_PASS
    assert out.exists()
    assert out.with_suffix(".sha256").exists()

    result = runner.invoke(cli, ["verify", "--fixture", ALL_PASS, "--baseline", str(out)])
    assert result.exit_code == EXIT_PASS

    partial = tmp_path / "partial.json"
    runner.invoke(cli, ["verify", "--fixture", ALL_PASS, "--check", "free-Sx", "--out", str(partial)])
    result = runner.invoke(cli, ["verify", "--fixture", ALL_PASS, "--baseline", str(partial)])
    assert result.exit_code == EXIT_FAIL
    assert "differs from baseline" in result.stderr


def test_compute(runner):
    result = runner.invoke(
        cli, ["compute", "--fixture", ALL_PASS, "--module", "Sx", "--locus", "free"]
    )
    assert result.exit_code == EXIT_PASS
    assert result.stdout.startswith("Open")
    assert "mode: closed-form" in result.stdout


def test_compute_json(runner):
    result = runner.invoke(
        cli, ["compute", "--fixture", ALL_PASS, "--module", "Sx", "--locus", "supp", "--json"]
    )
    data = json.loads(result.stdout)
    assert data["form"] == "closed"
    assert data["complement_ideal"] == ["x"]
    assert data["module"] == "Sx"


def test_compute_pointwise(runner):
    result = runner.invoke(
        cli,
        ["compute", "--fixture", ALL_PASS, "--module", "Sx", "--locus", "free", "--pointwise"],
    )
    assert result.exit_code == EXIT_PASS
    assert "PointwiseOnly" in result.stdout
    assert "  m: false" in result.stdout
    assert "  py: true" in result.stdout


@pytest.mark.parametrize("locus", ["sn", "depth", "free:2"])
def test_compute_bad_locus(runner, locus):
    result = runner.invoke(cli, ["compute", "--fixture", ALL_PASS, "--locus", locus])
    assert result.exit_code == EXIT_USAGE
    assert "error:" in result.stderr


def test_member(runner):
    args = ["member", "--fixture", ALL_PASS, "--module", "Sx", "--locus", "free"]
    result = runner.invoke(cli, args + ["--prime", "py"])
    assert result.exit_code == EXIT_PASS
    assert result.stdout.strip() == "true"
    result = runner.invoke(cli, args + ["--prime", "px"])
    assert result.stdout.strip() == "false"


def test_member_unknown_prime(runner):
    result = runner.invoke(
        cli, ["member", "--fixture", ALL_PASS, "--locus", "supp", "--prime", "q"]
    )
    assert result.exit_code == EXIT_USAGE


def test_profile(runner):
    result = runner.invoke(
        cli, ["profile", "--fixture", ALL_PASS, "--module", "Sx", "--prime", "m"]
    )
    assert result.exit_code == EXIT_PASS
    assert result.stdout.startswith("Sx at m")
    assert "pd M_p      : 1" in result.stdout

    result = runner.invoke(
        cli, ["profile", "--fixture", ALL_PASS, "--module", "Sx", "--prime", "py", "--json"]
    )
    data = json.loads(result.stdout)
    assert data["pd_local"] == "-inf"
    assert data["depth_local"] == "inf"


def test_resolve(runner):
    result = runner.invoke(cli, ["resolve", "--fixture", ALL_PASS, "--module", "Sx"])
    assert result.exit_code == EXIT_PASS
    assert "ranks 1 <- 1" in result.stdout
    assert "d1:" in result.stdout
    assert "  [x]" in result.stdout


def test_resolve_shipped_koszul(runner):
    result = runner.invoke(
        cli, ["resolve", "--fixture", str(REPO_FIXTURE_DIR / "koszul.fix"), "--module", "K"]
    )
    assert result.exit_code == EXIT_PASS
    assert "ranks 1 <- 2 <- 1" in result.stdout


def test_usage_errors_exit_3(runner):
    assert runner.invoke(cli, ["verify"]).exit_code == EXIT_USAGE
    assert runner.invoke(cli, ["verify", "--fixture", "no/such.fix"]).exit_code == EXIT_USAGE
    assert runner.invoke(cli, ["frobnicate"]).exit_code == EXIT_USAGE


def test_version(runner):
    result = runner.invoke(cli, ["--version"])
    assert result.exit_code == EXIT_PASS

"""test_verify.py"""

# pylint: disable=all

from pathlib import Path

import pytest

import config
from models import json_utils, verify
from models.modres import prune_presentation
from models.schemas import CheckBlock, CheckResult, VerifyReport
from models.verify import (
    SamplePoset,
    check_topological_nagata,
    filtration_factors,
    run_checks,
)

REPO_FIXTURE_DIR = Path(__file__).resolve().parent.parent.parent / "fixtures"
SHIPPED = sorted(p.stem for p in REPO_FIXTURE_DIR.glob("*.fix"))


@pytest.mark.parametrize("name", SHIPPED)
def test_shipped_fixtures_pass(repo_fixture, name):
    report = run_checks(repo_fixture(name))
    bad = [(c.id, c.verdict, c.witness) for c in report.checks if c.verdict != c.expected]
    assert bad == []
    assert report.exit_code() == 0


def test_checks_are_sorted_and_loci_collected(repo_fixture):
    report = run_checks(repo_fixture("hypersurface"))
    ids = [c.id for c in report.checks]
    assert ids == sorted(ids)
    keys = [(l.module, l.kind) for l in report.loci]
    assert keys == sorted(keys)
    assert ("Mx", "fid") in keys


def test_expected_failures_carry_witnesses(test_fixture):
    report = run_checks(test_fixture("expected_fail"))
    assert report.exit_code() == 1
    for check in report.checks:
        assert check.verdict == "fail", check.id
        assert check.as_expected
        assert check.witness
        assert "witness replayed" in check.caveats
    by_id = {c.id: c for c in report.checks}
    assert "hypothesis_not_certified" in by_id["filtration-not-free"].witness
    assert by_id["wrong-free"].witness["expected"] == ["y"]
    assert by_id["wrong-ranks"].witness["ranks"] == [1, 1]


def test_inconclusive_names_its_budget(test_fixture):
    report = run_checks(test_fixture("inconclusive"))
    (check,) = report.checks
    assert check.verdict == "inconclusive"
    assert check.witness["budget"] == "WITNESS_MAX_FACTORS"
    assert report.exit_code() == 2


def test_single_check(test_fixture):
    fx = test_fixture("all_pass")
    report = run_checks(fx, "free-Sx")
    assert [c.id for c in report.checks] == ["free-Sx"]
    with pytest.raises(KeyError):
        run_checks(fx, "no-such-check")


def test_reports_are_byte_stable(test_fixture):
    first = json_utils.dumps(run_checks(test_fixture("all_pass")))
    second = json_utils.dumps(run_checks(test_fixture("all_pass")))
    assert first == second


def test_exit_code_precedence():
    fail = CheckResult(id="a", ref="r", kind="locus", verdict="fail", witness={"x": 1})
    maybe = CheckResult(id="b", ref="r", kind="locus", verdict="inconclusive",
                        witness={"budget": "BASS_WINDOW"})
    ok = CheckResult(id="c", ref="r", kind="locus", verdict="pass")
    assert VerifyReport(fixture="f", checks=[ok, maybe, fail]).exit_code() == 1
    assert VerifyReport(fixture="f", checks=[ok, maybe]).exit_code() == 2
    assert VerifyReport(fixture="f", checks=[ok]).exit_code() == 0


def test_sample_poset(repo_fixture):
    fx = repo_fixture("two_planes")
    poset = SamplePoset(fx.context.poset)
    index = {p.label: i for i, p in enumerate(poset.primes)}
    punctured = poset.full & ~(1 << index["m"])
    assert poset.is_open(punctured)
    assert poset.nagata_side(punctured)
    only_m = 1 << index["m"]
    assert not poset.is_open(only_m)
    q, p = poset.unstable_pair(only_m)
    assert poset.primes[p].label == "m"
    assert poset.labels(only_m) == ["m"]


def test_topological_nagata_is_exhaustive(repo_fixture):
    poset = SamplePoset(repo_fixture("two_planes").context.poset)
    out = check_topological_nagata(poset)
    assert out.verdict == "pass"
    assert out.caveats == [f"exhaustive over {poset.full + 1} subsets"]


def test_filtration_factors(repo_fixture):
    fx = repo_fixture("thickening")
    factors = filtration_factors(fx.module("T"), fx.ideals["Ix"], 2)
    assert len(factors) == 2
    for factor in factors:
        assert factor.ring.relations == fx.ring.ideal(fx.ideals["Ix"].generators)
        pruned = prune_presentation(factor)
        assert pruned.generators == 1
        assert pruned.columns == ()


@pytest.mark.parametrize("name", SHIPPED)
def test_topological_nagata_on_every_poset(repo_fixture, name):
    poset = SamplePoset(repo_fixture(name).context.poset)
    assert len(poset) <= config.POSET_EXHAUSTIVE_LIMIT
    out = check_topological_nagata(poset)
    assert out.verdict == "pass", out.witness
    assert out.caveats == [f"exhaustive over {poset.full + 1} subsets"]


def test_nc_star_fails_without_an_open_piece(repo_fixture, monkeypatch):
    fx = repo_fixture("hypersurface")
    monkeypatch.setattr(verify, "nonempty_open_inside", lambda X, p: None)
    monkeypatch.setattr(verify, "nonempty_open_inside_poset", lambda member, p, poset: None)
    out = verify.verify_nc_star(fx.module("Mx"), "fid", fx)
    assert out.verdict == "fail"
    assert out.witness["stage"] == "R/p"
    assert out.witness["prime"] in ("px", "m", "qx")

    block = CheckBlock(id="nc", kind="nc_star", module="Mx", locus="fid", expect="fail")
    result, _ = verify.run_check(fx, block)
    assert result.verdict == "fail" and result.as_expected
    assert "witness replayed" in result.caveats


def test_gor_equivalence_at_a_prime_outside_the_hypothesis(repo_fixture):
    fx = repo_fixture("hypersurface")
    # m is not in the fid locus of Mx
    block = CheckBlock(id="ge", kind="gor_equivalence", module="Mx", prime="m",
                       expect="inconclusive")
    result, _ = verify.run_check(fx, block)
    assert result.verdict == "inconclusive" and result.as_expected
    assert result.witness["budget"] == "hypothesis"
    assert result.witness["prime"] == "m"

    sweep = CheckBlock(id="ge", kind="gor_equivalence", module="Mx")
    result, _ = verify.run_check(fx, sweep)
    assert result.verdict == "pass"
    assert sorted(result.witness["hypothesis_failed"]) == ["m", "py", "qy"]
    assert sorted(result.witness["sides"]) == ["px", "qx"]


@pytest.mark.parametrize(
    "sides, verdict",
    [((None, None), "inconclusive"), (("y", None), "fail"), (("y", "1"), "pass")],
)
def test_gor_equivalence_sides(repo_fixture, monkeypatch, sides, verdict):
    fx = repo_fixture("hypersurface")
    monkeypatch.setattr(verify, "verify_theorem_gor_equivalence", lambda M, p, fx: sides)
    block = CheckBlock(id="ge", kind="gor_equivalence", module="Mx", prime="px")
    result, _ = verify.run_check(fx, block)
    assert result.verdict == verdict
    if verdict == "inconclusive":
        assert result.witness["budget"] == "witness search"

"""test_fixtures.py"""

# pylint: disable=all

from pathlib import Path

import pytest

from models.fixtures import (
    FixtureParseError,
    FixtureValidationError,
    load_fixture,
    parse_fixture,
    print_fixture,
)

BASE_DIR = Path(__file__).resolve().parent
REPO_FIXTURE_DIR = BASE_DIR.parent.parent / "fixtures"
MALFORMED_PATH = BASE_DIR / "fixtures" / "malformed.fix"

SHIPPED = sorted(p.stem for p in REPO_FIXTURE_DIR.glob("*.fix"))

RING = """[ring]
variables = ["x", "y"]
relations = ["x*y"]
"""


def test_shipped_fixtures_load(repo_fixture):
    assert "hypersurface" in SHIPPED and len(SHIPPED) >= 6
    for name in SHIPPED:
        fx = repo_fixture(name)
        assert fx.name == name
        assert fx.checks, f"{name} has no checks"
        assert fx.module("R").generators == 1


@pytest.mark.parametrize("name", SHIPPED)
def test_print_parses_back(repo_fixture, name):
    fx = repo_fixture(name)
    again = parse_fixture(print_fixture(fx), name)
    assert again == fx
    assert again.ring == fx.ring
    assert set(again.primes) == set(fx.primes)


def test_lookups(repo_fixture):
    fx = repo_fixture("hypersurface")
    assert fx.module(None) is fx.module("R")
    assert fx.same_as("Mx2") == "Mx"
    assert fx.same_as("Mx") is None
    assert fx.prime("m").provenance == "monomial-checked"
    assert fx.prime("qx").provenance == "declared"
    assert fx.ring.gorenstein_certified


def test_malformed_toml_reports_line():
    with pytest.raises(FixtureParseError) as e:
        load_fixture(MALFORMED_PATH)
    assert e.value.line > 0


def test_schema_error_points_at_key():
    text = RING + '\n[[module]]\nname = "M"\ngenerators = -1\n'
    with pytest.raises(FixtureParseError) as e:
        parse_fixture(text)
    assert e.value.line == 7


def test_column_length_error_points_at_table():
    text = RING + '\n[[module]]\nname = "M"\ngenerators = 2\nrelations = [["x"]]\n'
    with pytest.raises(FixtureParseError) as e:
        parse_fixture(text)
    assert e.value.line == 5


def test_unknown_check_kind():
    text = RING + '\n[[check]]\nid = "a"\nkind = "nonsense"\n'
    with pytest.raises(FixtureParseError) as e:
        parse_fixture(text)
    assert e.value.line == 7


def test_bad_polynomial_reports_ring_line():
    text = '[ring]\nvariables = ["x"]\nrelations = ["x*z"]\n'
    with pytest.raises(FixtureParseError) as e:
        parse_fixture(text)
    assert e.value.line == 1
    assert "z" in e.value.message


def test_bad_polynomial_in_module():
    text = RING + '\n[[module]]\nname = "M"\nrelations = [["x^-2"]]\n'
    with pytest.raises(FixtureParseError) as e:
        parse_fixture(text)
    assert e.value.line == 5


def test_duplicate_names():
    text = RING + '\n[[ideal]]\nname = "I"\n\n[[ideal]]\nname = "I"\n'
    with pytest.raises(FixtureParseError):
        parse_fixture(text)


@pytest.mark.parametrize(
    "body, invariant",
    [
        ('[[prime]]\nname = "p"\ngenerators = ["x"]\nprovenance = "monomial"\n',
         "prime-contains-relations"),
        ('[[prime]]\nname = "p"\ngenerators = ["x*y"]\nprovenance = "monomial"\n',
         "prime-generators"),
        ('[[prime]]\nname = "p"\ngenerators = ["x"]\n\n'
         '[[prime]]\nname = "q"\ngenerators = ["y"]\ncontains = ["p"]\n',
         "declared-containment"),
        ('[[prime]]\nname = "p"\ngenerators = ["x"]\ncontains = ["nobody"]\n',
         "declared-containment"),
        ('[[prime]]\nname = "p"\ngenerators = ["x"]\nminimal_of = ["ideal:missing"]\n',
         "minimal-of-reference"),
        ('[[module]]\nname = "M"\nsame_as = "N"\n', "same-as-reference"),
        ('[[check]]\nid = "c"\nkind = "locus"\nmodule = "N"\n', "check-references"),
        ('[[check]]\nid = "c"\nkind = "locus"\nprime = "p"\n', "check-references"),
    ],
)
def test_validation_errors(body, invariant):
    text = '[ring]\nvariables = ["x", "y"]\nrelations = ["x*y"]\n\n' + body
    if invariant == "prime-contains-relations":
        text = text.replace('relations = ["x*y"]', 'relations = ["x*y - 1"]')
    with pytest.raises(FixtureValidationError) as e:
        parse_fixture(text)
    assert e.value.invariant == invariant


def test_declared_minimal_primes_are_checked():
    text = """[ring]
variables = ["x", "y"]
relations = ["y - x^2"]

[[prime]]
name = "m0"
generators = ["x", "y"]
provenance = "monomial"
minimal_of = ["relations"]
"""
    with pytest.raises(FixtureValidationError) as e:
        parse_fixture(text)
    assert e.value.invariant == "declared-minimal-primes"


def test_declared_minimal_primes_of_annihilator():
    text = RING + """
[[module]]
name = "M"
relations = [["x"]]

[[prime]]
name = "px"
generators = ["x"]
provenance = "monomial"
minimal_of = ["ann:M", "relations"]

[[prime]]
name = "py"
generators = ["y"]
provenance = "monomial"
minimal_of = ["relations"]
"""
    fx = parse_fixture(text)
    assert [p.label for p in fx.catalog.minimal_primes(fx.ring.relations)] == ["px", "py"]

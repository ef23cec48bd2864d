"""
conftest.py
"""

import os
from pathlib import Path

import pytest

from models.fixtures import load_fixture
from models.groebner import clear_cache

BASE_DIR = Path(__file__).resolve().parent
TEST_FIXTURE_DIR = Path(BASE_DIR) / "fixtures"
REPO_FIXTURE_DIR = Path(BASE_DIR).parent.parent / "fixtures"
MALFORMED_PATH = TEST_FIXTURE_DIR / "malformed.fix"


@pytest.fixture(autouse=True)
def set_test_env():
    """Sets the APP_ENV environment variable to TEST which is used in decorators"""
    os.environ["APP_ENV"] = "test"
    yield
    del os.environ["APP_ENV"]  # Optionally clean up after the test


@pytest.fixture
def fresh_cache():
    """Groebner bases are cached across calls; budget tests need a cold cache."""
    clear_cache()
    yield
    clear_cache()


@pytest.fixture
def repo_fixture():
    """Loader for the fixtures shipped in the top-level fixtures/ directory."""

    def _load(name: str):
        return load_fixture(REPO_FIXTURE_DIR / f"{name}.fix")

    return _load


@pytest.fixture
def test_fixture():
    """Loader for the synthetic fixtures next to these tests."""

    def _load(name: str):
        return load_fixture(TEST_FIXTURE_DIR / f"{name}.fix")

    return _load


def pytest_sessionstart(session):  # pylint: disable=unused-argument
    """Write a malformed fixture so the parser tests have a file to reject"""
    if not MALFORMED_PATH.exists():
        MALFORMED_PATH.parent.mkdir(parents=True, exist_ok=True)
        MALFORMED_PATH.write_text(
            '[ring]\nvariables = ["x", "y"]\nrelations = ["x*y"\n', encoding="utf-8"
        )

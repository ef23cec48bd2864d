"""test_json_utils.py"""

# pylint: disable=all

import json

import pytest

from models import json_utils
from models.schemas import SCHEMA_VERSION, CheckResult, VerifyReport


@pytest.fixture
def report():
    return VerifyReport(
        fixture="demo",
        checks=[
            CheckResult(id="b", ref="free locus", kind="locus", verdict="pass"),
            CheckResult(id="a", ref="resolution", kind="resolution", verdict="fail",
                        witness={"ranks": [1, 1], "expected_ranks": [1, 2]}),
        ],
    )


def test_dumps_is_sorted_and_terminated(report):
    text = json_utils.dumps(report)
    assert text.endswith("}\n")
    data = json.loads(text)
    assert list(data) == sorted(data)
    assert data["schema_version"] == SCHEMA_VERSION
    assert '"expected_ranks"' in text.split('"ranks"')[0]


def test_save_and_load(tmp_path, report):
    path = tmp_path / "out" / "report.json"
    json_utils.save_report(report, path)
    assert path.with_suffix(".sha256").exists()
    assert json_utils.verify_checksum(path)
    loaded = json_utils.load_report(path, VerifyReport)
    assert json_utils.dumps(loaded) == json_utils.dumps(report)


def test_load_missing_returns_none(tmp_path):
    assert json_utils.load_report(tmp_path / "nope.json", VerifyReport) is None


def test_checksum_mismatch(tmp_path, report):
    path = tmp_path / "report.json"
    json_utils.save_report(report, path)
    path.write_text(path.read_text(encoding="utf-8").replace("demo", "edited"), encoding="utf-8")
    assert not json_utils.verify_checksum(path)
    with pytest.raises(ValueError, match="Checksum mismatch"):
        json_utils.load_report(path, VerifyReport)
    loaded = json_utils.load_report(path, VerifyReport, use_checksum=False)
    assert loaded.fixture == "edited"


def test_schema_version_mismatch(tmp_path, report):
    path = tmp_path / "report.json"
    data = report.model_dump(mode="json")
    data["schema_version"] = SCHEMA_VERSION + 1
    path.write_text(json.dumps(data), encoding="utf-8")
    with pytest.raises(RuntimeError, match="Unexpected schema version"):
        json_utils.load_report(path, VerifyReport)


def test_no_sidecar_passes(tmp_path):
    path = tmp_path / "plain.json"
    path.write_text("{}", encoding="utf-8")
    assert json_utils.verify_checksum(path)

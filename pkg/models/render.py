"""
render.py - Human-readable reports from the Jinja2 templates.
"""

import logging

from jinja2 import Environment, FileSystemLoader, TemplateError

import config
from models.loci import LocusReport
from models.modres import FreeResolution
from models.schemas import LocalProfile, VerifyReport

logger = logging.getLogger("loci_logger")

# Setup Jinja2 environment to load from templates folder
env = Environment(
    loader=FileSystemLoader([config.TEMPLATE_DIR]),
    trim_blocks=True,
    lstrip_blocks=True,
    keep_trailing_newline=True,
)

MARKS = {"pass": "PASS", "fail": "FAIL", "inconclusive": "????"}


def _render(name: str, context: dict) -> str:
    try:
        return env.get_template(name).render(context)
    except TemplateError as e:
        logger.error("Trouble rendering %s: %s", name, e)
        raise


def render_verify(report: VerifyReport) -> str:
    rows = [
        {
            "id": c.id,
            "mark": MARKS[c.verdict],
            "ref": c.ref,
            "witness": ", ".join(f"{k}={v}" for k, v in sorted(c.witness.items())),
            "note": "" if c.as_expected else f"(expected {c.expected})",
        }
        for c in report.checks
    ]
    width = max((len(r["id"]) for r in rows), default=2)
    return _render(
        "report.txt.j2",
        {"report": report, "rows": rows, "width": width, "code": report.exit_code()},
    )


def render_locus(report: LocusReport) -> str:
    return _render("locus.txt.j2", {"report": report, "text": report.describe()})


def render_profile(profile: LocalProfile, module: str) -> str:
    return _render("profile.txt.j2", {"p": profile, "module": module})


def render_resolution(res: FreeResolution, module: str) -> str:
    steps = [
        {
            "k": k,
            "rows": [
                "[" + ", ".join(str(col[i]) for col in res.differential(k)) + "]"
                for i in range(res.rank(k - 1))
            ],
        }
        for k in range(1, res.length + 1)
    ]
    return _render("resolution.txt.j2", {"res": res, "module": module, "steps": steps})

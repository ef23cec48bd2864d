"""
config.py - Contains configuration settings for the module loci toolkit

"""

import os
import sys
from pathlib import Path

from dotenv import load_dotenv


def _get_and_print(k: str, d: str = "", show: bool = False) -> str:
    """Get, show, and return envar"""
    v = os.getenv(k, d)
    if show:
        # stdout carries reports, so echo to stderr
        print(f"{k}: {v}", file=sys.stderr)
    return v


APP_ENV = _get_and_print("APP_ENV", "development")

if APP_ENV == "production":
    load_dotenv(".env.production", override=True)
    required_vars = [
        "APP_ENV",
        "LOG_LEVEL",
        "GB_STEP_LIMIT",
    ]

    missing = [var for var in required_vars if not os.getenv(var)]
    if missing:
        raise RuntimeError(f"Missing required environment variables: {', '.join(missing)}")

else:
    load_dotenv(".env")

APP_VERSION = _get_and_print("APP_VERSION", "dev")

BASE_DIR = Path(__file__).resolve().parent
DATA_DIR = Path(BASE_DIR) / "data"
TEMPLATE_DIR = Path(BASE_DIR) / "templates"
FIXTURE_DIR = Path(BASE_DIR) / "fixtures"

DATA_DIR.mkdir(parents=True, exist_ok=True)

LOG_FILE_PATH = Path(DATA_DIR) / "loci.log"

LOG_LEVEL_STR = _get_and_print("LOG_LEVEL", "WARNING").upper()

#
## Resource budgets. Exceeding one turns a verdict into "inconclusive".
GB_STEP_LIMIT = int(_get_and_print("GB_STEP_LIMIT", "200000"))
GB_DEGREE_LIMIT = int(_get_and_print("GB_DEGREE_LIMIT", "40"))

# Blank means nvars + dim R + 2
RESOLUTION_CUTOFF = _get_and_print("RESOLUTION_CUTOFF", "")
# Blank means dim R + 2
BASS_WINDOW = _get_and_print("BASS_WINDOW", "")

WITNESS_MAX_FACTORS = int(_get_and_print("WITNESS_MAX_FACTORS", "3"))
POSET_EXHAUSTIVE_LIMIT = int(_get_and_print("POSET_EXHAUSTIVE_LIMIT", "12"))
TRIM_LIMIT = int(_get_and_print("TRIM_LIMIT", "60"))

#
## Randomised property tests
RANDOM_SEED = int(_get_and_print("RANDOM_SEED", "20240611"))

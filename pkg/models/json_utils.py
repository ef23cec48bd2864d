"""json_utils.py - Stable JSON text and checksummed report files"""

import hashlib
import json
import logging
import os
import tempfile
from pathlib import Path
from typing import Optional, Type

from pydantic import BaseModel

from models.schemas import SCHEMA_VERSION

logger = logging.getLogger("loci_logger")


def dumps(data: BaseModel) -> str:
    """Byte-stable JSON text: sorted keys, fixed indent, trailing newline."""
    return json.dumps(data.model_dump(mode="json"), indent=2, sort_keys=True) + "\n"


def save_report(data: BaseModel, path: Path) -> None:
    """Atomic write plus sha256 sidecar."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    atomic_write_text(dumps(data), path)
    write_checksum(path)


def load_report(path: Path, model: Type[BaseModel], use_checksum: bool = True) -> Optional[BaseModel]:
    """Load a saved report, refusing files whose checksum or schema version is off."""
    path = Path(path)
    if not path.exists():
        return None

    if use_checksum and not verify_checksum(path):
        logger.error("JSON checksum failed for %s", path)
        raise ValueError("Checksum mismatch!")

    with open(path, "r", encoding="utf-8") as f:
        data = json.load(f)

    version = data.get("schema_version")
    if version != SCHEMA_VERSION:
        raise RuntimeError(
            f"Unexpected schema version in {path.name}: got {version}, expected {SCHEMA_VERSION}"
        )

    return model.model_validate(data)


def atomic_write_text(text: str, target_path: Path):
    """Atomic save to avoid half-written reports."""
    with tempfile.NamedTemporaryFile(
        "w", dir=target_path.parent, delete=False, encoding="utf-8"
    ) as tmp:
        tmp.write(text)
        temp_path = tmp.name

    os.replace(temp_path, target_path)


def verify_checksum(json_path: Path) -> bool:
    """True if the file matches its .sha256 sidecar (or has none)."""
    sidecar = json_path.with_suffix(".sha256")
    if not sidecar.exists():
        return True

    try:
        content = json_path.read_text(encoding="utf-8")
        stored = sidecar.read_text(encoding="utf-8").strip()
        return hashlib.sha256(content.encode("utf-8")).hexdigest() == stored
    except (TypeError, ValueError) as e:
        logger.warning("Problem creating digest for %s: %s", json_path, e)
        return False


def write_checksum(json_path: Path):
    content = json_path.read_text(encoding="utf-8")
    digest = hashlib.sha256(content.encode("utf-8")).hexdigest()
    json_path.with_suffix(".sha256").write_text(digest, encoding="utf-8")

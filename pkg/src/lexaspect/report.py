"""Run manifests, report assembly and the published report schema."""

from __future__ import annotations

import hashlib
import json
from importlib import resources
from pathlib import Path

from . import __version__
from .rng import ALGORITHM

SCHEMA_RESOURCE = "report.schema.json"


def load_schema() -> dict:
    return json.loads(resources.files(__package__).joinpath(SCHEMA_RESOURCE).read_text("utf-8"))


def sha256_file(path) -> str:
    h = hashlib.sha256()
    with Path(path).open("rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def make_manifest(
    subcommand: str,
    inputs: list[tuple[str, str]],
    seed: int | None,
    train_config: dict | None,
    drop_policy: dict,
    options: dict,
    duration: float = 0.0,
) -> dict:
    """``inputs`` is a list of ``(role, path)`` pairs; each file is hashed."""
    return {
        "subcommand": subcommand,
        "tool_version": f"lexaspect {__version__}",
        "inputs": [{"role": role, "path": str(p), "sha256": sha256_file(p)} for role, p in inputs],
        "seed": seed,
        "train_config": train_config,
        "drop_policy": drop_policy,
        "prng": ALGORITHM,
        "options": options,
        "duration_seconds": duration,
    }


def dumps_report(report: dict) -> str:
    return json.dumps(report, indent=2, ensure_ascii=False) + "\n"


def payload(report: dict) -> str:
    """Serialized report without the wall-clock field; equal inputs give equal payloads."""
    stripped = json.loads(json.dumps(report))
    stripped["manifest"].pop("duration_seconds", None)
    return dumps_report(stripped)

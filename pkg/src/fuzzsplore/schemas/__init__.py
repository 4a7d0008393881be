"""Published JSON schemas for every external document and API payload."""

from __future__ import annotations

import json
from functools import lru_cache
from importlib import resources

SCHEMA_NAMES = (
    "campaign",
    "artifact",
    "api_meta",
    "api_analysis",
    "api_coverage",
    "api_embedding",
    "api_graph",
    "api_testcase",
    "api_error",
)


@lru_cache(maxsize=None)
def load_schema(name: str) -> dict:
    """Load one of the shipped schemas by short name."""
    if name not in SCHEMA_NAMES:
        raise KeyError(f"unknown schema {name!r}; known: {SCHEMA_NAMES}")
    text = resources.files(__package__).joinpath(f"{name}.schema.json").read_text("utf-8")
    return json.loads(text)

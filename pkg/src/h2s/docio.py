"""Canonical JSON document helpers.

Every structured-text document the engine reads or writes goes through
this module so serialization stays byte-reproducible: floats are rounded
to 9 significant digits (a fixpoint under re-rounding, so repeated
export/import cycles never drift), keys keep insertion order, and the
text always ends with a single newline.
"""

from __future__ import annotations

import hashlib
import json
from typing import Any


def round9(x: float) -> float:
    """Round to 9 significant digits; idempotent."""
    if x != x or x in (float("inf"), float("-inf")):
        return x
    return float(f"{x:.9g}")


def round_floats(obj: Any) -> Any:
    """Recursively round every float in a JSON-ish tree to 9 significant digits."""
    if isinstance(obj, float):
        return round9(obj)
    if isinstance(obj, dict):
        return {k: round_floats(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [round_floats(v) for v in obj]
    return obj


def canonical_dumps(obj: Any) -> str:
    """Serialize a document with stable key order and fixed float formatting."""
    return json.dumps(round_floats(obj), indent=1, ensure_ascii=True) + "\n"


def loads(text: str) -> Any:
    # json.JSONDecodeError carries line/column info for format diagnostics
    return json.loads(text)


def content_hash(obj: Any) -> str:
    """sha256 of the canonical serialization; used as the config hash."""
    return hashlib.sha256(canonical_dumps(obj).encode("utf-8")).hexdigest()

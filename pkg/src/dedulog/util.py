"""Small shared helpers."""

from __future__ import annotations

import hashlib
import json


def stable_seed(*parts) -> int:
    """Derive a deterministic 63-bit seed from scalar/tuple parts.

    Built-in hash() is salted per process, so anything that must reproduce
    across runs (mock fault rolls, sampling, generated corpora) goes through
    this instead.
    """
    blob = "\x1f".join(repr(p) for p in parts).encode("utf-8")
    return int.from_bytes(hashlib.sha256(blob).digest()[:8], "big") >> 1


def canonical_json(obj) -> str:
    """Serialize with sorted keys and a trailing newline; byte-stable."""
    return json.dumps(obj, indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def content_hash(obj) -> str:
    return hashlib.sha256(canonical_json(obj).encode("utf-8")).hexdigest()

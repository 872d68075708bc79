"""Canonical JSON encoding and hashing.

One byte form per value: UTF-8, object keys sorted lexicographically, no
insignificant whitespace. Every digest in the system (journal event hashes,
custody entry hashes, case state digests, manifest sidecars) is SHA-256 over
this encoding, so the rules here are load-bearing: changing them invalidates
every recorded hash.

Only JSON-safe trees are accepted (dict/list/str/int/bool/None). Floats are
rejected: their textual form is not canonical across producers and nothing
in the data model needs them.
"""

from __future__ import annotations

import hashlib
import json
from typing import Any

GENESIS_HASH = "0" * 64


def _check_tree(value: Any) -> None:
    if value is None or isinstance(value, (str, bool, int)):
        return
    if isinstance(value, float):
        raise TypeError("floats are not allowed in canonical JSON")
    if isinstance(value, list):
        for item in value:
            _check_tree(item)
        return
    if isinstance(value, dict):
        for key, item in value.items():
            if not isinstance(key, str):
                raise TypeError(f"non-string key {key!r} in canonical JSON")
            _check_tree(item)
        return
    raise TypeError(f"type {type(value).__name__} is not allowed in canonical JSON")


def canonical_json(value: Any) -> str:
    """Render a JSON-safe tree in canonical form."""
    _check_tree(value)
    return json.dumps(value, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def canonical_bytes(value: Any) -> bytes:
    return canonical_json(value).encode("utf-8")


def sha256_hex(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def hash_canonical(value: Any) -> str:
    """SHA-256 hex digest of the canonical encoding of ``value``."""
    return sha256_hex(canonical_bytes(value))

"""Deterministic substream derivation.

Every random draw in the package flows through a seed derived here, so that
replication r of an experiment sees the same stream whether runs are serial,
chunked, or resumed. Keys are hashed with SHA-256 (never Python's ``hash``,
which is salted per process).
"""

from __future__ import annotations

import hashlib

import numpy as np

_MASK63 = (1 << 63) - 1


def _encode(part) -> bytes:
    if isinstance(part, bytes):
        tag, body = b"b", part
    elif isinstance(part, str):
        tag, body = b"s", part.encode("utf-8")
    elif isinstance(part, bool):
        tag, body = b"i", str(int(part)).encode()
    elif isinstance(part, (int, np.integer)):
        tag, body = b"i", str(int(part)).encode()
    elif isinstance(part, (float, np.floating)):
        # repr round-trips float64 exactly
        tag, body = b"f", repr(float(part)).encode()
    else:
        raise TypeError(f"cannot derive a seed from {type(part).__name__}")
    return tag + len(body).to_bytes(8, "little") + body


def stream_seed(*parts) -> int:
    """Collapse a key path into a stable 63-bit seed."""
    h = hashlib.sha256()
    for part in parts:
        h.update(_encode(part))
    return int.from_bytes(h.digest()[:8], "little") & _MASK63


def substream(*parts) -> np.random.Generator:
    """A PCG64 generator seeded from the key path."""
    return np.random.default_rng(stream_seed(*parts))

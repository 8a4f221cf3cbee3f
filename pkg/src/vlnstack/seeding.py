"""Labelled seed derivation so each random stream depends only on its own axis."""

from __future__ import annotations

import hashlib


def derive_seed(root: int, *labels) -> int:
    """Stable 63-bit seed from a root seed and a label path."""
    key = "/".join([str(int(root)), *(str(label) for label in labels)])
    return int.from_bytes(hashlib.sha256(key.encode()).digest()[:8], "big") >> 1

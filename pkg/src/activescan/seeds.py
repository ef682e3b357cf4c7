"""Deterministic labeled seed derivation.

All randomness flows from one base seed; stage and run seeds are derived
by hashing (base, label), so adding a stage never perturbs the streams of
existing ones. Stable across processes and platforms.
"""

from __future__ import annotations

import hashlib


def derive_seed(base: int, label: str) -> int:
    digest = hashlib.sha256(f"{base}:{label}".encode()).digest()
    return int.from_bytes(digest[:8], "little")

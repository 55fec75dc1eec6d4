"""Deterministic seed fan-out: one root seed, one independent child stream per stage."""

import zlib


def fan_seed(root: int, label: str) -> int:
    """Derive a child seed from a root seed and a stage label; stable across platforms."""
    return (int(root) * 0x9E3779B1 + zlib.crc32(label.encode("utf-8"))) % (2**32)

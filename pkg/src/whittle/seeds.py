"""Stable seed derivation for nested random streams.

Python's hash() is randomized per process, so sub-seeds are derived with
sha256 over a canonical encoding of the parts. The same inputs always give
the same seed, on any platform.
"""

import hashlib

_SEED_BITS = 63


def derive_seed(*parts: int | str) -> int:
    """Derive a child seed from a sequence of ints and strings."""
    h = hashlib.sha256()
    for part in parts:
        if isinstance(part, bool) or not isinstance(part, (int, str)):
            raise TypeError(f"seed parts must be int or str, got {type(part).__name__}")
        tag = "i" if isinstance(part, int) else "s"
        h.update(f"{tag}:{part};".encode("utf-8"))
    return int.from_bytes(h.digest()[:8], "big") >> (64 - _SEED_BITS)

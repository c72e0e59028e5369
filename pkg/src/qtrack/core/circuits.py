"""Circuit text canonicalization and digesting.

Digests give circuits a stable identity across runs: two sources that
differ only in whitespace or comments hash identically.
"""

from __future__ import annotations

import hashlib


def canonicalize_circuit_text(source: str) -> str:
    """Normalize circuit text before digesting.

    Comment lines (``//`` after any leading whitespace) are removed, every
    remaining line is stripped and its interior whitespace runs collapsed
    to a single space, empty lines are dropped, and the survivors are
    joined with ``\\n``. Idempotent: canonicalizing twice is a no-op.
    """
    lines: list[str] = []
    for raw in source.split("\n"):
        if raw.lstrip().startswith("//"):
            continue
        line = " ".join(raw.split())
        if line:
            lines.append(line)
    return "\n".join(lines)


def circuit_digest(source: str | bytes) -> str:
    """SHA-256 hex digest over the canonical form of ``source``.

    Bytes input must be valid UTF-8; invalid input raises
    ``UnicodeDecodeError``.
    """
    if isinstance(source, bytes):
        source = source.decode("utf-8")
    canonical = canonicalize_circuit_text(source)
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()

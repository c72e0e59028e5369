"""Crash-safe filesystem primitives for the store.

Rewrites go through a temp file, fsync, and atomic rename; appends write a
single fsynced record per call. Readers tolerate an unterminated final
line (the footprint of a crash mid-append) but treat corruption of a
complete line as an error.
"""

from __future__ import annotations

import json
import os
import tempfile
from pathlib import Path
from typing import Any


def fsync_dir(path: Path) -> None:
    fd = os.open(path, os.O_RDONLY)
    try:
        os.fsync(fd)
    finally:
        os.close(fd)


def atomic_write_bytes(path: Path, data: bytes) -> None:
    """Replace ``path`` with ``data`` atomically; readers never see a torn file."""
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp_name = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    tmp = Path(tmp_name)
    try:
        with open(fd, "wb") as f:
            f.write(data)
            f.flush()
            os.fsync(f.fileno())
        os.replace(tmp, path)
    except BaseException:
        tmp.unlink(missing_ok=True)
        raise
    fsync_dir(path.parent)


def append_record(path: Path, record: dict[str, Any]) -> None:
    """Append one JSON record as a single line and fsync before returning.

    Success means the record is durable; the caller holds whatever lock
    serializes writers of this file.
    """
    line = json.dumps(record, ensure_ascii=False, separators=(",", ":")) + "\n"
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "ab") as f:
        f.write(line.encode("utf-8"))
        f.flush()
        os.fsync(f.fileno())


def repair_tail(path: Path) -> None:
    """Truncate an unterminated final line left behind by a crash.

    Without this, the next append would glue onto the torn bytes and turn
    a droppable tail into a corrupt complete line. Caller must hold the
    writer lock for the file.
    """
    if not path.exists():
        return
    with open(path, "rb+") as f:
        f.seek(0, os.SEEK_END)
        size = f.tell()
        if size == 0:
            return
        f.seek(size - 1)
        if f.read(1) == b"\n":
            return
        pos = size - 1
        while pos > 0:
            start = max(0, pos - 4096)
            f.seek(start)
            chunk = f.read(pos - start)
            cut = chunk.rfind(b"\n")
            if cut != -1:
                f.truncate(start + cut + 1)
                break
            pos = start
        else:
            f.truncate(0)
        f.flush()
        os.fsync(f.fileno())


def read_records(path: Path) -> list[dict[str, Any]]:
    """Read a jsonl file, skipping an unterminated trailing line.

    A complete line that fails to parse indicates real corruption and
    raises ``ValueError`` rather than silently dropping data.
    """
    if not path.exists():
        return []
    with open(path, "rb") as f:
        data = f.read()
    lines = data.split(b"\n")
    # The final split element is b"" when the file ends with a newline and
    # an unterminated tail otherwise. A tail was never acknowledged (the
    # append fsyncs before returning), so it is safe to drop.
    records: list[dict[str, Any]] = []
    for i, raw in enumerate(lines[:-1]):
        if not raw:
            continue
        try:
            records.append(json.loads(raw.decode("utf-8")))
        except (UnicodeDecodeError, json.JSONDecodeError) as exc:
            raise ValueError(f"corrupt record at {path}:{i + 1}: {exc}") from exc
    return records

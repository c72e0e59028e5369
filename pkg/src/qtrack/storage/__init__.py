"""Filesystem persistence: store root layout, durable appends, page tokens."""

from qtrack.storage.fsio import append_record, atomic_write_bytes, read_records, repair_tail
from qtrack.storage.paging import decode_page_token, encode_page_token
from qtrack.storage.store import (
    LAYOUT_VERSION,
    Store,
    open_store,
    validate_artifact_path,
)

__all__ = [
    "LAYOUT_VERSION",
    "Store",
    "append_record",
    "atomic_write_bytes",
    "decode_page_token",
    "encode_page_token",
    "open_store",
    "read_records",
    "repair_tail",
    "validate_artifact_path",
]

"""Opaque, tamper-evident page tokens.

A token carries the page offset plus a scope fingerprint binding it to the
query that produced it, sealed with a truncated SHA-256 over a fixed key.
There is no secrecy requirement, only integrity: a client that edits a
token gets an invalid-token error instead of a silently wrong page.
"""

from __future__ import annotations

import base64
import binascii
import hashlib
import json

from qtrack.errors import InvalidPageTokenError

_TOKEN_KEY = b"qtrack-page-token-v1"


def _sign(payload: bytes) -> str:
    return hashlib.sha256(_TOKEN_KEY + b"." + payload).hexdigest()[:16]


def encode_page_token(scope: str, offset: int) -> str:
    payload = json.dumps({"scope": scope, "offset": offset}, sort_keys=True).encode("utf-8")
    envelope = json.dumps({"p": payload.decode("utf-8"), "s": _sign(payload)}).encode("utf-8")
    return base64.urlsafe_b64encode(envelope).decode("ascii")


def decode_page_token(scope: str, token: str) -> int:
    """Return the offset carried by ``token``, verifying signature and scope."""
    try:
        envelope = json.loads(base64.urlsafe_b64decode(token.encode("ascii")))
        payload = envelope["p"].encode("utf-8")
        signature = envelope["s"]
        parsed = json.loads(payload)
        offset = parsed["offset"]
        token_scope = parsed["scope"]
    except (binascii.Error, ValueError, KeyError, TypeError, AttributeError, UnicodeError):
        raise InvalidPageTokenError("malformed page token") from None
    if signature != _sign(payload):
        raise InvalidPageTokenError("page token failed verification")
    if token_scope != scope:
        raise InvalidPageTokenError("page token does not match this query")
    if not isinstance(offset, int) or isinstance(offset, bool) or offset < 0:
        raise InvalidPageTokenError("malformed page token")
    return offset

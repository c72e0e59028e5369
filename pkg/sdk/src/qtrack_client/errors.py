"""Exception types raised by the client SDK.

Every failure surfaces as a ClientError subclass: ApiError wraps a non-2xx
server response and preserves its error code verbatim, ConnectionFailed
wraps transport-level failures and names the tracking URI so a misconfigured
endpoint is obvious from the message alone.
"""

from __future__ import annotations


class ClientError(Exception):
    """Base class for everything this SDK raises on purpose."""


class ApiError(ClientError):
    """A non-2xx response from the tracking server.

    Carries the HTTP status plus the server's own error envelope so callers
    can branch on ``error_code`` exactly as they would against the raw API.
    """

    def __init__(self, status_code: int, error_code: str, message: str):
        super().__init__(f"{error_code}: {message}")
        self.status_code = status_code
        self.error_code = error_code
        self.message = message


class ConnectionFailed(ClientError):
    """The tracking server could not be reached at all."""

"""Exception hierarchy shared by storage, query engine, server, and CLI.

Each exception class corresponds to one wire-level error code; the server
maps them onto ApiError responses, the CLI onto exit codes.
"""

from __future__ import annotations


class QTrackError(Exception):
    """Base class for all qtrack domain errors."""


class NotFoundError(QTrackError):
    """A referenced experiment, run, or artifact does not exist."""


class ConflictError(QTrackError):
    """A write collides with existing state (duplicate name, changed param, ...)."""


class InvalidStateError(QTrackError):
    """Operation not allowed in the current lifecycle state of the target."""


class InvalidParameterError(QTrackError):
    """Malformed or out-of-range input."""


class InvalidPageTokenError(InvalidParameterError):
    """Page token failed signature or scope verification."""


class StoreVersionError(QTrackError):
    """Store root exists but carries an unsupported layout version."""


class StoreLockedError(QTrackError):
    """Another process already owns this store root."""

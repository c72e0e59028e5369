"""HTTP tracking service."""

from qtrack.server.app import ERROR_STATUS, create_app
from qtrack.server.serve import run_server

__all__ = ["ERROR_STATUS", "create_app", "run_server"]

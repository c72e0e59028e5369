"""Blocking server runner used by the command-line front end."""

from __future__ import annotations

import os

import uvicorn

from qtrack.server.app import create_app
from qtrack.storage.store import open_store


def run_server(
    store_dir: str,
    host: str = "127.0.0.1",
    port: int = 5600,
    ui_dir: str | None = None,
    create: bool = False,
    auth_token: str | None = None,
) -> None:
    """Open the store, serve until interrupted, then release the store lock."""
    if auth_token is None:
        auth_token = os.environ.get("QTRACK_AUTH_TOKEN")
    store = open_store(store_dir, create_if_missing=create)
    try:
        app = create_app(store, auth_token=auth_token, ui_dir=ui_dir)
        uvicorn.run(app, host=host, port=port, log_level="warning")
    finally:
        store.close()

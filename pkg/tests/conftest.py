"""Shared fixtures: temp stores, in-process API clients, and a subprocess
server harness for durability and CLI tests."""

from __future__ import annotations

import os
import signal
import socket
import subprocess
import sys
import time

import httpx
import pytest

from qtrack.core.records import (
    Experiment,
    Lifecycle,
    MetricPoint,
    Run,
    RunStatus,
    new_id,
    now_ms,
)
from qtrack.storage.store import Store, open_store


def free_port() -> int:
    with socket.socket() as sock:
        sock.bind(("127.0.0.1", 0))
        return sock.getsockname()[1]


def make_experiment(name: str = "exp", **over) -> Experiment:
    fields = {
        "experiment_id": new_id(),
        "name": name,
        "creation_time": now_ms(),
        "lifecycle": Lifecycle.ACTIVE,
        "tags": {},
    }
    fields.update(over)
    return Experiment(**fields)


def make_run(experiment_id: str, **over) -> Run:
    fields = {
        "run_id": new_id(),
        "experiment_id": experiment_id,
        "status": RunStatus.RUNNING,
        "start_time": now_ms(),
    }
    fields.update(over)
    return Run(**fields)


def make_point(key: str = "fidelity", value: float = 0.9, **over) -> MetricPoint:
    fields = {"key": key, "value": value, "timestamp": now_ms(), "step": 0}
    fields.update(over)
    return MetricPoint(**fields)


@pytest.fixture()
def store(tmp_path) -> Store:
    handle = open_store(tmp_path / "store", create_if_missing=True)
    yield handle
    handle.close()


@pytest.fixture()
def client(store):
    from fastapi.testclient import TestClient

    from qtrack.server.app import create_app

    with TestClient(create_app(store)) as test_client:
        yield test_client


class ServerProc:
    """A `qtrack serve` child process bound to a private store and port."""

    def __init__(self, store_dir: str, port: int | None = None, ui_dir: str | None = None):
        self.store_dir = str(store_dir)
        self.port = port or free_port()
        self.base_url = f"http://127.0.0.1:{self.port}"
        self.ui_dir = ui_dir
        self.proc: subprocess.Popen | None = None

    def start(self, create: bool = True, timeout: float = 15.0) -> "ServerProc":
        argv = [
            sys.executable,
            "-m",
            "qtrack.cli",
            "serve",
            "--addr",
            f"127.0.0.1:{self.port}",
            "--store",
            self.store_dir,
        ]
        if create:
            argv.append("--create")
        if self.ui_dir:
            argv += ["--ui-dir", self.ui_dir]
        env = dict(os.environ)
        env.pop("QTRACK_AUTH_TOKEN", None)
        self.proc = subprocess.Popen(
            argv, stdout=subprocess.DEVNULL, stderr=subprocess.PIPE, env=env
        )
        deadline = time.monotonic() + timeout
        while time.monotonic() < deadline:
            if self.proc.poll() is not None:
                stderr = self.proc.stderr.read().decode() if self.proc.stderr else ""
                raise RuntimeError(f"server exited early: {stderr}")
            try:
                if httpx.get(f"{self.base_url}/healthz", timeout=1.0).status_code == 200:
                    return self
            except httpx.HTTPError:
                time.sleep(0.05)
        raise RuntimeError("server did not become ready in time")

    def kill(self) -> None:
        """Hard kill (no shutdown hooks), as in a crash."""
        if self.proc and self.proc.poll() is None:
            self.proc.send_signal(signal.SIGKILL)
            self.proc.wait(timeout=10)

    def stop(self) -> None:
        if self.proc and self.proc.poll() is None:
            self.proc.terminate()
            try:
                self.proc.wait(timeout=10)
            except subprocess.TimeoutExpired:
                self.proc.kill()
                self.proc.wait(timeout=10)
        if self.proc and self.proc.stderr:
            self.proc.stderr.close()


@pytest.fixture()
def server(tmp_path):
    proc = ServerProc(tmp_path / "served-store").start()
    yield proc
    proc.stop()

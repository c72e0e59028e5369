"""Fluent tracking client that speaks the server's public HTTP API.

Everything goes over the wire: the SDK holds no store handles and derives
nothing the server does not report. The module-level functions mirror the
classic fluent tracking style: pick an experiment with set_experiment, open
a scope with start_run, and log inside it. Exactly one run is active per
client at a time; leaving the scope finishes the run (FINISHED on a clean
exit, FAILED when the block raises).

The tracking URI comes from set_tracking_uri, the QTRACK_TRACKING_URI
environment variable, or the default local address, in that order. A bearer
token is read from QTRACK_AUTH_TOKEN unless given explicitly.
"""

from __future__ import annotations

import io
import json
import os
import time
from dataclasses import dataclass
from typing import Any
from urllib.parse import quote

import httpx
import pandas as pd

from qtrack_client.errors import ApiError, ClientError, ConnectionFailed

DEFAULT_TRACKING_URI = "http://127.0.0.1:5600"

_BASE_COLUMNS = ["run_id", "experiment_id", "status", "start_time", "end_time"]
_COLUMN_GROUPS = {"params.": 0, "metrics.": 1, "tags.": 2}


def _now_ms() -> int:
    return int(time.time() * 1000)


def _canonical_json(obj: Any) -> str:
    """Compact JSON with sorted keys, matching the server's canonical form."""
    return json.dumps(obj, ensure_ascii=False, separators=(",", ":"), sort_keys=True)


def _as_str(value: Any) -> str:
    return value if isinstance(value, str) else str(value)


def _latest_value(points: list[dict[str, Any]]) -> float:
    """Latest point of a metric history: maximum by (step, timestamp, value)."""
    best = max(points, key=lambda p: (p["step"], p["timestamp"], p["value"]))
    return best["value"]


@dataclass(frozen=True)
class Experiment:
    """Immutable snapshot of one experiment as the server reports it."""

    experiment_id: str
    name: str
    creation_time: int
    lifecycle: str
    tags: dict[str, str]

    @staticmethod
    def _from_doc(doc: dict[str, Any]) -> "Experiment":
        return Experiment(
            experiment_id=doc["experiment_id"],
            name=doc["name"],
            creation_time=doc["creation_time"],
            lifecycle=doc["lifecycle"],
            tags=dict(doc.get("tags", {})),
        )


class ActiveRun:
    """Context manager for one open run.

    Created by start_run; leaving the block PATCHes the run to FINISHED, or
    to FAILED when the block raised, and releases the client's active slot
    either way.
    """

    def __init__(self, client: "TrackingClient", doc: dict[str, Any]):
        self._client = client
        self.run_id: str = doc["run_id"]
        self.experiment_id: str = doc["experiment_id"]
        self.start_time: int = doc["start_time"]

    def __enter__(self) -> "ActiveRun":
        return self

    def __exit__(self, exc_type: Any, exc: Any, tb: Any) -> bool:
        status = "FAILED" if exc_type is not None else "FINISHED"
        self._client._finish_run(self, status)
        return False

    def __repr__(self) -> str:
        return f"ActiveRun(run_id={self.run_id!r})"


class TrackingClient:
    """One connection to a tracking server plus the fluent logging state.

    A client instance is single-threaded by contract: it tracks at most one
    active experiment and one active run, and the log_* methods always
    target the active run.
    """

    def __init__(self, tracking_uri: str | None = None, auth_token: str | None = None):
        uri = tracking_uri or os.environ.get("QTRACK_TRACKING_URI") or DEFAULT_TRACKING_URI
        self.tracking_uri = uri.rstrip("/")
        token = auth_token if auth_token is not None else os.environ.get("QTRACK_AUTH_TOKEN")
        headers = {"Authorization": f"Bearer {token}"} if token else {}
        self._http = httpx.Client(base_url=self.tracking_uri, headers=headers, timeout=30.0)
        self._experiment: Experiment | None = None
        self._active_run: ActiveRun | None = None
        # Rows fetched per search request; results always paginate to
        # exhaustion, so this only tunes round-trip count.
        self.search_page_size = 1000

    def close(self) -> None:
        self._http.close()

    # -- transport -----------------------------------------------------------

    def _request(self, method: str, path: str, **kwargs: Any) -> httpx.Response:
        if "json" in kwargs:
            # Serialize here instead of in httpx so values like NaN still
            # reach the server, which owns all validation decisions.
            payload = kwargs.pop("json")
            kwargs["content"] = json.dumps(payload, ensure_ascii=False).encode("utf-8")
            kwargs.setdefault("headers", {}).setdefault("content-type", "application/json")
        try:
            resp = self._http.request(method, path, **kwargs)
        except httpx.HTTPError as exc:
            raise ConnectionFailed(
                f"cannot reach tracking server at {self.tracking_uri}: {exc}"
            ) from exc
        if resp.status_code >= 400:
            try:
                body = resp.json()
                code, message = body["error_code"], body["message"]
            except (ValueError, TypeError, KeyError):
                code, message = "INTERNAL", resp.text[:200]
            raise ApiError(resp.status_code, code, message)
        return resp

    # -- experiments ---------------------------------------------------------

    def set_experiment(self, name: str) -> Experiment:
        """Make an experiment active, creating it on first use.

        Idempotent: repeated calls with the same name resolve to the same
        experiment id.
        """
        exp = self.get_experiment_by_name(name)
        if exp is None:
            try:
                doc = self._request("POST", "/api/v1/experiments", json={"name": name}).json()
                exp = Experiment._from_doc(doc)
            except ApiError as err:
                if err.error_code != "RESOURCE_CONFLICT":
                    raise
                exp = self.get_experiment_by_name(name)
                if exp is None:
                    raise
        self._experiment = exp
        return exp

    def get_experiment_by_name(self, name: str) -> Experiment | None:
        """Look up one experiment by exact name; None when it does not exist."""
        try:
            doc = self._request("GET", "/api/v1/experiments", params={"name": name}).json()
        except ApiError as err:
            if err.error_code == "RESOURCE_NOT_FOUND":
                return None
            raise
        return Experiment._from_doc(doc)

    # -- runs ----------------------------------------------------------------

    def start_run(self) -> ActiveRun:
        """Open a run under the active experiment and make it the log target."""
        if self._experiment is None:
            raise ClientError("no active experiment: call set_experiment first")
        if self._active_run is not None:
            raise ClientError(f"a run is already active ({self._active_run.run_id})")
        doc = self._request(
            "POST", "/api/v1/runs", json={"experiment_id": self._experiment.experiment_id}
        ).json()
        run = ActiveRun(self, doc)
        self._active_run = run
        return run

    def active_run(self) -> ActiveRun | None:
        return self._active_run

    def _finish_run(self, run: ActiveRun, status: str) -> None:
        try:
            self._request("PATCH", f"/api/v1/runs/{run.run_id}", json={"status": status})
        finally:
            if self._active_run is run:
                self._active_run = None

    def _target(self) -> str:
        if self._active_run is None:
            raise ClientError("no active run: call start_run first")
        return self._active_run.run_id

    def get_run(self, run_id: str) -> dict[str, Any]:
        """Full run document exactly as the server serializes it."""
        return self._request("GET", f"/api/v1/runs/{run_id}").json()

    # -- logging -------------------------------------------------------------

    def set_tag(self, key: str, value: Any) -> None:
        """Set a tag on the active run; non-strings are stringified."""
        self._request(
            "POST",
            f"/api/v1/runs/{self._target()}/tags",
            json={"key": key, "value": _as_str(value)},
        )

    def log_param(self, key: str, value: Any) -> None:
        """Record a param on the active run; non-strings are stringified.

        Params are write-once: re-logging a different value for the same key
        surfaces the server's conflict error unchanged.
        """
        self._request(
            "POST",
            f"/api/v1/runs/{self._target()}/params",
            json={"key": key, "value": _as_str(value)},
        )

    def log_metric(
        self, key: str, value: float, step: int = 0, timestamp: int | None = None
    ) -> None:
        """Append one metric point to the active run."""
        self._request(
            "POST",
            f"/api/v1/runs/{self._target()}/metrics",
            json={
                "key": key,
                "value": value,
                "timestamp": _now_ms() if timestamp is None else timestamp,
                "step": step,
            },
        )

    def _put_artifact(self, path: str, data: bytes, media_type: str) -> None:
        run_id = self._target()
        self._request(
            "PUT",
            f"/api/v1/runs/{run_id}/artifacts/{quote(path, safe='/')}",
            content=data,
            headers={"content-type": media_type},
        )

    def log_text(self, text: str, path: str) -> None:
        """Store a UTF-8 text artifact under the given path."""
        self._put_artifact(path, text.encode("utf-8"), "text/plain; charset=utf-8")

    def log_dict(self, obj: Any, path: str) -> None:
        """Store an object as a canonical-JSON artifact.

        Serialization happens before any network traffic, so an object that
        is not JSON-serializable fails client-side and uploads nothing.
        """
        try:
            rendered = _canonical_json(obj)
        except (TypeError, ValueError) as exc:
            raise ClientError(f"object is not JSON-serializable: {exc}") from exc
        self._put_artifact(path, rendered.encode("utf-8"), "application/json")

    def log_image(self, data: bytes, path: str) -> None:
        """Store already-encoded PNG bytes under the given path."""
        if not isinstance(data, (bytes, bytearray)):
            raise ClientError(f"image data must be bytes (got {type(data).__name__})")
        self._put_artifact(path, bytes(data), "image/png")

    def log_figure(self, figure: Any, path: str) -> None:
        """Render a matplotlib figure to PNG and store it."""
        buf = io.BytesIO()
        figure.savefig(buf, format="png")
        self.log_image(buf.getvalue(), path)

    def log_calibration(self, calibration: dict[str, Any]) -> None:
        """Attach calibration provenance and mirror it as an artifact.

        The raw payload is posted as the run's calibration record and, once
        the server accepts it, also stored verbatim as the
        calibration_data.json artifact, so the queryable record and the
        inspectable file can never describe different sets.
        """
        run_id = self._target()
        self._request(
            "POST", f"/api/v1/runs/{run_id}/provenance", json={"calibration": calibration}
        )
        self.log_dict(calibration, "calibration_data.json")

    def log_execution(
        self,
        shots: int,
        counts: dict[str, int],
        backend_name: str,
        calibration_set_id: str | None = None,
        submitted_at: int | None = None,
        completed_at: int | None = None,
    ) -> None:
        """Attach execution provenance (shot count, raw counts, backend)."""
        now = _now_ms()
        record: dict[str, Any] = {
            "shots": shots,
            "counts": counts,
            "backend_name": backend_name,
            "submitted_at": now if submitted_at is None else submitted_at,
            "completed_at": now if completed_at is None else completed_at,
        }
        if calibration_set_id is not None:
            record["calibration_set_id"] = calibration_set_id
        self._request(
            "POST", f"/api/v1/runs/{self._target()}/provenance", json={"execution": record}
        )

    # -- search --------------------------------------------------------------

    def search_runs(
        self,
        experiment_ids: list[str],
        filter: str | None = None,
        order_by: list[str] | None = None,
        max_results: int | None = None,
    ) -> pd.DataFrame:
        """Search runs and return them as one row per run.

        Pages are fetched until the server is exhausted (or max_results rows
        have arrived) and flattened into columns: run_id, experiment_id,
        status, start_time, end_time, then params.*, metrics.* (the latest
        point by step, then timestamp), and tags.*. Rows keep the server's
        order; an empty result keeps the base columns.
        """
        body: dict[str, Any] = {"experiment_ids": list(experiment_ids)}
        if filter:
            body["filter"] = filter
        if order_by is not None:
            body["order_by"] = list(order_by)
        page_size = self.search_page_size
        body["max_results"] = page_size if max_results is None else min(max_results, page_size)

        docs: list[dict[str, Any]] = []
        token: str | None = None
        while True:
            page_body = dict(body)
            if token is not None:
                page_body["page_token"] = token
            page = self._request("POST", "/api/v1/runs/search", json=page_body).json()
            docs.extend(page["items"])
            token = page.get("next_page_token")
            if token is None or (max_results is not None and len(docs) >= max_results):
                break
        if max_results is not None:
            docs = docs[:max_results]

        rows = []
        for doc in docs:
            row: dict[str, Any] = {col: doc.get(col) for col in _BASE_COLUMNS}
            for key, value in doc.get("params", {}).items():
                row[f"params.{key}"] = value
            for key, points in doc.get("metrics", {}).items():
                if points:
                    row[f"metrics.{key}"] = _latest_value(points)
            for key, value in doc.get("tags", {}).items():
                row[f"tags.{key}"] = value
            rows.append(row)

        extras = sorted(
            {key for row in rows for key in row if key not in _BASE_COLUMNS},
            key=lambda col: (_COLUMN_GROUPS[col.split(".", 1)[0] + "."], col),
        )
        return pd.DataFrame(rows, columns=_BASE_COLUMNS + extras)


# -- module-level fluent API --------------------------------------------------

_default_client: TrackingClient | None = None


def _client() -> TrackingClient:
    global _default_client
    if _default_client is None:
        _default_client = TrackingClient()
    return _default_client


def set_tracking_uri(uri: str) -> None:
    """Point the fluent API at a server, resetting any fluent state."""
    global _default_client
    if _default_client is not None:
        _default_client.close()
    _default_client = TrackingClient(tracking_uri=uri)


def get_tracking_uri() -> str:
    return _client().tracking_uri


def set_experiment(name: str) -> Experiment:
    return _client().set_experiment(name)


def get_experiment_by_name(name: str) -> Experiment | None:
    return _client().get_experiment_by_name(name)


def start_run() -> ActiveRun:
    return _client().start_run()


def active_run() -> ActiveRun | None:
    return _client().active_run()


def get_run(run_id: str) -> dict[str, Any]:
    return _client().get_run(run_id)


def set_tag(key: str, value: Any) -> None:
    _client().set_tag(key, value)


def log_param(key: str, value: Any) -> None:
    _client().log_param(key, value)


def log_metric(key: str, value: float, step: int = 0, timestamp: int | None = None) -> None:
    _client().log_metric(key, value, step=step, timestamp=timestamp)


def log_text(text: str, path: str) -> None:
    _client().log_text(text, path)


def log_dict(obj: Any, path: str) -> None:
    _client().log_dict(obj, path)


def log_image(data: bytes, path: str) -> None:
    _client().log_image(data, path)


def log_figure(figure: Any, path: str) -> None:
    _client().log_figure(figure, path)


def log_calibration(calibration: dict[str, Any]) -> None:
    _client().log_calibration(calibration)


def log_execution(
    shots: int,
    counts: dict[str, int],
    backend_name: str,
    calibration_set_id: str | None = None,
    submitted_at: int | None = None,
    completed_at: int | None = None,
) -> None:
    _client().log_execution(
        shots,
        counts,
        backend_name,
        calibration_set_id=calibration_set_id,
        submitted_at=submitted_at,
        completed_at=completed_at,
    )


def search_runs(
    experiment_ids: list[str],
    filter: str | None = None,
    order_by: list[str] | None = None,
    max_results: int | None = None,
) -> pd.DataFrame:
    return _client().search_runs(
        experiment_ids, filter=filter, order_by=order_by, max_results=max_results
    )

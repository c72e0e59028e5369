"""HTTP tracking service over one store root.

All endpoints live under /api/v1 and speak the canonical JSON serialization
on both directions. Every non-2xx body has exactly the shape
{"error_code": ..., "message": ...} with codes RESOURCE_NOT_FOUND (404),
RESOURCE_CONFLICT (409), INVALID_PARAMETER (400), INVALID_STATE (409),
INTERNAL (500). Request bodies are parsed by hand: unknown fields are
rejected so client drift fails loudly instead of silently dropping data.

Writes to a run in a terminal status are rejected with INVALID_STATE and
never partially applied. An optional static bearer token locks the API
down; the health endpoint and static UI stay open.
"""

from __future__ import annotations

import hmac
import json
from typing import Any

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import PlainTextResponse, Response
from starlette.exceptions import HTTPException as StarletteHTTPException

from qtrack.core.calibration import diff_calibration
from qtrack.core.records import (
    CalibrationSet,
    CircuitRecord,
    CompilationRecord,
    Experiment,
    ExecutionRecord,
    Lifecycle,
    MetricPoint,
    Run,
    RunStatus,
    canonical_json,
    new_id,
    now_ms,
)
from qtrack.core.runs import (
    ensure_writable,
    latest_metric_point,
    run_with_param,
    run_with_provenance,
    run_with_status,
    run_with_tag,
)
from qtrack.core.validation import (
    format_violations,
    validate_calibration,
    validate_circuit_record,
    validate_compilation_record,
    validate_execution_record,
)
from qtrack.errors import (
    ConflictError,
    InvalidParameterError,
    InvalidStateError,
    NotFoundError,
    QTrackError,
)
from qtrack.query.search import DEFAULT_MAX_RESULTS, search_runs
from qtrack.storage.store import Store

ERROR_STATUS = {
    "RESOURCE_NOT_FOUND": 404,
    "RESOURCE_CONFLICT": 409,
    "INVALID_PARAMETER": 400,
    "INVALID_STATE": 409,
    "INTERNAL": 500,
}

_EXCEPTION_CODES: list[tuple[type[QTrackError], str]] = [
    (NotFoundError, "RESOURCE_NOT_FOUND"),
    (ConflictError, "RESOURCE_CONFLICT"),
    (InvalidStateError, "INVALID_STATE"),
    (InvalidParameterError, "INVALID_PARAMETER"),
    (QTrackError, "INTERNAL"),
]


def _json_response(payload: Any, status_code: int = 200) -> Response:
    return Response(
        content=canonical_json(payload),
        status_code=status_code,
        media_type="application/json",
    )


def _error_response(code: str, message: str, status_code: int | None = None) -> Response:
    body = {"error_code": code, "message": message}
    return _json_response(body, status_code or ERROR_STATUS[code])


async def _json_body(request: Request) -> dict[str, Any]:
    raw = await request.body()
    if not raw:
        raise InvalidParameterError("request body must be a JSON object")
    try:
        body = json.loads(raw)
    except ValueError:
        raise InvalidParameterError("request body is not valid JSON") from None
    if not isinstance(body, dict):
        raise InvalidParameterError("request body must be a JSON object")
    return body


def _allow_fields(body: dict[str, Any], *names: str) -> None:
    for key in body:
        if key not in names:
            raise InvalidParameterError(f"unknown field {key!r}")


def _req_str(body: dict[str, Any], name: str) -> str:
    value = body.get(name)
    if not isinstance(value, str):
        raise InvalidParameterError(f"field {name!r} must be a string")
    return value


def _opt_str(body: dict[str, Any], name: str) -> str | None:
    value = body.get(name)
    if value is None:
        return None
    if not isinstance(value, str):
        raise InvalidParameterError(f"field {name!r} must be a string")
    return value


def _opt_int(body: dict[str, Any], name: str) -> int | None:
    value = body.get(name)
    if value is None:
        return None
    if isinstance(value, bool) or not isinstance(value, int):
        raise InvalidParameterError(f"field {name!r} must be an integer")
    return value


def _req_number(body: dict[str, Any], name: str) -> float:
    value = body.get(name)
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise InvalidParameterError(f"field {name!r} must be a number")
    return float(value)


def _str_map(body: dict[str, Any], name: str) -> dict[str, str]:
    value = body.get(name)
    if value is None:
        return {}
    if not isinstance(value, dict) or not all(
        isinstance(k, str) and isinstance(v, str) for k, v in value.items()
    ):
        raise InvalidParameterError(f"field {name!r} must be a string-to-string map")
    return value


def _str_list(body: dict[str, Any], name: str) -> list[str]:
    value = body.get(name)
    if not isinstance(value, list) or not all(isinstance(v, str) for v in value):
        raise InvalidParameterError(f"field {name!r} must be a list of strings")
    return value


def _parse_metric_point(raw: Any) -> MetricPoint:
    if not isinstance(raw, dict):
        raise InvalidParameterError("each metric point must be a JSON object")
    _allow_fields(raw, "key", "value", "timestamp", "step")
    timestamp = _opt_int(raw, "timestamp")
    if timestamp is None:
        raise InvalidParameterError("field 'timestamp' must be an integer")
    return MetricPoint(
        key=_req_str(raw, "key"),
        value=_req_number(raw, "value"),
        timestamp=timestamp,
        step=_opt_int(raw, "step") or 0,
    )


def create_app(
    store: Store,
    auth_token: str | None = None,
    ui_dir: str | None = None,
) -> FastAPI:
    app = FastAPI(docs_url=None, redoc_url=None, openapi_url=None)
    app.state.store = store

    def _register(exc_type: type[QTrackError], code: str) -> None:
        async def handler(request: Request, exc: Exception) -> Response:
            return _error_response(code, str(exc))

        app.add_exception_handler(exc_type, handler)

    for exc_type, code in _EXCEPTION_CODES:
        _register(exc_type, code)

    @app.exception_handler(StarletteHTTPException)
    async def http_exception(request: Request, exc: StarletteHTTPException) -> Response:
        if exc.status_code == 404:
            return _error_response("RESOURCE_NOT_FOUND", "no such resource")
        return _error_response("INVALID_PARAMETER", str(exc.detail), status_code=400)

    @app.exception_handler(RequestValidationError)
    async def validation_exception(request: Request, exc: RequestValidationError) -> Response:
        return _error_response("INVALID_PARAMETER", "invalid request")

    @app.exception_handler(Exception)
    async def internal_exception(request: Request, exc: Exception) -> Response:
        return _error_response("INTERNAL", "internal server error")

    if auth_token:
        expected = f"Bearer {auth_token}"

        @app.middleware("http")
        async def check_token(request: Request, call_next):
            if not request.url.path.startswith("/api/"):
                return await call_next(request)
            supplied = request.headers.get("authorization", "")
            if not hmac.compare_digest(supplied, expected):
                return _error_response(
                    "INVALID_PARAMETER", "missing or invalid bearer token", status_code=401
                )
            return await call_next(request)

    @app.get("/healthz")
    async def healthz() -> PlainTextResponse:
        return PlainTextResponse("ok")

    # -- experiments --------------------------------------------------------

    @app.post("/api/v1/experiments")
    async def create_experiment(request: Request) -> Response:
        body = await _json_body(request)
        _allow_fields(body, "name", "tags")
        exp = Experiment(
            experiment_id=new_id(),
            name=_req_str(body, "name"),
            creation_time=now_ms(),
            lifecycle=Lifecycle.ACTIVE,
            tags=_str_map(body, "tags"),
        )
        store.create_experiment(exp)
        return _json_response(exp.to_dict(), 201)

    @app.get("/api/v1/experiments")
    async def get_experiments(name: str | None = None) -> Response:
        if name is not None:
            return _json_response(store.get_experiment_by_name(name).to_dict())
        exps = store.list_experiments()
        return _json_response({"experiments": [e.to_dict() for e in exps]})

    # -- runs ---------------------------------------------------------------

    @app.post("/api/v1/runs")
    async def create_run(request: Request) -> Response:
        body = await _json_body(request)
        _allow_fields(body, "experiment_id", "tags")
        experiment_id = _req_str(body, "experiment_id")
        store.get_experiment(experiment_id)
        run = Run(
            run_id=new_id(),
            experiment_id=experiment_id,
            status=RunStatus.RUNNING,
            start_time=now_ms(),
            tags=_str_map(body, "tags"),
        )
        stored = store.put_run(run)
        return _json_response(stored.to_dict(), 201)

    @app.post("/api/v1/runs/search")
    async def search(request: Request) -> Response:
        body = await _json_body(request)
        _allow_fields(
            body, "experiment_ids", "filter", "order_by", "max_results", "page_token"
        )
        order_by = body.get("order_by")
        if order_by is not None:
            order_by = _str_list(body, "order_by")
        max_results = _opt_int(body, "max_results")
        page = search_runs(
            store,
            experiment_ids=_str_list(body, "experiment_ids"),
            filter_text=_opt_str(body, "filter") or "",
            order_by=order_by,
            max_results=DEFAULT_MAX_RESULTS if max_results is None else max_results,
            page_token=_opt_str(body, "page_token"),
        )
        return _json_response(page.to_dict())

    @app.get("/api/v1/runs/{run_id}")
    async def get_run(run_id: str) -> Response:
        return _json_response(store.get_run(run_id).to_dict())

    @app.patch("/api/v1/runs/{run_id}")
    async def patch_run(run_id: str, request: Request) -> Response:
        body = await _json_body(request)
        _allow_fields(body, "status", "end_time")
        status_str = _req_str(body, "status")
        try:
            status = RunStatus(status_str)
        except ValueError:
            raise InvalidParameterError(f"unknown status {status_str!r}") from None
        end_time = _opt_int(body, "end_time")

        def apply(run: Run) -> Run:
            return run_with_status(run, status, now_ms() if end_time is None else end_time)

        return _json_response(store.update_run(run_id, apply).to_dict())

    @app.post("/api/v1/runs/{run_id}/params")
    async def log_param(run_id: str, request: Request) -> Response:
        body = await _json_body(request)
        _allow_fields(body, "key", "value")
        key, value = _req_str(body, "key"), _req_str(body, "value")

        def apply(run: Run) -> Run:
            ensure_writable(run)
            return run_with_param(run, key, value)

        store.update_run(run_id, apply)
        return _json_response({})

    @app.post("/api/v1/runs/{run_id}/tags")
    async def set_tag(run_id: str, request: Request) -> Response:
        body = await _json_body(request)
        _allow_fields(body, "key", "value")
        key, value = _req_str(body, "key"), _req_str(body, "value")

        def apply(run: Run) -> Run:
            ensure_writable(run)
            return run_with_tag(run, key, value)

        store.update_run(run_id, apply)
        return _json_response({})

    # -- metrics ------------------------------------------------------------

    @app.post("/api/v1/runs/{run_id}/metrics")
    async def log_metric(run_id: str, request: Request) -> Response:
        point = _parse_metric_point(await _json_body(request))
        ensure_writable(store.get_run(run_id))
        store.append_metric(run_id, point)
        return _json_response({})

    @app.post("/api/v1/runs/{run_id}/metrics/batch")
    async def log_metric_batch(run_id: str, request: Request) -> Response:
        body = await _json_body(request)
        _allow_fields(body, "points")
        raw_points = body.get("points")
        if not isinstance(raw_points, list):
            raise InvalidParameterError("field 'points' must be a list")
        points = [_parse_metric_point(p) for p in raw_points]
        ensure_writable(store.get_run(run_id))
        store.append_metrics(run_id, points)
        return _json_response({})

    @app.get("/api/v1/runs/{run_id}/metrics/latest")
    async def latest_metrics(run_id: str) -> Response:
        run = store.get_run(run_id)
        latest = {
            key: latest_metric_point(points).to_dict()
            for key, points in sorted(run.metrics.items())
            if points
        }
        return _json_response({"latest": latest})

    # -- artifacts ----------------------------------------------------------

    @app.get("/api/v1/runs/{run_id}/artifacts")
    async def list_artifacts(run_id: str) -> Response:
        refs = store.list_artifacts(run_id)
        return _json_response({"artifacts": [r.to_dict() for r in refs]})

    @app.put("/api/v1/runs/{run_id}/artifacts/{path:path}")
    async def put_artifact(run_id: str, path: str, request: Request) -> Response:
        data = await request.body()
        media_type = request.headers.get("content-type") or "application/octet-stream"
        ensure_writable(store.get_run(run_id))
        ref = store.put_artifact(run_id, path, data, media_type)
        return _json_response(ref.to_dict(), 201)

    @app.get("/api/v1/runs/{run_id}/artifacts/{path:path}")
    async def get_artifact(run_id: str, path: str) -> Response:
        data, ref = store.get_artifact(run_id, path)
        return Response(content=data, media_type=ref.media_type)

    # -- provenance ---------------------------------------------------------

    @app.post("/api/v1/runs/{run_id}/provenance")
    async def attach_provenance(run_id: str, request: Request) -> Response:
        body = await _json_body(request)
        _allow_fields(body, "circuit", "compilation", "calibration", "execution")
        if not body:
            raise InvalidParameterError(
                "at least one of circuit, compilation, calibration, execution is required"
            )
        records: list[tuple[str, Any]] = []
        if "circuit" in body:
            record = CircuitRecord.from_dict(body["circuit"])
            violations = validate_circuit_record(record)
            if violations:
                raise InvalidParameterError(
                    f"invalid circuit record: {format_violations(violations)}"
                )
            records.append(("circuit", record))
        if "compilation" in body:
            record = CompilationRecord.from_dict(body["compilation"])
            violations = validate_compilation_record(record)
            if violations:
                raise InvalidParameterError(
                    f"invalid compilation record: {format_violations(violations)}"
                )
            records.append(("compilation", record))
        if "calibration" in body:
            record = CalibrationSet.from_dict(body["calibration"])
            violations = validate_calibration(record)
            if violations:
                raise InvalidParameterError(
                    f"invalid calibration set: {format_violations(violations)}"
                )
            records.append(("calibration", record))
        if "execution" in body:
            record = ExecutionRecord.from_dict(body["execution"])
            violations = validate_execution_record(record)
            if violations:
                raise InvalidParameterError(
                    f"invalid execution record: {format_violations(violations)}"
                )
            records.append(("execution", record))

        def apply(run: Run) -> Run:
            ensure_writable(run)
            for kind, record in records:
                run = run_with_provenance(run, kind, record)
            return run

        store.update_run(run_id, apply)
        return _json_response({})

    # -- calibration diff -----------------------------------------------------

    @app.post("/api/v1/calibration/diff")
    async def calibration_diff(request: Request) -> Response:
        body = await _json_body(request)
        _allow_fields(body, "base_run_id", "other_run_id")
        sets = []
        for field in ("base_run_id", "other_run_id"):
            run = store.get_run(_req_str(body, field))
            calibration = run.provenance.calibration
            if calibration is None:
                raise NotFoundError(f"run {run.run_id} has no calibration provenance")
            sets.append(calibration)
        diff = diff_calibration(sets[0], sets[1])
        return _json_response(diff.to_dict())

    if ui_dir is not None:
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=ui_dir, html=True), name="ui")

    return app

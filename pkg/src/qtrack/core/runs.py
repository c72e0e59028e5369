"""Functional updates for immutable Run values.

Runs are never mutated in place; each helper returns a new Run (or the
original object when the update is a no-op) and enforces the write rules:
params are immutable once set, tags are last-write-wins, and status only
ever moves RUNNING -> {FINISHED, FAILED, KILLED}.
"""

from __future__ import annotations

from dataclasses import replace
from typing import Iterable

from qtrack.core.records import MetricPoint, Run, RunProvenance, RunStatus
from qtrack.core.validation import format_violations, validate_metric_point
from qtrack.errors import ConflictError, InvalidParameterError, InvalidStateError

TERMINAL_STATUSES = frozenset({RunStatus.FINISHED, RunStatus.FAILED, RunStatus.KILLED})

PROVENANCE_KINDS = ("circuit", "compilation", "calibration", "execution")


def latest_metric_point(points: Iterable[MetricPoint]) -> MetricPoint:
    """Latest point of a history: maximum by (step, timestamp, value).

    The total order makes "latest" deterministic even when appends arrive
    out of order or share timestamps.
    """
    return max(points, key=lambda p: (p.step, p.timestamp, p.value))


def run_with_param(run: Run, key: str, value: str) -> Run:
    """Set a param; re-setting an equal value is a no-op, a different one a conflict."""
    if not key:
        raise InvalidParameterError("param key must be non-empty")
    existing = run.params.get(key)
    if existing is not None:
        if existing == value:
            return run
        raise ConflictError(
            f"param {key!r} already set to {existing!r}; params are immutable"
        )
    return replace(run, params={**run.params, key: value})


def run_with_tag(run: Run, key: str, value: str) -> Run:
    if not key:
        raise InvalidParameterError("tag key must be non-empty")
    if run.tags.get(key) == value:
        return run
    return replace(run, tags={**run.tags, key: value})


def run_with_metric(run: Run, point: MetricPoint) -> Run:
    violations = validate_metric_point(point)
    if violations:
        raise InvalidParameterError(f"invalid metric point: {format_violations(violations)}")
    history = list(run.metrics.get(point.key, []))
    history.append(point)
    return replace(run, metrics={**run.metrics, point.key: history})


def run_with_status(run: Run, status: RunStatus, end_time: int) -> Run:
    """Transition a run's status; only RUNNING -> terminal is legal."""
    if run.status is not RunStatus.RUNNING:
        raise InvalidStateError(
            f"run {run.run_id} is {run.status.value}; status transitions only leave RUNNING"
        )
    if status not in TERMINAL_STATUSES:
        raise InvalidStateError(f"cannot transition RUNNING -> {status.value}")
    if end_time < run.start_time:
        raise InvalidParameterError(
            f"end_time {end_time} must be >= start_time {run.start_time}"
        )
    return replace(run, status=status, end_time=end_time)


def run_with_provenance(run: Run, kind: str, record) -> Run:
    if kind not in PROVENANCE_KINDS:
        raise InvalidParameterError(
            f"unknown provenance kind {kind!r}; expected one of {', '.join(PROVENANCE_KINDS)}"
        )
    provenance = replace(run.provenance, **{kind: record})
    return replace(run, provenance=provenance)


def ensure_writable(run: Run) -> None:
    """Writes to terminal runs are rejected outright."""
    if run.status in TERMINAL_STATUSES:
        raise InvalidStateError(
            f"run {run.run_id} is {run.status.value}; no further writes allowed"
        )

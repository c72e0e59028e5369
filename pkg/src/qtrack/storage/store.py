"""Durable single-node store for experiments, runs, metrics, and artifacts.

On-disk layout under one root directory (all JSON is UTF-8, jsonl files
are append-only with one record per line):

    VERSION                         ASCII layout version + newline
    .lock                           advisory flock; one owner process
    meta/experiments.jsonl          experiment records, last-per-id wins
    runs/<exp_id>/<run_id>/run.json                 run metadata (atomic rewrite)
    runs/<exp_id>/<run_id>/metrics/<key>.jsonl      one metric history per key
    artifacts/by-sha/<aa>/<sha256>                  content-addressed blobs
    artifacts/index/<run_id>.jsonl                  artifact refs per run

Exactly one process owns a store root at a time (the flock guards it).
Within the process, per-run locks serialize run mutations; every write is
fsynced before the call returns, so an operation that reported success
survives a crash. Because of the single-owner rule the store keeps a
write-through cache of runs, making repeated reads and searches cheap.
"""

from __future__ import annotations

import fcntl
import hashlib
import json
import os
import threading
import urllib.parse
from dataclasses import replace
from pathlib import Path

from qtrack.core.records import (
    ArtifactRef,
    Experiment,
    Lifecycle,
    MetricPoint,
    Run,
    RunPage,
    RunStatus,
    canonical_json,
)
from qtrack.core.runs import run_with_metric
from qtrack.core.validation import (
    format_violations,
    validate_experiment,
    validate_metric_point,
)
from qtrack.errors import (
    ConflictError,
    InvalidParameterError,
    InvalidStateError,
    NotFoundError,
    QTrackError,
    StoreLockedError,
    StoreVersionError,
)
from qtrack.storage import fsio
from qtrack.storage.paging import decode_page_token, encode_page_token

LAYOUT_VERSION = 1

# Metric keys are urlencoded into filenames; keys whose encoding would
# overflow common filename limits fall back to a truncated+hashed name.
# The key itself is recovered from the records, never from the filename.
_MAX_METRIC_FILENAME = 150


def _metric_filename(key: str) -> str:
    quoted = urllib.parse.quote(key, safe="")
    if len(quoted) > _MAX_METRIC_FILENAME:
        digest = hashlib.sha256(key.encode("utf-8")).hexdigest()[:16]
        quoted = f"{quoted[:_MAX_METRIC_FILENAME]}.{digest}"
    return f"{quoted}.jsonl"


def validate_artifact_path(path: str) -> None:
    """Reject traversal and other unusable artifact paths."""
    if not path or "\x00" in path or "\\" in path:
        raise InvalidParameterError(f"invalid artifact path {path!r}")
    if any(segment in ("", ".", "..") for segment in path.split("/")):
        raise InvalidParameterError(
            f"invalid artifact path {path!r}: empty, '.' and '..' segments are not allowed"
        )


class Store:
    """Handle on an opened store root. Use :func:`open_store` to obtain one."""

    def __init__(self, root: Path, lock_fd: int | None):
        self.root = root
        self._lock_fd = lock_fd
        self._meta = threading.Lock()
        self._run_locks: dict[str, threading.RLock] = {}
        self._experiments: dict[str, Experiment] = {}
        self._run_exp: dict[str, str] = {}
        self._exp_runs: dict[str, set[str]] = {}
        self._runs: dict[str, Run] = {}
        self._load_experiments()
        self._scan_runs()

    # -- paths -------------------------------------------------------------

    @property
    def _experiments_file(self) -> Path:
        return self.root / "meta" / "experiments.jsonl"

    def _run_dir(self, experiment_id: str, run_id: str) -> Path:
        return self.root / "runs" / experiment_id / run_id

    def _blob_path(self, sha256: str) -> Path:
        return self.root / "artifacts" / "by-sha" / sha256[:2] / sha256

    def _index_path(self, run_id: str) -> Path:
        return self.root / "artifacts" / "index" / f"{run_id}.jsonl"

    # -- lifecycle ----------------------------------------------------------

    def close(self) -> None:
        if self._lock_fd is not None:
            fcntl.flock(self._lock_fd, fcntl.LOCK_UN)
            os.close(self._lock_fd)
            self._lock_fd = None

    def __enter__(self) -> "Store":
        return self

    def __exit__(self, *exc) -> None:
        self.close()

    # -- experiments ---------------------------------------------------------

    def _load_experiments(self) -> None:
        # Clear any crash-torn tail so later appends start on a fresh line.
        fsio.repair_tail(self._experiments_file)
        for record in fsio.read_records(self._experiments_file):
            exp = Experiment.from_dict(record)
            self._experiments[exp.experiment_id] = exp

    def create_experiment(self, exp: Experiment) -> Experiment:
        violations = validate_experiment(exp)
        if violations:
            raise InvalidParameterError(f"invalid experiment: {format_violations(violations)}")
        with self._meta:
            if exp.experiment_id in self._experiments:
                raise ConflictError(f"experiment id {exp.experiment_id} already exists")
            self._check_name_free(exp.name)
            fsio.append_record(self._experiments_file, exp.to_dict())
            self._experiments[exp.experiment_id] = exp
            self._exp_runs.setdefault(exp.experiment_id, set())
        return exp

    def _check_name_free(self, name: str) -> None:
        for other in self._experiments.values():
            if other.lifecycle is Lifecycle.ACTIVE and other.name == name:
                raise ConflictError(f"an active experiment named {name!r} already exists")

    def get_experiment(self, experiment_id: str) -> Experiment:
        with self._meta:
            exp = self._experiments.get(experiment_id)
        if exp is None:
            raise NotFoundError(f"experiment {experiment_id} not found")
        return exp

    def get_experiment_by_name(self, name: str) -> Experiment:
        with self._meta:
            for exp in self._experiments.values():
                if exp.lifecycle is Lifecycle.ACTIVE and exp.name == name:
                    return exp
        raise NotFoundError(f"no active experiment named {name!r}")

    def list_experiments(self, include_deleted: bool = False) -> list[Experiment]:
        with self._meta:
            exps = list(self._experiments.values())
        if not include_deleted:
            exps = [e for e in exps if e.lifecycle is Lifecycle.ACTIVE]
        return sorted(exps, key=lambda e: (e.creation_time, e.experiment_id))

    def set_experiment_lifecycle(self, experiment_id: str, lifecycle: Lifecycle) -> Experiment:
        with self._meta:
            exp = self._experiments.get(experiment_id)
            if exp is None:
                raise NotFoundError(f"experiment {experiment_id} not found")
            if exp.lifecycle is lifecycle:
                return exp
            if lifecycle is Lifecycle.ACTIVE:
                self._check_name_free(exp.name)
            updated = replace(exp, lifecycle=lifecycle)
            fsio.append_record(self._experiments_file, updated.to_dict())
            self._experiments[experiment_id] = updated
        return updated

    # -- runs -----------------------------------------------------------------

    def _scan_runs(self) -> None:
        runs_root = self.root / "runs"
        if not runs_root.exists():
            return
        for exp_dir in runs_root.iterdir():
            if not exp_dir.is_dir():
                continue
            for run_dir in exp_dir.iterdir():
                if run_dir.is_dir() and (run_dir / "run.json").exists():
                    self._run_exp[run_dir.name] = exp_dir.name
                    self._exp_runs.setdefault(exp_dir.name, set()).add(run_dir.name)

    def _lock_for(self, run_id: str) -> threading.RLock:
        with self._meta:
            lock = self._run_locks.get(run_id)
            if lock is None:
                lock = self._run_locks[run_id] = threading.RLock()
            return lock

    def run_exists(self, run_id: str) -> bool:
        with self._meta:
            return run_id in self._run_exp

    def get_run(self, run_id: str) -> Run:
        with self._meta:
            cached = self._runs.get(run_id)
            if cached is not None:
                return cached
            experiment_id = self._run_exp.get(run_id)
        if experiment_id is None:
            raise NotFoundError(f"run {run_id} not found")
        with self._lock_for(run_id):
            with self._meta:
                cached = self._runs.get(run_id)
                if cached is not None:
                    return cached
            run = self._load_run(experiment_id, run_id)
            with self._meta:
                self._runs[run_id] = run
            return run

    def _load_run(self, experiment_id: str, run_id: str) -> Run:
        run_dir = self._run_dir(experiment_id, run_id)
        meta_path = run_dir / "run.json"
        if not meta_path.exists():
            raise NotFoundError(f"run {run_id} not found")
        run = Run.from_dict(json.loads(meta_path.read_text(encoding="utf-8")))
        metrics: dict[str, list[MetricPoint]] = {}
        metrics_dir = run_dir / "metrics"
        if metrics_dir.exists():
            for path in sorted(metrics_dir.glob("*.jsonl")):
                # First load after a crash truncates any torn tail; appends
                # happen only after a load, so they never glue onto one.
                fsio.repair_tail(path)
                for record in fsio.read_records(path):
                    point = MetricPoint.from_dict(record)
                    metrics.setdefault(point.key, []).append(point)
        return replace(
            run,
            metrics=metrics,
            artifacts=self._load_artifact_index(run_id),
        )

    def _write_run_meta(self, run: Run) -> None:
        d = run.to_dict()
        # Metric histories and artifact refs live in their own append-only
        # files; run.json carries only the rewriteable metadata.
        d.pop("metrics", None)
        d.pop("artifacts", None)
        path = self._run_dir(run.experiment_id, run.run_id) / "run.json"
        fsio.atomic_write_bytes(path, canonical_json(d, pretty=True).encode("utf-8"))

    def put_run(self, run: Run) -> Run:
        """Persist a full run value, creating or extending its on-disk state.

        Metric histories and artifact refs already on disk must be a prefix
        of (respectively: consistent with) the given run's; this makes the
        call idempotent and safe for both fresh creates and imports.
        """
        self.get_experiment(run.experiment_id)
        with self._lock_for(run.run_id):
            self._write_run_meta(run)
            run_dir = self._run_dir(run.experiment_id, run.run_id)
            for key, points in run.metrics.items():
                path = run_dir / "metrics" / _metric_filename(key)
                existing = [MetricPoint.from_dict(r) for r in fsio.read_records(path)]
                if existing != points[: len(existing)]:
                    raise ConflictError(
                        f"metric history for {key!r} diverges from stored history"
                    )
                for point in points[len(existing) :]:
                    fsio.append_record(path, point.to_dict())
            stored = {a.path: a for a in self._load_artifact_index(run.run_id)}
            for ref in run.artifacts:
                validate_artifact_path(ref.path)
                prev = stored.get(ref.path)
                if prev is None:
                    fsio.append_record(self._index_path(run.run_id), ref.to_dict())
                elif prev.sha256 != ref.sha256:
                    raise ConflictError(
                        f"artifact {ref.path!r} diverges from stored index entry"
                    )
            with self._meta:
                self._run_exp[run.run_id] = run.experiment_id
                self._exp_runs.setdefault(run.experiment_id, set()).add(run.run_id)
                self._runs.pop(run.run_id, None)
            return self.get_run(run.run_id)

    def update_run(self, run_id: str, fn) -> Run:
        """Apply ``fn`` to the current run under its write lock and persist.

        ``fn`` receives the latest Run and returns a replacement (or the
        same object for a no-op). Used for param/tag/status/provenance
        writes; metric appends have their own append-only path.
        """
        with self._lock_for(run_id):
            run = self.get_run(run_id)
            updated = fn(run)
            if updated is not run:
                self._write_run_meta(updated)
                with self._meta:
                    self._runs[run_id] = updated
            return updated

    def list_runs(
        self, experiment_id: str, max_results: int, page_token: str | None = None
    ) -> RunPage:
        self.get_experiment(experiment_id)
        if max_results < 1:
            raise InvalidParameterError(f"max_results must be >= 1 (got {max_results})")
        runs = self.runs_for_experiments([experiment_id])
        runs.sort(key=lambda r: (-r.start_time, r.run_id))
        scope = f"runs:{experiment_id}"
        offset = decode_page_token(scope, page_token) if page_token else 0
        page = runs[offset : offset + max_results]
        token = None
        if offset + max_results < len(runs):
            token = encode_page_token(scope, offset + max_results)
        return RunPage(items=page, next_page_token=token)

    def runs_for_experiments(self, experiment_ids: list[str]) -> list[Run]:
        out: list[Run] = []
        for experiment_id in experiment_ids:
            self.get_experiment(experiment_id)
            with self._meta:
                run_ids = sorted(self._exp_runs.get(experiment_id, ()))
            out.extend(self.get_run(run_id) for run_id in run_ids)
        return out

    # -- metrics ---------------------------------------------------------------

    def _check_metric_writable(self, run: Run) -> None:
        if run.status not in (RunStatus.RUNNING, RunStatus.FINISHED):
            raise InvalidStateError(
                f"run {run.run_id} is {run.status.value}; metric appends need RUNNING or FINISHED"
            )

    def append_metric(self, run_id: str, point: MetricPoint) -> None:
        self.append_metrics(run_id, [point])

    def append_metrics(self, run_id: str, points: list[MetricPoint]) -> None:
        """Append a batch of points; validation is all-or-nothing."""
        for point in points:
            violations = validate_metric_point(point)
            if violations:
                raise InvalidParameterError(
                    f"invalid metric point: {format_violations(violations)}"
                )
        with self._lock_for(run_id):
            run = self.get_run(run_id)
            self._check_metric_writable(run)
            run_dir = self._run_dir(run.experiment_id, run_id)
            for point in points:
                path = run_dir / "metrics" / _metric_filename(point.key)
                fsio.append_record(path, point.to_dict())
                run = run_with_metric(run, point)
            with self._meta:
                self._runs[run_id] = run

    # -- artifacts ---------------------------------------------------------------

    def _load_artifact_index(self, run_id: str) -> list[ArtifactRef]:
        refs: dict[str, ArtifactRef] = {}
        fsio.repair_tail(self._index_path(run_id))
        for record in fsio.read_records(self._index_path(run_id)):
            ref = ArtifactRef.from_dict(record)
            refs[ref.path] = ref
        return sorted(refs.values(), key=lambda r: r.path)

    def put_artifact(self, run_id: str, path: str, data: bytes, media_type: str) -> ArtifactRef:
        """Store bytes under a content address and index them for the run.

        Re-putting identical bytes at the same path is a no-op returning the
        existing ref; the same path with different bytes is a conflict.
        """
        validate_artifact_path(path)
        sha = hashlib.sha256(data).hexdigest()
        with self._lock_for(run_id):
            run = self.get_run(run_id)
            existing = {a.path: a for a in run.artifacts}
            prev = existing.get(path)
            if prev is not None and prev.sha256 != sha:
                raise ConflictError(
                    f"artifact {path!r} already exists with different content"
                )
            blob = self._blob_path(sha)
            if not blob.exists():
                fsio.atomic_write_bytes(blob, data)
            if prev is not None:
                return prev
            ref = ArtifactRef(
                run_id=run_id,
                path=path,
                sha256=sha,
                size_bytes=len(data),
                media_type=media_type,
            )
            fsio.append_record(self._index_path(run_id), ref.to_dict())
            updated = replace(
                run, artifacts=sorted([*run.artifacts, ref], key=lambda r: r.path)
            )
            with self._meta:
                self._runs[run_id] = updated
            return ref

    def import_blob(self, sha256: str, data: bytes) -> None:
        """Store raw artifact bytes under their content address (bundle import)."""
        if hashlib.sha256(data).hexdigest() != sha256:
            raise InvalidParameterError(f"blob does not hash to {sha256}")
        blob = self._blob_path(sha256)
        if not blob.exists():
            fsio.atomic_write_bytes(blob, data)

    def get_artifact(self, run_id: str, path: str) -> tuple[bytes, ArtifactRef]:
        run = self.get_run(run_id)
        for ref in run.artifacts:
            if ref.path == path:
                blob = self._blob_path(ref.sha256)
                if not blob.exists():
                    raise QTrackError(f"blob {ref.sha256} missing for artifact {path!r}")
                data = blob.read_bytes()
                if hashlib.sha256(data).hexdigest() != ref.sha256:
                    raise QTrackError(f"blob {ref.sha256} failed hash verification")
                return data, ref
        raise NotFoundError(f"run {run_id} has no artifact at {path!r}")

    def list_artifacts(self, run_id: str) -> list[ArtifactRef]:
        return list(self.get_run(run_id).artifacts)


def open_store(
    root_path: str | os.PathLike,
    create_if_missing: bool = False,
    acquire_lock: bool = True,
) -> Store:
    """Open (optionally creating) a store root and take process ownership.

    Raises ``NotFoundError`` when the root is not an initialized store and
    creation was not requested, ``StoreVersionError`` on a layout-version
    mismatch, and ``StoreLockedError`` when another process holds the root.
    """
    root = Path(root_path)
    version_file = root / "VERSION"
    if version_file.exists():
        content = version_file.read_text(encoding="ascii")
        if content != f"{LAYOUT_VERSION}\n":
            raise StoreVersionError(
                f"store at {root} has layout version {content.strip()!r}; "
                f"this build supports {LAYOUT_VERSION}"
            )
    else:
        if not create_if_missing:
            raise NotFoundError(f"no store at {root} (missing VERSION file)")
        if root.exists() and any(root.iterdir()):
            raise InvalidParameterError(
                f"refusing to initialize a store in non-empty directory {root}"
            )
        root.mkdir(parents=True, exist_ok=True)
        (root / "meta").mkdir()
        (root / "runs").mkdir()
        (root / "artifacts").mkdir()
        fsio.atomic_write_bytes(version_file, f"{LAYOUT_VERSION}\n".encode("ascii"))

    lock_fd: int | None = None
    if acquire_lock:
        lock_fd = os.open(root / ".lock", os.O_CREAT | os.O_RDWR, 0o644)
        try:
            fcntl.flock(lock_fd, fcntl.LOCK_EX | fcntl.LOCK_NB)
        except OSError:
            os.close(lock_fd)
            raise StoreLockedError(
                f"store at {root} is locked by another process"
            ) from None
    try:
        return Store(root, lock_fd)
    except BaseException:
        if lock_fd is not None:
            os.close(lock_fd)
        raise

"""Domain record types and their canonical JSON serialization.

Every type serializes to a JSON object with snake_case field names;
timestamps are integer milliseconds since the Unix epoch, digests and ids
lowercase hex. That serialization is both the storage format and the wire
format. Map keys are emitted sorted and optional fields are omitted when
absent, so serializing the same value twice yields identical bytes.

Instances are immutable values; all updates go through the functional
helpers in :mod:`qtrack.core.runs`.
"""

from __future__ import annotations

import json
import time
import uuid
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Mapping

from qtrack.errors import InvalidParameterError


def now_ms() -> int:
    """Current wall-clock time in integer milliseconds."""
    return time.time_ns() // 1_000_000


def new_id() -> str:
    """Fresh 128-bit random id rendered as 32-char lowercase hex."""
    return uuid.uuid4().hex


def canonical_json(obj: Any, *, pretty: bool = False) -> str:
    """Render an already-canonical dict (or list) as JSON text.

    Compact form is used for jsonl records and wire bodies, the pretty form
    for human-inspectable files such as run.json and CLI output.
    """
    if pretty:
        return json.dumps(obj, ensure_ascii=False, indent=2) + "\n"
    return json.dumps(obj, ensure_ascii=False, separators=(",", ":"))


class Lifecycle(str, Enum):
    ACTIVE = "active"
    DELETED = "deleted"


class RunStatus(str, Enum):
    RUNNING = "RUNNING"
    FINISHED = "FINISHED"
    FAILED = "FAILED"
    KILLED = "KILLED"


class CircuitFormat(str, Enum):
    OPENQASM3_TEXT = "openqasm3-text"
    VENDOR_OPAQUE = "vendor-opaque"


# ---------------------------------------------------------------------------
# from_dict helpers
# ---------------------------------------------------------------------------


def _fail(type_name: str, field_name: str, expected: str) -> InvalidParameterError:
    return InvalidParameterError(f"{type_name}.{field_name}: expected {expected}")


def _get_str(d: Mapping[str, Any], key: str, type_name: str) -> str:
    v = d.get(key)
    if not isinstance(v, str):
        raise _fail(type_name, key, "a string")
    return v


def _get_int(d: Mapping[str, Any], key: str, type_name: str) -> int:
    v = d.get(key)
    if isinstance(v, bool) or not isinstance(v, int):
        raise _fail(type_name, key, "an integer")
    return v


def _get_float(d: Mapping[str, Any], key: str, type_name: str) -> float:
    v = d.get(key)
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise _fail(type_name, key, "a number")
    return float(v)


def _get_str_map(d: Mapping[str, Any], key: str, type_name: str) -> dict[str, str]:
    v = d.get(key, {})
    if not isinstance(v, dict) or any(
        not isinstance(k, str) or not isinstance(x, str) for k, x in v.items()
    ):
        raise _fail(type_name, key, "a string-to-string map")
    return dict(v)


def _get_opt_int(d: Mapping[str, Any], key: str, type_name: str) -> int | None:
    if d.get(key) is None:
        return None
    return _get_int(d, key, type_name)


def _require_dict(value: Any, type_name: str) -> Mapping[str, Any]:
    if not isinstance(value, dict):
        raise InvalidParameterError(f"{type_name}: expected a JSON object")
    return value


def _enum(value: Any, enum_cls: type, type_name: str, field_name: str):
    try:
        return enum_cls(value)
    except ValueError:
        allowed = ", ".join(e.value for e in enum_cls)  # type: ignore[attr-defined]
        raise _fail(type_name, field_name, f"one of: {allowed}") from None


# ---------------------------------------------------------------------------
# Experiments and runs
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Experiment:
    experiment_id: str
    name: str
    creation_time: int
    lifecycle: Lifecycle = Lifecycle.ACTIVE
    tags: dict[str, str] = field(default_factory=dict)

    def to_dict(self) -> dict[str, Any]:
        return {
            "experiment_id": self.experiment_id,
            "name": self.name,
            "creation_time": self.creation_time,
            "lifecycle": self.lifecycle.value,
            "tags": dict(sorted(self.tags.items())),
        }

    @staticmethod
    def from_dict(d: Any) -> "Experiment":
        d = _require_dict(d, "Experiment")
        return Experiment(
            experiment_id=_get_str(d, "experiment_id", "Experiment"),
            name=_get_str(d, "name", "Experiment"),
            creation_time=_get_int(d, "creation_time", "Experiment"),
            lifecycle=_enum(d.get("lifecycle", "active"), Lifecycle, "Experiment", "lifecycle"),
            tags=_get_str_map(d, "tags", "Experiment"),
        )


@dataclass(frozen=True)
class MetricPoint:
    key: str
    value: float
    timestamp: int
    step: int = 0

    def to_dict(self) -> dict[str, Any]:
        return {"key": self.key, "value": self.value, "timestamp": self.timestamp, "step": self.step}

    @staticmethod
    def from_dict(d: Any) -> "MetricPoint":
        d = _require_dict(d, "MetricPoint")
        return MetricPoint(
            key=_get_str(d, "key", "MetricPoint"),
            value=_get_float(d, "value", "MetricPoint"),
            timestamp=_get_int(d, "timestamp", "MetricPoint"),
            step=_get_int(d, "step", "MetricPoint") if d.get("step") is not None else 0,
        )


@dataclass(frozen=True)
class ArtifactRef:
    run_id: str
    path: str
    sha256: str
    size_bytes: int
    media_type: str

    def to_dict(self) -> dict[str, Any]:
        return {
            "run_id": self.run_id,
            "path": self.path,
            "sha256": self.sha256,
            "size_bytes": self.size_bytes,
            "media_type": self.media_type,
        }

    @staticmethod
    def from_dict(d: Any) -> "ArtifactRef":
        d = _require_dict(d, "ArtifactRef")
        return ArtifactRef(
            run_id=_get_str(d, "run_id", "ArtifactRef"),
            path=_get_str(d, "path", "ArtifactRef"),
            sha256=_get_str(d, "sha256", "ArtifactRef"),
            size_bytes=_get_int(d, "size_bytes", "ArtifactRef"),
            media_type=_get_str(d, "media_type", "ArtifactRef"),
        )


# ---------------------------------------------------------------------------
# Provenance records
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CircuitRecord:
    name: str
    qubit_count: int
    depth: int
    gate_counts: dict[str, int]
    format: CircuitFormat
    source: str
    digest: str

    def to_dict(self) -> dict[str, Any]:
        return {
            "name": self.name,
            "qubit_count": self.qubit_count,
            "depth": self.depth,
            "gate_counts": dict(sorted(self.gate_counts.items())),
            "format": self.format.value,
            "source": self.source,
            "digest": self.digest,
        }

    @staticmethod
    def from_dict(d: Any) -> "CircuitRecord":
        d = _require_dict(d, "CircuitRecord")
        counts = d.get("gate_counts", {})
        if not isinstance(counts, dict) or any(
            not isinstance(k, str) or isinstance(v, bool) or not isinstance(v, int)
            for k, v in counts.items()
        ):
            raise _fail("CircuitRecord", "gate_counts", "a string-to-integer map")
        return CircuitRecord(
            name=_get_str(d, "name", "CircuitRecord"),
            qubit_count=_get_int(d, "qubit_count", "CircuitRecord"),
            depth=_get_int(d, "depth", "CircuitRecord"),
            gate_counts=dict(counts),
            format=_enum(d.get("format"), CircuitFormat, "CircuitRecord", "format"),
            source=_get_str(d, "source", "CircuitRecord"),
            digest=_get_str(d, "digest", "CircuitRecord"),
        )


@dataclass(frozen=True)
class QubitCalibration:
    qubit_index: int
    t1_us: float
    t2_us: float
    readout_fidelity: float

    def to_dict(self) -> dict[str, Any]:
        return {
            "qubit_index": self.qubit_index,
            "t1_us": self.t1_us,
            "t2_us": self.t2_us,
            "readout_fidelity": self.readout_fidelity,
        }

    @staticmethod
    def from_dict(d: Any) -> "QubitCalibration":
        d = _require_dict(d, "QubitCalibration")
        return QubitCalibration(
            qubit_index=_get_int(d, "qubit_index", "QubitCalibration"),
            t1_us=_get_float(d, "t1_us", "QubitCalibration"),
            t2_us=_get_float(d, "t2_us", "QubitCalibration"),
            readout_fidelity=_get_float(d, "readout_fidelity", "QubitCalibration"),
        )


@dataclass(frozen=True)
class GateFidelity:
    gate_name: str
    qubit_indices: tuple[int, ...]
    fidelity: float

    def to_dict(self) -> dict[str, Any]:
        return {
            "gate_name": self.gate_name,
            "qubit_indices": list(self.qubit_indices),
            "fidelity": self.fidelity,
        }

    @staticmethod
    def from_dict(d: Any) -> "GateFidelity":
        d = _require_dict(d, "GateFidelity")
        idx = d.get("qubit_indices")
        if not isinstance(idx, list) or any(
            isinstance(i, bool) or not isinstance(i, int) for i in idx
        ):
            raise _fail("GateFidelity", "qubit_indices", "a list of integers")
        return GateFidelity(
            gate_name=_get_str(d, "gate_name", "GateFidelity"),
            qubit_indices=tuple(idx),
            fidelity=_get_float(d, "fidelity", "GateFidelity"),
        )


@dataclass(frozen=True)
class CalibrationSet:
    calibration_set_id: str
    device_name: str
    qubit_count: int
    timestamp: int
    qubits: tuple[QubitCalibration, ...]
    gates: tuple[GateFidelity, ...]

    def to_dict(self) -> dict[str, Any]:
        return {
            "calibration_set_id": self.calibration_set_id,
            "device_name": self.device_name,
            "qubit_count": self.qubit_count,
            "timestamp": self.timestamp,
            "qubits": [q.to_dict() for q in self.qubits],
            "gates": [g.to_dict() for g in self.gates],
        }

    @staticmethod
    def from_dict(d: Any) -> "CalibrationSet":
        d = _require_dict(d, "CalibrationSet")
        qubits = d.get("qubits")
        gates = d.get("gates", [])
        if not isinstance(qubits, list):
            raise _fail("CalibrationSet", "qubits", "a list")
        if not isinstance(gates, list):
            raise _fail("CalibrationSet", "gates", "a list")
        return CalibrationSet(
            calibration_set_id=_get_str(d, "calibration_set_id", "CalibrationSet"),
            device_name=_get_str(d, "device_name", "CalibrationSet"),
            qubit_count=_get_int(d, "qubit_count", "CalibrationSet"),
            timestamp=_get_int(d, "timestamp", "CalibrationSet"),
            qubits=tuple(QubitCalibration.from_dict(q) for q in qubits),
            gates=tuple(GateFidelity.from_dict(g) for g in gates),
        )


@dataclass(frozen=True)
class CompilationRecord:
    compiler_name: str
    compiler_version: str
    optimization_level: int
    input_digest: str
    output_digest: str
    qubit_mapping: dict[int, int]

    def to_dict(self) -> dict[str, Any]:
        return {
            "compiler_name": self.compiler_name,
            "compiler_version": self.compiler_version,
            "optimization_level": self.optimization_level,
            "input_digest": self.input_digest,
            "output_digest": self.output_digest,
            "qubit_mapping": {str(k): v for k, v in sorted(self.qubit_mapping.items())},
        }

    @staticmethod
    def from_dict(d: Any) -> "CompilationRecord":
        d = _require_dict(d, "CompilationRecord")
        raw = d.get("qubit_mapping", {})
        if not isinstance(raw, dict):
            raise _fail("CompilationRecord", "qubit_mapping", "an index-to-index map")
        mapping: dict[int, int] = {}
        for k, v in raw.items():
            if isinstance(v, bool) or not isinstance(v, int):
                raise _fail("CompilationRecord", "qubit_mapping", "an index-to-index map")
            try:
                mapping[int(k)] = v
            except (TypeError, ValueError):
                raise _fail("CompilationRecord", "qubit_mapping", "an index-to-index map") from None
        return CompilationRecord(
            compiler_name=_get_str(d, "compiler_name", "CompilationRecord"),
            compiler_version=_get_str(d, "compiler_version", "CompilationRecord"),
            optimization_level=_get_int(d, "optimization_level", "CompilationRecord"),
            input_digest=_get_str(d, "input_digest", "CompilationRecord"),
            output_digest=_get_str(d, "output_digest", "CompilationRecord"),
            qubit_mapping=mapping,
        )


@dataclass(frozen=True)
class ExecutionRecord:
    shots: int
    counts: dict[str, int]
    backend_name: str
    submitted_at: int
    completed_at: int
    calibration_set_id: str | None = None

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {
            "shots": self.shots,
            "counts": dict(sorted(self.counts.items())),
            "backend_name": self.backend_name,
        }
        if self.calibration_set_id is not None:
            out["calibration_set_id"] = self.calibration_set_id
        out["submitted_at"] = self.submitted_at
        out["completed_at"] = self.completed_at
        return out

    @staticmethod
    def from_dict(d: Any) -> "ExecutionRecord":
        d = _require_dict(d, "ExecutionRecord")
        counts = d.get("counts")
        if not isinstance(counts, dict) or any(
            not isinstance(k, str) or isinstance(v, bool) or not isinstance(v, int)
            for k, v in counts.items()
        ):
            raise _fail("ExecutionRecord", "counts", "a bitstring-to-integer map")
        cal = d.get("calibration_set_id")
        if cal is not None and not isinstance(cal, str):
            raise _fail("ExecutionRecord", "calibration_set_id", "a string")
        return ExecutionRecord(
            shots=_get_int(d, "shots", "ExecutionRecord"),
            counts=dict(counts),
            backend_name=_get_str(d, "backend_name", "ExecutionRecord"),
            calibration_set_id=cal,
            submitted_at=_get_int(d, "submitted_at", "ExecutionRecord"),
            completed_at=_get_int(d, "completed_at", "ExecutionRecord"),
        )


@dataclass(frozen=True)
class QubitDelta:
    qubit_index: int
    d_t1_us: float
    d_t2_us: float
    d_readout_fidelity: float

    def to_dict(self) -> dict[str, Any]:
        return {
            "qubit_index": self.qubit_index,
            "d_t1_us": self.d_t1_us,
            "d_t2_us": self.d_t2_us,
            "d_readout_fidelity": self.d_readout_fidelity,
        }

    @staticmethod
    def from_dict(d: Any) -> "QubitDelta":
        d = _require_dict(d, "QubitDelta")
        return QubitDelta(
            qubit_index=_get_int(d, "qubit_index", "QubitDelta"),
            d_t1_us=_get_float(d, "d_t1_us", "QubitDelta"),
            d_t2_us=_get_float(d, "d_t2_us", "QubitDelta"),
            d_readout_fidelity=_get_float(d, "d_readout_fidelity", "QubitDelta"),
        )


@dataclass(frozen=True)
class GateDelta:
    gate_name: str
    qubit_indices: tuple[int, ...]
    d_fidelity: float

    def to_dict(self) -> dict[str, Any]:
        return {
            "gate_name": self.gate_name,
            "qubit_indices": list(self.qubit_indices),
            "d_fidelity": self.d_fidelity,
        }

    @staticmethod
    def from_dict(d: Any) -> "GateDelta":
        d = _require_dict(d, "GateDelta")
        idx = d.get("qubit_indices")
        if not isinstance(idx, list):
            raise _fail("GateDelta", "qubit_indices", "a list of integers")
        return GateDelta(
            gate_name=_get_str(d, "gate_name", "GateDelta"),
            qubit_indices=tuple(idx),
            d_fidelity=_get_float(d, "d_fidelity", "GateDelta"),
        )


@dataclass(frozen=True)
class CalibrationDiff:
    base_id: str
    other_id: str
    qubit_deltas: tuple[QubitDelta, ...]
    gate_deltas: tuple[GateDelta, ...]
    added_qubits: tuple[int, ...]
    removed_qubits: tuple[int, ...]

    def to_dict(self) -> dict[str, Any]:
        return {
            "base_id": self.base_id,
            "other_id": self.other_id,
            "qubit_deltas": [q.to_dict() for q in self.qubit_deltas],
            "gate_deltas": [g.to_dict() for g in self.gate_deltas],
            "added_qubits": list(self.added_qubits),
            "removed_qubits": list(self.removed_qubits),
        }

    @staticmethod
    def from_dict(d: Any) -> "CalibrationDiff":
        d = _require_dict(d, "CalibrationDiff")
        return CalibrationDiff(
            base_id=_get_str(d, "base_id", "CalibrationDiff"),
            other_id=_get_str(d, "other_id", "CalibrationDiff"),
            qubit_deltas=tuple(QubitDelta.from_dict(q) for q in d.get("qubit_deltas", [])),
            gate_deltas=tuple(GateDelta.from_dict(g) for g in d.get("gate_deltas", [])),
            added_qubits=tuple(d.get("added_qubits", [])),
            removed_qubits=tuple(d.get("removed_qubits", [])),
        )


@dataclass(frozen=True)
class RunProvenance:
    circuit: CircuitRecord | None = None
    compilation: CompilationRecord | None = None
    calibration: CalibrationSet | None = None
    execution: ExecutionRecord | None = None

    def is_empty(self) -> bool:
        return (
            self.circuit is None
            and self.compilation is None
            and self.calibration is None
            and self.execution is None
        )

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {}
        if self.circuit is not None:
            out["circuit"] = self.circuit.to_dict()
        if self.compilation is not None:
            out["compilation"] = self.compilation.to_dict()
        if self.calibration is not None:
            out["calibration"] = self.calibration.to_dict()
        if self.execution is not None:
            out["execution"] = self.execution.to_dict()
        return out

    @staticmethod
    def from_dict(d: Any) -> "RunProvenance":
        d = _require_dict(d, "RunProvenance")
        return RunProvenance(
            circuit=CircuitRecord.from_dict(d["circuit"]) if d.get("circuit") is not None else None,
            compilation=CompilationRecord.from_dict(d["compilation"])
            if d.get("compilation") is not None
            else None,
            calibration=CalibrationSet.from_dict(d["calibration"])
            if d.get("calibration") is not None
            else None,
            execution=ExecutionRecord.from_dict(d["execution"])
            if d.get("execution") is not None
            else None,
        )


@dataclass(frozen=True)
class Run:
    run_id: str
    experiment_id: str
    status: RunStatus
    start_time: int
    end_time: int | None = None
    params: dict[str, str] = field(default_factory=dict)
    tags: dict[str, str] = field(default_factory=dict)
    metrics: dict[str, list[MetricPoint]] = field(default_factory=dict)
    artifacts: list[ArtifactRef] = field(default_factory=list)
    provenance: RunProvenance = field(default_factory=RunProvenance)

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {
            "run_id": self.run_id,
            "experiment_id": self.experiment_id,
            "status": self.status.value,
            "start_time": self.start_time,
        }
        if self.end_time is not None:
            out["end_time"] = self.end_time
        out["params"] = dict(sorted(self.params.items()))
        out["tags"] = dict(sorted(self.tags.items()))
        out["metrics"] = {
            k: [p.to_dict() for p in pts] for k, pts in sorted(self.metrics.items())
        }
        out["artifacts"] = [a.to_dict() for a in self.artifacts]
        if not self.provenance.is_empty():
            out["provenance"] = self.provenance.to_dict()
        return out

    @staticmethod
    def from_dict(d: Any) -> "Run":
        d = _require_dict(d, "Run")
        raw_metrics = d.get("metrics", {})
        if not isinstance(raw_metrics, dict):
            raise _fail("Run", "metrics", "a key-to-point-list map")
        metrics: dict[str, list[MetricPoint]] = {}
        for key, pts in raw_metrics.items():
            if not isinstance(pts, list):
                raise _fail("Run", "metrics", "a key-to-point-list map")
            metrics[key] = [MetricPoint.from_dict(p) for p in pts]
        raw_artifacts = d.get("artifacts", [])
        if not isinstance(raw_artifacts, list):
            raise _fail("Run", "artifacts", "a list")
        return Run(
            run_id=_get_str(d, "run_id", "Run"),
            experiment_id=_get_str(d, "experiment_id", "Run"),
            status=_enum(d.get("status"), RunStatus, "Run", "status"),
            start_time=_get_int(d, "start_time", "Run"),
            end_time=_get_opt_int(d, "end_time", "Run"),
            params=_get_str_map(d, "params", "Run"),
            tags=_get_str_map(d, "tags", "Run"),
            metrics=metrics,
            artifacts=[ArtifactRef.from_dict(a) for a in raw_artifacts],
            provenance=RunProvenance.from_dict(d.get("provenance", {})),
        )


@dataclass(frozen=True)
class RunPage:
    items: list[Run]
    next_page_token: str | None = None

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {"items": [r.to_dict() for r in self.items]}
        if self.next_page_token is not None:
            out["next_page_token"] = self.next_page_token
        return out

    @staticmethod
    def from_dict(d: Any) -> "RunPage":
        d = _require_dict(d, "RunPage")
        items = d.get("items")
        if not isinstance(items, list):
            raise _fail("RunPage", "items", "a list")
        token = d.get("next_page_token")
        if token is not None and not isinstance(token, str):
            raise _fail("RunPage", "next_page_token", "a string")
        return RunPage(items=[Run.from_dict(r) for r in items], next_page_token=token)

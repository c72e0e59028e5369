"""Invariant checks for domain records.

Validators return a list of violations rather than raising: bad data is
data, not an error. Each violation names the offending field and states
the broken rule. An empty list means the record is acceptable.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

from qtrack.core.circuits import circuit_digest
from qtrack.core.records import (
    CalibrationSet,
    CircuitRecord,
    CompilationRecord,
    ExecutionRecord,
    Experiment,
    MetricPoint,
    Run,
)

_HEX64 = re.compile(r"^[0-9a-f]{64}$")
_HEX32 = re.compile(r"^[0-9a-f]{32}$")

MAX_EXPERIMENT_NAME_BYTES = 500
MAX_METRIC_KEY_BYTES = 250


@dataclass(frozen=True)
class Violation:
    field: str
    rule: str

    def __str__(self) -> str:
        return f"{self.field}: {self.rule}"


def format_violations(violations: list[Violation]) -> str:
    return "; ".join(str(v) for v in violations)


def validate_experiment(exp: Experiment) -> list[Violation]:
    out: list[Violation] = []
    if not _HEX32.match(exp.experiment_id):
        out.append(Violation("experiment_id", "must be 32-char lowercase hex"))
    if not exp.name:
        out.append(Violation("name", "must be non-empty"))
    elif len(exp.name.encode("utf-8")) > MAX_EXPERIMENT_NAME_BYTES:
        out.append(Violation("name", f"must be at most {MAX_EXPERIMENT_NAME_BYTES} bytes"))
    if exp.creation_time <= 0:
        out.append(Violation("creation_time", "must be > 0"))
    return out


def validate_metric_point(point: MetricPoint) -> list[Violation]:
    out: list[Violation] = []
    if not point.key:
        out.append(Violation("key", "must be non-empty"))
    elif len(point.key.encode("utf-8")) > MAX_METRIC_KEY_BYTES:
        out.append(Violation("key", f"must be at most {MAX_METRIC_KEY_BYTES} bytes"))
    if not math.isfinite(point.value):
        out.append(Violation("value", "must be finite (NaN/inf rejected)"))
    return out


def validate_run(run: Run) -> list[Violation]:
    out: list[Violation] = []
    if not _HEX32.match(run.run_id):
        out.append(Violation("run_id", "must be 32-char lowercase hex"))
    if run.end_time is not None and run.end_time < run.start_time:
        out.append(
            Violation("end_time", f"must be >= start_time ({run.end_time} < {run.start_time})")
        )
    for key, points in run.metrics.items():
        for point in points:
            if point.key != key:
                out.append(Violation("metrics", f"point key {point.key!r} filed under {key!r}"))
            out.extend(
                Violation(f"metrics[{key}].{v.field}", v.rule)
                for v in validate_metric_point(point)
            )
    return out


def validate_execution_record(rec: ExecutionRecord) -> list[Violation]:
    out: list[Violation] = []
    if rec.shots < 1:
        out.append(Violation("shots", "must be >= 1"))
    lengths = {len(k) for k in rec.counts}
    if len(lengths) > 1:
        out.append(Violation("counts", "all bitstring keys must have the same length"))
    bad_keys = [k for k in rec.counts if not set(k) <= {"0", "1"}]
    if bad_keys:
        out.append(Violation("counts", f"bitstring keys must use only 0/1 (got {bad_keys[0]!r})"))
    negative = [k for k, v in rec.counts.items() if v < 0]
    if negative:
        out.append(Violation("counts", f"counts must be non-negative (key {negative[0]!r})"))
    total = sum(rec.counts.values())
    if rec.shots >= 1 and not negative and total != rec.shots:
        out.append(Violation("counts", f"counts sum {total} != shots {rec.shots}"))
    if rec.completed_at < rec.submitted_at:
        out.append(Violation("completed_at", "must be >= submitted_at"))
    return out


def validate_calibration(cal: CalibrationSet) -> list[Violation]:
    out: list[Violation] = []
    if not cal.calibration_set_id:
        out.append(Violation("calibration_set_id", "must be non-empty"))
    if cal.qubit_count < 1:
        out.append(Violation("qubit_count", "must be >= 1"))
    indices = [q.qubit_index for q in cal.qubits]
    if len(set(indices)) != len(indices):
        out.append(Violation("qubits", "qubit indices must be distinct"))
    elif cal.qubit_count >= 1 and set(indices) != set(range(cal.qubit_count)):
        out.append(
            Violation(
                "qubits",
                f"must contain exactly one record per index 0..{cal.qubit_count - 1}",
            )
        )
    for q in cal.qubits:
        where = f"qubits[{q.qubit_index}]"
        if q.t1_us <= 0:
            out.append(Violation(f"{where}.t1_us", "must be > 0"))
        if q.t2_us <= 0:
            out.append(Violation(f"{where}.t2_us", "must be > 0"))
        if not 0 < q.readout_fidelity <= 1:
            out.append(Violation(f"{where}.readout_fidelity", "fidelity must be in (0,1]"))
    valid_indices = set(range(cal.qubit_count))
    for g in cal.gates:
        where = f"gates[{g.gate_name}{list(g.qubit_indices)}]"
        if not 0 < g.fidelity <= 1:
            out.append(Violation(f"{where}.fidelity", "fidelity must be in (0,1]"))
        if not set(g.qubit_indices) <= valid_indices:
            out.append(Violation(f"{where}.qubit_indices", "must reference known qubit indices"))
    return out


def validate_circuit_record(rec: CircuitRecord) -> list[Violation]:
    out: list[Violation] = []
    if rec.qubit_count < 1:
        out.append(Violation("qubit_count", "must be >= 1"))
    if rec.depth < 0:
        out.append(Violation("depth", "must be >= 0"))
    negative = [k for k, v in rec.gate_counts.items() if v < 0]
    if negative:
        out.append(Violation("gate_counts", f"counts must be non-negative (gate {negative[0]!r})"))
    if not _HEX64.match(rec.digest):
        out.append(Violation("digest", "must be 64-char lowercase hex"))
    elif circuit_digest(rec.source) != rec.digest:
        out.append(Violation("digest", "does not match digest recomputed from source"))
    return out


def validate_compilation_record(rec: CompilationRecord) -> list[Violation]:
    out: list[Violation] = []
    if rec.optimization_level < 0:
        out.append(Violation("optimization_level", "must be >= 0"))
    for name, digest in (("input_digest", rec.input_digest), ("output_digest", rec.output_digest)):
        if not _HEX64.match(digest):
            out.append(Violation(name, "must be 64-char lowercase hex"))
    physical = list(rec.qubit_mapping.values())
    if len(set(physical)) != len(physical):
        out.append(Violation("qubit_mapping", "must be injective"))
    return out

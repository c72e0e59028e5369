"""Domain types, validation, circuit digesting, and calibration tooling."""

from qtrack.core.calibration import diff_calibration, generate_synthetic_calibration
from qtrack.core.circuits import canonicalize_circuit_text, circuit_digest
from qtrack.core.records import (
    ArtifactRef,
    CalibrationDiff,
    CalibrationSet,
    CircuitFormat,
    CircuitRecord,
    CompilationRecord,
    ExecutionRecord,
    Experiment,
    GateDelta,
    GateFidelity,
    Lifecycle,
    MetricPoint,
    QubitCalibration,
    QubitDelta,
    Run,
    RunPage,
    RunProvenance,
    RunStatus,
    canonical_json,
    new_id,
    now_ms,
)
from qtrack.core.runs import (
    TERMINAL_STATUSES,
    latest_metric_point,
    run_with_metric,
    run_with_param,
    run_with_provenance,
    run_with_status,
    run_with_tag,
)
from qtrack.core.validation import (
    Violation,
    validate_calibration,
    validate_circuit_record,
    validate_compilation_record,
    validate_execution_record,
    validate_experiment,
    validate_metric_point,
    validate_run,
)

__all__ = [
    "ArtifactRef",
    "CalibrationDiff",
    "CalibrationSet",
    "CircuitFormat",
    "CircuitRecord",
    "CompilationRecord",
    "ExecutionRecord",
    "Experiment",
    "GateDelta",
    "GateFidelity",
    "Lifecycle",
    "MetricPoint",
    "QubitCalibration",
    "QubitDelta",
    "Run",
    "RunPage",
    "RunProvenance",
    "RunStatus",
    "TERMINAL_STATUSES",
    "Violation",
    "canonical_json",
    "canonicalize_circuit_text",
    "circuit_digest",
    "diff_calibration",
    "generate_synthetic_calibration",
    "latest_metric_point",
    "new_id",
    "now_ms",
    "run_with_metric",
    "run_with_param",
    "run_with_provenance",
    "run_with_status",
    "run_with_tag",
    "validate_calibration",
    "validate_circuit_record",
    "validate_compilation_record",
    "validate_execution_record",
    "validate_experiment",
    "validate_metric_point",
    "validate_run",
]

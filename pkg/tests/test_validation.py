"""Validation rules: each violation names the field and the broken rule."""

import pytest

from qtrack.core.circuits import circuit_digest
from qtrack.core.records import (
    CalibrationSet,
    CircuitFormat,
    CircuitRecord,
    CompilationRecord,
    ExecutionRecord,
    GateFidelity,
    MetricPoint,
    QubitCalibration,
)
from qtrack.core.validation import (
    validate_calibration,
    validate_circuit_record,
    validate_compilation_record,
    validate_execution_record,
    validate_experiment,
    validate_metric_point,
)
from tests.conftest import make_experiment


def _execution(**over) -> ExecutionRecord:
    fields = {
        "shots": 500,
        "counts": {"00": 260, "11": 240},
        "backend_name": "mock",
        "submitted_at": 10,
        "completed_at": 20,
    }
    fields.update(over)
    return ExecutionRecord(**fields)


class TestExecutionRecord:
    def test_valid_record_passes(self):
        assert validate_execution_record(_execution()) == []

    def test_counts_sum_mismatch_message(self):
        violations = validate_execution_record(_execution(counts={"00": 260, "11": 239}))
        assert any(v.field == "counts" and v.rule == "counts sum 499 != shots 500" for v in violations)

    def test_shots_must_be_positive(self):
        violations = validate_execution_record(_execution(shots=0, counts={}))
        assert any(v.field == "shots" for v in violations)

    def test_bitstrings_must_be_uniform_length(self):
        violations = validate_execution_record(_execution(counts={"0": 250, "11": 250}))
        assert any(v.field == "counts" and "length" in v.rule for v in violations)

    def test_bitstrings_must_be_binary(self):
        violations = validate_execution_record(_execution(counts={"0x": 250, "01": 250}))
        assert any(v.field == "counts" for v in violations)

    def test_negative_count_rejected(self):
        violations = validate_execution_record(_execution(counts={"00": 501, "11": -1}))
        assert any(v.field == "counts" for v in violations)

    def test_completed_before_submitted_rejected(self):
        violations = validate_execution_record(_execution(submitted_at=20, completed_at=10))
        assert any(v.field == "completed_at" for v in violations)


class TestExperiment:
    def test_valid(self):
        assert validate_experiment(make_experiment()) == []

    def test_empty_name(self):
        assert any(v.field == "name" for v in validate_experiment(make_experiment(name="")))

    def test_name_length_is_measured_in_bytes(self):
        # 250 two-byte characters = 500 bytes: at the limit.
        ok = make_experiment(name="ä" * 250)
        assert validate_experiment(ok) == []
        over = make_experiment(name="ä" * 251)
        assert any(v.field == "name" for v in validate_experiment(over))

    def test_creation_time_positive(self):
        bad = make_experiment(creation_time=0)
        assert any(v.field == "creation_time" for v in validate_experiment(bad))


class TestMetricPoint:
    def test_valid(self):
        assert validate_metric_point(MetricPoint("k", 1.5, 1)) == []

    @pytest.mark.parametrize("value", [float("nan"), float("inf"), float("-inf")])
    def test_non_finite_rejected(self, value):
        violations = validate_metric_point(MetricPoint("k", value, 1))
        assert any(v.field == "value" for v in violations)

    def test_key_byte_limit(self):
        assert validate_metric_point(MetricPoint("k" * 250, 1.0, 1)) == []
        violations = validate_metric_point(MetricPoint("k" * 251, 1.0, 1))
        assert any(v.field == "key" for v in violations)

    def test_empty_key_rejected(self):
        assert any(v.field == "key" for v in validate_metric_point(MetricPoint("", 1.0, 1)))


def _calibration(**over) -> CalibrationSet:
    fields = {
        "calibration_set_id": "cal-1",
        "device_name": "synthetic-2q",
        "qubit_count": 2,
        "timestamp": 1,
        "qubits": (
            QubitCalibration(0, 100.0, 80.0, 0.99),
            QubitCalibration(1, 90.0, 110.0, 0.98),
        ),
        "gates": (GateFidelity("cz", (0, 1), 0.97),),
    }
    fields.update(over)
    return CalibrationSet(**fields)


class TestCalibration:
    def test_valid(self):
        assert validate_calibration(_calibration()) == []

    def test_readout_fidelity_above_one(self):
        bad = _calibration(
            qubits=(
                QubitCalibration(0, 100.0, 80.0, 1.2),
                QubitCalibration(1, 90.0, 110.0, 0.98),
            )
        )
        violations = validate_calibration(bad)
        assert any("(0,1]" in v.rule for v in violations)

    def test_duplicate_qubit_index(self):
        bad = _calibration(
            qubits=(
                QubitCalibration(0, 100.0, 80.0, 0.99),
                QubitCalibration(0, 90.0, 110.0, 0.98),
            )
        )
        violations = validate_calibration(bad)
        assert any("distinct" in v.rule for v in violations)

    def test_indices_must_cover_range(self):
        bad = _calibration(
            qubits=(
                QubitCalibration(0, 100.0, 80.0, 0.99),
                QubitCalibration(2, 90.0, 110.0, 0.98),
            )
        )
        assert validate_calibration(bad) != []

    def test_qubit_count_mismatch(self):
        bad = _calibration(qubit_count=3)
        assert validate_calibration(bad) != []

    def test_nonpositive_t1_rejected(self):
        bad = _calibration(
            qubits=(
                QubitCalibration(0, 0.0, 80.0, 0.99),
                QubitCalibration(1, 90.0, 110.0, 0.98),
            )
        )
        assert any(v.field.endswith("t1_us") for v in validate_calibration(bad))

    def test_gate_fidelity_range(self):
        bad = _calibration(gates=(GateFidelity("cz", (0, 1), 0.0),))
        assert validate_calibration(bad) != []


class TestCircuitRecord:
    def test_digest_must_match_source(self):
        source = "h q[0];"
        rec = CircuitRecord(
            name="c", qubit_count=1, depth=1, gate_counts={"h": 1},
            format=CircuitFormat.OPENQASM3_TEXT, source=source, digest="0" * 64,
        )
        violations = validate_circuit_record(rec)
        assert any(v.field == "digest" for v in violations)
        good = CircuitRecord(
            name="c", qubit_count=1, depth=1, gate_counts={"h": 1},
            format=CircuitFormat.OPENQASM3_TEXT, source=source, digest=circuit_digest(source),
        )
        assert validate_circuit_record(good) == []

    def test_qubit_count_positive(self):
        rec = CircuitRecord(
            name="c", qubit_count=0, depth=0, gate_counts={},
            format=CircuitFormat.VENDOR_OPAQUE, source="", digest=circuit_digest(""),
        )
        assert any(v.field == "qubit_count" for v in validate_circuit_record(rec))

    def test_negative_depth_rejected(self):
        rec = CircuitRecord(
            name="c", qubit_count=1, depth=-1, gate_counts={},
            format=CircuitFormat.VENDOR_OPAQUE, source="", digest=circuit_digest(""),
        )
        assert any(v.field == "depth" for v in validate_circuit_record(rec))


class TestCompilationRecord:
    def test_injective_mapping_ok(self):
        rec = CompilationRecord(
            compiler_name="c", compiler_version="1", optimization_level=0,
            input_digest="a" * 64, output_digest="b" * 64, qubit_mapping={0: 1, 1: 0},
        )
        assert validate_compilation_record(rec) == []

    def test_non_injective_mapping_rejected(self):
        rec = CompilationRecord(
            compiler_name="c", compiler_version="1", optimization_level=0,
            input_digest="a" * 64, output_digest="b" * 64, qubit_mapping={0: 1, 1: 1},
        )
        violations = validate_compilation_record(rec)
        assert any(v.field == "qubit_mapping" for v in violations)

    def test_negative_optimization_level_rejected(self):
        rec = CompilationRecord(
            compiler_name="c", compiler_version="1", optimization_level=-1,
            input_digest="a" * 64, output_digest="b" * 64, qubit_mapping={},
        )
        assert any(v.field == "optimization_level" for v in validate_compilation_record(rec))

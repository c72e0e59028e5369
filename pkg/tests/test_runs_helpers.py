"""Functional run-update helpers and their write rules."""

import pytest

from conftest import make_point, make_run
from qtrack.core.calibration import generate_synthetic_calibration
from qtrack.core.records import RunStatus, new_id
from qtrack.core.runs import (
    ensure_writable,
    latest_metric_point,
    run_with_metric,
    run_with_param,
    run_with_provenance,
    run_with_status,
    run_with_tag,
)
from qtrack.errors import ConflictError, InvalidParameterError, InvalidStateError

EXP = new_id()


class TestLatestMetricPoint:
    def test_max_step_wins(self):
        pts = [make_point(step=0, value=1.0), make_point(step=2, value=0.1), make_point(step=1, value=9.0)]
        assert latest_metric_point(pts).step == 2

    def test_timestamp_breaks_step_ties(self):
        pts = [
            make_point(step=1, timestamp=100, value=5.0),
            make_point(step=1, timestamp=300, value=1.0),
            make_point(step=1, timestamp=200, value=9.0),
        ]
        assert latest_metric_point(pts).timestamp == 300

    def test_value_breaks_full_ties(self):
        pts = [
            make_point(step=1, timestamp=100, value=1.0),
            make_point(step=1, timestamp=100, value=3.0),
            make_point(step=1, timestamp=100, value=2.0),
        ]
        assert latest_metric_point(pts).value == 3.0

    def test_insertion_order_irrelevant(self):
        pts = [make_point(step=s, value=float(s)) for s in (3, 1, 4, 0, 2)]
        assert latest_metric_point(pts) == latest_metric_point(list(reversed(pts)))


class TestParams:
    def test_set_and_reread(self):
        run = run_with_param(make_run(EXP), "shots", "500")
        assert run.params == {"shots": "500"}

    def test_equal_reset_is_noop_same_object(self):
        run = run_with_param(make_run(EXP), "shots", "500")
        assert run_with_param(run, "shots", "500") is run

    def test_different_value_conflicts(self):
        run = run_with_param(make_run(EXP), "shots", "500")
        with pytest.raises(ConflictError):
            run_with_param(run, "shots", "1000")

    def test_empty_key_rejected(self):
        with pytest.raises(InvalidParameterError):
            run_with_param(make_run(EXP), "", "x")

    def test_original_not_mutated(self):
        base = make_run(EXP)
        run_with_param(base, "a", "1")
        assert base.params == {}


class TestTags:
    def test_last_write_wins(self):
        run = run_with_tag(make_run(EXP), "phase", "warmup")
        run = run_with_tag(run, "phase", "measure")
        assert run.tags == {"phase": "measure"}

    def test_equal_rewrite_is_noop(self):
        run = run_with_tag(make_run(EXP), "k", "v")
        assert run_with_tag(run, "k", "v") is run

    def test_empty_key_rejected(self):
        with pytest.raises(InvalidParameterError):
            run_with_tag(make_run(EXP), "", "v")


class TestMetrics:
    def test_appends_preserve_order(self):
        run = make_run(EXP)
        run = run_with_metric(run, make_point(step=0, value=0.5))
        run = run_with_metric(run, make_point(step=1, value=0.7))
        assert [p.step for p in run.metrics["fidelity"]] == [0, 1]

    def test_invalid_point_rejected(self):
        with pytest.raises(InvalidParameterError):
            run_with_metric(make_run(EXP), make_point(value=float("nan")))


class TestStatus:
    @pytest.mark.parametrize("target", [RunStatus.FINISHED, RunStatus.FAILED, RunStatus.KILLED])
    def test_running_to_terminal(self, target):
        run = make_run(EXP, start_time=1000)
        done = run_with_status(run, target, end_time=2000)
        assert done.status is target and done.end_time == 2000

    def test_terminal_is_frozen(self):
        run = run_with_status(make_run(EXP, start_time=1000), RunStatus.FINISHED, 2000)
        with pytest.raises(InvalidStateError):
            run_with_status(run, RunStatus.FAILED, 3000)

    def test_running_to_running_rejected(self):
        with pytest.raises(InvalidStateError):
            run_with_status(make_run(EXP), RunStatus.RUNNING, 10**13)

    def test_end_before_start_rejected(self):
        with pytest.raises(InvalidParameterError):
            run_with_status(make_run(EXP, start_time=2000), RunStatus.FINISHED, 1999)

    def test_end_equal_start_allowed(self):
        run = run_with_status(make_run(EXP, start_time=2000), RunStatus.FINISHED, 2000)
        assert run.end_time == 2000


class TestEnsureWritable:
    def test_running_ok(self):
        ensure_writable(make_run(EXP))

    @pytest.mark.parametrize("status", [RunStatus.FINISHED, RunStatus.FAILED, RunStatus.KILLED])
    def test_terminal_rejected(self, status):
        run = make_run(EXP, status=status, start_time=1, end_time=2)
        with pytest.raises(InvalidStateError):
            ensure_writable(run)


class TestProvenance:
    def test_attach_calibration(self):
        cal = generate_synthetic_calibration(7, 3)
        run = run_with_provenance(make_run(EXP), "calibration", cal)
        assert run.provenance.calibration is cal
        assert run.provenance.circuit is None

    def test_overwrite_is_last_write_wins(self):
        run = make_run(EXP)
        run = run_with_provenance(run, "calibration", generate_synthetic_calibration(1, 2))
        new = generate_synthetic_calibration(2, 2)
        run = run_with_provenance(run, "calibration", new)
        assert run.provenance.calibration is new

    def test_unknown_kind_rejected(self):
        with pytest.raises(InvalidParameterError):
            run_with_provenance(make_run(EXP), "simulation", object())

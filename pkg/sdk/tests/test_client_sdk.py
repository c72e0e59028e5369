"""End-to-end SDK behaviour against a live server.

Every logging call is cross-checked over raw HTTP: the SDK's contract is
that anything it records is observable through the public API with
identical values.
"""

from __future__ import annotations

import json
import math

import pytest

import qtrack_client as qt
from qtrack_client import ApiError, ClientError, ConnectionFailed, TrackingClient
from sdk_fixtures import api, fluent, tracking_server, unique_name  # noqa: F401
from server_harness import TrackingServer


def start_run_in(fluent, name=None):
    fluent.set_experiment(name or unique_name())
    return fluent.start_run()


class TestExperiments:
    def test_set_experiment_creates_then_reuses(self, fluent, api):
        name = unique_name()
        first = fluent.set_experiment(name)
        second = fluent.set_experiment(name)
        assert first.experiment_id == second.experiment_id
        assert first.name == name
        assert len(first.experiment_id) == 32 and int(first.experiment_id, 16) >= 0

        doc = api("GET", f"/api/v1/experiments?name={name}").json()
        assert doc["experiment_id"] == first.experiment_id

    def test_two_clients_resolve_same_experiment(self, tracking_server):
        name = unique_name()
        a = TrackingClient(tracking_server.uri)
        b = TrackingClient(tracking_server.uri)
        try:
            assert a.set_experiment(name).experiment_id == b.set_experiment(name).experiment_id
        finally:
            a.close()
            b.close()

    def test_get_experiment_by_name_missing_is_none(self, fluent):
        assert fluent.get_experiment_by_name(unique_name("nope")) is None

    def test_unreachable_server_names_the_uri(self):
        client = TrackingClient("http://127.0.0.1:1")
        try:
            with pytest.raises(ConnectionFailed, match="http://127.0.0.1:1"):
                client.set_experiment("anything")
        finally:
            client.close()


class TestRunScope:
    def test_clean_exit_finishes_run(self, fluent, api):
        with start_run_in(fluent) as run:
            pass
        doc = api("GET", f"/api/v1/runs/{run.run_id}").json()
        assert doc["status"] == "FINISHED"
        assert doc["end_time"] >= doc["start_time"]

    def test_raising_body_fails_run_and_propagates(self, fluent, api):
        with pytest.raises(RuntimeError, match="boom"):
            with start_run_in(fluent) as run:
                raise RuntimeError("boom")
        doc = api("GET", f"/api/v1/runs/{run.run_id}").json()
        assert doc["status"] == "FAILED"
        assert doc["end_time"] >= doc["start_time"]

    def test_one_active_run_per_client(self, fluent):
        with start_run_in(fluent):
            with pytest.raises(ClientError, match="already active"):
                fluent.start_run()
        assert fluent.active_run() is None

    def test_start_run_requires_experiment(self, tracking_server):
        client = TrackingClient(tracking_server.uri)
        try:
            with pytest.raises(ClientError, match="set_experiment"):
                client.start_run()
        finally:
            client.close()

    def test_logging_outside_a_run_is_an_error(self, fluent):
        fluent.set_experiment(unique_name())
        with pytest.raises(ClientError, match="no active run"):
            fluent.log_param("shots", 500)


class TestLogging:
    def test_values_round_trip_over_http(self, fluent, api):
        with start_run_in(fluent) as run:
            fluent.set_tag("phase", "tuning")
            fluent.log_param("shots", 500)
            fluent.log_param("layout", "linear")
            fluent.log_metric("fidelity", 0.93, step=3, timestamp=1700000000000)
        doc = api("GET", f"/api/v1/runs/{run.run_id}").json()
        assert doc["tags"] == {"phase": "tuning"}
        assert doc["params"] == {"layout": "linear", "shots": "500"}
        assert doc["metrics"]["fidelity"] == [
            {"key": "fidelity", "value": 0.93, "timestamp": 1700000000000, "step": 3}
        ]

    def test_non_string_values_are_stringified(self, fluent, api):
        with start_run_in(fluent) as run:
            fluent.log_param("optimization_level", 2)
            fluent.set_tag("seeded", True)
        doc = api("GET", f"/api/v1/runs/{run.run_id}").json()
        assert doc["params"] == {"optimization_level": "2"}
        assert doc["tags"] == {"seeded": "True"}

    def test_metric_default_timestamp_is_recent(self, fluent, api):
        with start_run_in(fluent) as run:
            fluent.log_metric("loss", 1.5)
        point = api("GET", f"/api/v1/runs/{run.run_id}").json()["metrics"]["loss"][0]
        assert point["step"] == 0
        assert abs(point["timestamp"] - run.start_time) < 60_000

    def test_param_conflict_preserves_server_code(self, fluent):
        with start_run_in(fluent):
            fluent.log_param("shots", 500)
            with pytest.raises(ApiError) as err:
                fluent.log_param("shots", 1000)
        assert err.value.error_code == "RESOURCE_CONFLICT"
        assert err.value.status_code == 409

    def test_non_finite_metric_is_rejected_by_server(self, fluent):
        with start_run_in(fluent):
            with pytest.raises(ApiError) as err:
                fluent.log_metric("fidelity", math.nan)
        assert err.value.error_code == "INVALID_PARAMETER"


class TestArtifacts:
    def test_log_text_round_trip(self, fluent, api):
        with start_run_in(fluent) as run:
            fluent.log_text("calibration abc-123", "notes/calibration_set_id.txt")
        resp = api("GET", f"/api/v1/runs/{run.run_id}/artifacts/notes/calibration_set_id.txt")
        assert resp.content == b"calibration abc-123"
        assert resp.headers["content-type"].startswith("text/plain")

    def test_log_dict_is_canonical_json(self, fluent, api):
        payload = {"b": 2, "a": [1, 2.5, "x"], "nested": {"z": None, "y": True}}
        with start_run_in(fluent) as run:
            fluent.log_dict(payload, "config.json")
        resp = api("GET", f"/api/v1/runs/{run.run_id}/artifacts/config.json")
        assert resp.content.decode() == json.dumps(
            payload, ensure_ascii=False, separators=(",", ":"), sort_keys=True
        )
        assert json.loads(resp.content) == payload
        assert resp.headers["content-type"] == "application/json"

    def test_log_dict_unserializable_uploads_nothing(self, fluent, api):
        with start_run_in(fluent) as run:
            with pytest.raises(ClientError, match="not JSON-serializable"):
                fluent.log_dict({"oops": object()}, "config.json")
        listed = api("GET", f"/api/v1/runs/{run.run_id}/artifacts").json()
        assert listed == {"artifacts": []}

    def test_log_image_and_figure_store_png(self, fluent, api):
        png_magic = b"\x89PNG\r\n\x1a\n"
        with start_run_in(fluent) as run:
            fluent.log_image(png_magic + b"tiny", "raw.png")
            fluent.log_figure(qt.plot_histogram({"00": 240, "11": 260}), "hist.png")
        raw = api("GET", f"/api/v1/runs/{run.run_id}/artifacts/raw.png")
        assert raw.content == png_magic + b"tiny"
        hist = api("GET", f"/api/v1/runs/{run.run_id}/artifacts/hist.png")
        assert hist.content.startswith(png_magic)
        assert hist.headers["content-type"] == "image/png"

    def test_log_image_rejects_non_bytes(self, fluent):
        with start_run_in(fluent):
            with pytest.raises(ClientError, match="bytes"):
                fluent.log_image("not bytes", "x.png")


class TestProvenanceOps:
    def test_log_execution_visible_over_http(self, fluent, api):
        with start_run_in(fluent) as run:
            fluent.log_execution(
                shots=500,
                counts={"00": 240, "11": 260},
                backend_name="mock-5q",
                calibration_set_id="abc-123",
                submitted_at=1700000000000,
                completed_at=1700000004000,
            )
        record = api("GET", f"/api/v1/runs/{run.run_id}").json()["provenance"]["execution"]
        assert record == {
            "shots": 500,
            "counts": {"00": 240, "11": 260},
            "backend_name": "mock-5q",
            "calibration_set_id": "abc-123",
            "submitted_at": 1700000000000,
            "completed_at": 1700000004000,
        }

    def test_log_execution_defaults_timestamps(self, fluent, api):
        with start_run_in(fluent) as run:
            fluent.log_execution(shots=2, counts={"0": 1, "1": 1}, backend_name="mock-1q")
        record = api("GET", f"/api/v1/runs/{run.run_id}").json()["provenance"]["execution"]
        assert record["submitted_at"] == record["completed_at"]
        assert "calibration_set_id" not in record

    def test_log_execution_count_mismatch_surfaces_message(self, fluent):
        with start_run_in(fluent):
            with pytest.raises(ApiError, match=r"counts sum 499 != shots 500"):
                fluent.log_execution(
                    shots=500, counts={"00": 240, "11": 259}, backend_name="mock-2q"
                )

    def test_log_calibration_dual_writes(self, fluent, api):
        calibration = qt.synthetic_calibration_data(seed=3, n_qubits=4)
        with start_run_in(fluent) as run:
            fluent.log_calibration(calibration)
        doc = api("GET", f"/api/v1/runs/{run.run_id}").json()
        assert doc["provenance"]["calibration"]["calibration_set_id"] == (
            calibration["calibration_set_id"]
        )
        assert doc["provenance"]["calibration"]["qubit_count"] == 4
        artifact = api("GET", f"/api/v1/runs/{run.run_id}/artifacts/calibration_data.json")
        assert json.loads(artifact.content) == calibration

    def test_invalid_calibration_writes_no_artifact(self, fluent, api):
        calibration = qt.synthetic_calibration_data(seed=3, n_qubits=4)
        calibration["qubits"][0]["readout_fidelity"] = 1.2
        with start_run_in(fluent) as run:
            with pytest.raises(ApiError) as err:
                fluent.log_calibration(calibration)
        assert err.value.error_code == "INVALID_PARAMETER"
        listed = api("GET", f"/api/v1/runs/{run.run_id}/artifacts").json()
        assert listed == {"artifacts": []}


class TestSearchRuns:
    @pytest.fixture()
    def seeded(self, fluent):
        name = unique_name("search")
        exp = fluent.set_experiment(name)
        runs = []
        for shots, fidelity in [(500, 0.91), (500, 0.93), (1000, 0.88)]:
            with fluent.start_run() as run:
                fluent.log_param("shots", shots)
                fluent.set_tag("phase", "tuning")
                fluent.log_metric("fidelity", fidelity, step=1)
                fluent.log_metric("fidelity", fidelity - 0.05, step=0)
                runs.append(run.run_id)
        return exp, runs

    def test_dataframe_shape_and_row_count(self, seeded, fluent, api):
        exp, _ = seeded
        df = fluent.search_runs([exp.experiment_id])
        wire = api(
            "POST", "/api/v1/runs/search", json={"experiment_ids": [exp.experiment_id]}
        ).json()
        assert len(df) == len(wire["items"]) == 3
        assert list(df.columns) == [
            "run_id",
            "experiment_id",
            "status",
            "start_time",
            "end_time",
            "params.shots",
            "metrics.fidelity",
            "tags.phase",
        ]
        assert list(df["run_id"]) == [item["run_id"] for item in wire["items"]]
        assert set(df["status"]) == {"FINISHED"}

    def test_filter_and_order_forwarded(self, seeded, fluent, api):
        exp, _ = seeded
        df = fluent.search_runs(
            [exp.experiment_id],
            filter='params.shots = "500"',
            order_by=["metrics.fidelity ASC"],
        )
        wire = api(
            "POST",
            "/api/v1/runs/search",
            json={
                "experiment_ids": [exp.experiment_id],
                "filter": 'params.shots = "500"',
                "order_by": ["metrics.fidelity ASC"],
            },
        ).json()
        assert list(df["run_id"]) == [item["run_id"] for item in wire["items"]]
        assert list(df["params.shots"]) == ["500", "500"]
        assert list(df["metrics.fidelity"]) == [0.91, 0.93]

    def test_latest_metric_matches_server_latest(self, seeded, fluent, api):
        exp, runs = seeded
        df = fluent.search_runs([exp.experiment_id], filter=f'run_id = "{runs[0]}"')
        latest = api("GET", f"/api/v1/runs/{runs[0]}/metrics/latest").json()["latest"]
        assert df.iloc[0]["metrics.fidelity"] == latest["fidelity"]["value"]

    def test_empty_result_keeps_base_columns(self, seeded, fluent):
        exp, _ = seeded
        df = fluent.search_runs([exp.experiment_id], filter='params.shots = "42"')
        assert len(df) == 0
        assert list(df.columns) == ["run_id", "experiment_id", "status", "start_time", "end_time"]

    def test_parse_error_carries_server_offset(self, seeded, fluent):
        exp, _ = seeded
        with pytest.raises(ApiError) as err:
            fluent.search_runs([exp.experiment_id], filter="params.shots <")
        assert err.value.error_code == "INVALID_PARAMETER"
        assert err.value.message.startswith("parse error at byte 14")

    def test_pagination_is_transparent(self, tracking_server):
        client = TrackingClient(tracking_server.uri)
        try:
            exp = client.set_experiment(unique_name("paged"))
            expected = []
            for i in range(7):
                with client.start_run() as run:
                    client.log_param("index", i)
                    expected.append(run.run_id)
            client.search_page_size = 3
            df = client.search_runs([exp.experiment_id], order_by=["attributes.run_id ASC"])
        finally:
            client.close()
        index_by_run = {run_id: str(i) for i, run_id in enumerate(expected)}
        assert list(df["run_id"]) == sorted(expected)
        assert list(df["params.index"]) == [index_by_run[r] for r in sorted(expected)]

    def test_max_results_truncates(self, seeded, fluent):
        exp, _ = seeded
        df = fluent.search_runs(
            [exp.experiment_id], order_by=["attributes.run_id ASC"], max_results=2
        )
        assert len(df) == 2


@pytest.fixture(scope="module")
def locked_server(tmp_path_factory):
    server = TrackingServer(
        tmp_path_factory.mktemp("locked-store"), auth_token="sdk-secret"
    ).start()
    yield server
    server.stop()


class TestAuth:
    def test_missing_token_is_an_api_error(self, locked_server):
        client = TrackingClient(locked_server.uri)
        try:
            with pytest.raises(ApiError) as err:
                client.set_experiment("auth check")
        finally:
            client.close()
        assert err.value.status_code == 401

    def test_explicit_token_works(self, locked_server):
        client = TrackingClient(locked_server.uri, auth_token="sdk-secret")
        try:
            exp = client.set_experiment("auth check")
            assert exp.name == "auth check"
        finally:
            client.close()

    def test_token_from_environment(self, locked_server, monkeypatch):
        monkeypatch.setenv("QTRACK_AUTH_TOKEN", "sdk-secret")
        client = TrackingClient(locked_server.uri)
        try:
            assert client.get_experiment_by_name("auth check") is not None
        finally:
            client.close()

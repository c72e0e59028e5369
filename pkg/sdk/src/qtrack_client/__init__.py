"""Client SDK for the qtrack tracking server.

Fluent usage mirrors the classic tracking style::

    import qtrack_client as qt

    qt.set_experiment("my experiment")
    with qt.start_run():
        qt.log_param("shots", 500)
        qt.log_metric("fidelity", 0.93)

Everything the SDK does is one HTTP call against the server's public API;
see TrackingClient for the instance-based form and qtrack_client.mock for
the hardware-free backend stand-in.
"""

from qtrack_client.client import (
    DEFAULT_TRACKING_URI,
    ActiveRun,
    Experiment,
    TrackingClient,
    active_run,
    get_experiment_by_name,
    get_run,
    get_tracking_uri,
    log_calibration,
    log_dict,
    log_execution,
    log_figure,
    log_image,
    log_metric,
    log_param,
    log_text,
    search_runs,
    set_experiment,
    set_tag,
    set_tracking_uri,
    start_run,
)
from qtrack_client.errors import ApiError, ClientError, ConnectionFailed
from qtrack_client.mock import (
    MockBackend,
    MockProvider,
    MockResult,
    get_calibration_data,
    mock_backend,
    plot_histogram,
    synthetic_calibration_data,
)

__all__ = [
    "DEFAULT_TRACKING_URI",
    "ActiveRun",
    "ApiError",
    "ClientError",
    "ConnectionFailed",
    "Experiment",
    "MockBackend",
    "MockProvider",
    "MockResult",
    "TrackingClient",
    "active_run",
    "get_calibration_data",
    "get_experiment_by_name",
    "get_run",
    "get_tracking_uri",
    "log_calibration",
    "log_dict",
    "log_execution",
    "log_figure",
    "log_image",
    "log_metric",
    "log_param",
    "log_text",
    "mock_backend",
    "plot_histogram",
    "search_runs",
    "set_experiment",
    "set_tag",
    "set_tracking_uri",
    "start_run",
    "synthetic_calibration_data",
]

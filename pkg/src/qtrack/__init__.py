"""qtrack: self-hosted experiment tracking for quantum software development.

Programs log provenance-rich run data (parameters, metrics, artifacts,
circuit/compilation/calibration/execution records) to a tracking server;
researchers search, compare, and diff runs through the CLI, the HTTP API,
or the web dashboard.
"""

__version__ = "0.1.0"

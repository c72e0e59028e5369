"""Command-line front end.

Talks to a running tracking server over HTTP for every data operation
(`serve` and the hidden `import` are the only commands that touch a store
root directly). Exit codes: 0 success, 1 domain error (not-found, conflict,
parse error, unreachable server), 2 usage error.

stdout carries data; stderr carries diagnostics. `--format json` and
`--format csv` are stable machine-readable contracts; tables are for humans.
"""

from __future__ import annotations

import csv
import io
import json
import os
import re
import shutil
import sys
import urllib.parse
from pathlib import Path

import click
import httpx

from qtrack.core.calibration import generate_synthetic_calibration
from qtrack.core.records import Experiment, Run, canonical_json
from qtrack.core.runs import latest_metric_point

DEFAULT_URI = "http://127.0.0.1:5600"


class CliError(click.ClickException):
    exit_code = 1


class ApiFailure(Exception):
    """Non-2xx response from the tracking server."""

    def __init__(self, status: int, error_code: str, message: str):
        super().__init__(message)
        self.status = status
        self.error_code = error_code
        self.message = message


class ApiClient:
    def __init__(self, uri: str):
        self.uri = uri.rstrip("/")
        headers = {}
        token = os.environ.get("QTRACK_AUTH_TOKEN")
        if token:
            headers["Authorization"] = f"Bearer {token}"
        self._client = httpx.Client(base_url=self.uri, headers=headers, timeout=30.0)

    def request(self, method: str, path: str, **kwargs) -> httpx.Response:
        try:
            resp = self._client.request(method, path, **kwargs)
        except httpx.HTTPError as exc:
            raise CliError(f"cannot reach tracking server at {self.uri}: {exc}") from None
        if resp.status_code >= 400:
            try:
                body = resp.json()
                raise ApiFailure(resp.status_code, body["error_code"], body["message"])
            except (ValueError, KeyError):
                raise CliError(
                    f"unexpected response {resp.status_code} from {self.uri}"
                ) from None
        return resp

    def get_json(self, path: str, **kwargs) -> dict:
        return self.request("GET", path, **kwargs).json()

    def post_json(self, path: str, body: dict) -> dict:
        return self.request("POST", path, content=canonical_json(body)).json()

    def experiment_by_name(self, name: str) -> dict:
        return self.get_json("/api/v1/experiments", params={"name": name})


def _fail(exc: ApiFailure) -> CliError:
    return CliError(f"{exc.error_code}: {exc.message}")


def format_table(headers: list[str], rows: list[list[str]]) -> str:
    widths = [len(h) for h in headers]
    for row in rows:
        widths = [max(w, len(cell)) for w, cell in zip(widths, row)]
    lines = ["  ".join(h.ljust(w) for h, w in zip(headers, widths)).rstrip()]
    for row in rows:
        lines.append("  ".join(c.ljust(w) for c, w in zip(row, widths)).rstrip())
    return "\n".join(lines)


def flatten_run(run: Run) -> dict[str, str]:
    """One CSV/table row per run: base columns plus namespaced keys."""
    row = {
        "run_id": run.run_id,
        "experiment_id": run.experiment_id,
        "status": run.status.value,
        "start_time": str(run.start_time),
        "end_time": "" if run.end_time is None else str(run.end_time),
    }
    for key, value in run.params.items():
        row[f"params.{key}"] = value
    for key, points in run.metrics.items():
        if points:
            row[f"metrics.{key}"] = repr(latest_metric_point(points).value)
    for key, value in run.tags.items():
        row[f"tags.{key}"] = value
    return row


_BASE_COLUMNS = ["run_id", "experiment_id", "status", "start_time", "end_time"]


def run_columns(rows: list[dict[str, str]]) -> list[str]:
    extra = sorted({k for row in rows for k in row} - set(_BASE_COLUMNS))
    return _BASE_COLUMNS + extra


@click.group()
@click.option(
    "--uri",
    envvar="QTRACK_TRACKING_URI",
    default=DEFAULT_URI,
    show_default=True,
    help="Tracking server base URI.",
)
@click.pass_context
def main(ctx: click.Context, uri: str) -> None:
    """Experiment tracking for quantum programs: server, search, and tooling."""
    ctx.obj = uri


def _client(ctx: click.Context) -> ApiClient:
    return ApiClient(ctx.obj)


# -- serve ---------------------------------------------------------------------


@main.command()
@click.option("--addr", default="127.0.0.1:5600", show_default=True, help="host:port to bind.")
@click.option(
    "--store",
    "store_dir",
    envvar="QTRACK_STORE_DIR",
    required=True,
    help="Store root directory (env QTRACK_STORE_DIR).",
)
@click.option("--create", is_flag=True, help="Initialize the store if missing.")
@click.option("--ui-dir", default=None, help="Serve a static dashboard from this directory.")
def serve(addr: str, store_dir: str, create: bool, ui_dir: str | None) -> None:
    """Run the tracking server until interrupted."""
    host, sep, port_str = addr.rpartition(":")
    if not sep or not host:
        raise click.BadParameter("expected host:port", param_hint="--addr")
    try:
        port = int(port_str)
    except ValueError:
        raise click.BadParameter("port must be an integer", param_hint="--addr") from None
    if not (Path(store_dir) / "VERSION").exists() and not create:
        raise click.UsageError(f"no store at {store_dir}; pass --create to initialize one")

    from qtrack.errors import QTrackError
    from qtrack.server.serve import run_server

    try:
        run_server(store_dir, host=host, port=port, ui_dir=ui_dir, create=create)
    except QTrackError as exc:
        raise CliError(str(exc)) from None


# -- experiments -----------------------------------------------------------------


@main.group()
def experiments() -> None:
    """Inspect and create experiments."""


@experiments.command("list")
@click.option("--format", "fmt", type=click.Choice(["table", "json"]), default="table")
@click.pass_context
def experiments_list(ctx: click.Context, fmt: str) -> None:
    try:
        body = _client(ctx).get_json("/api/v1/experiments")
    except ApiFailure as exc:
        raise _fail(exc)
    if fmt == "json":
        click.echo(canonical_json(body, pretty=True), nl=False)
        return
    rows = []
    for raw in body["experiments"]:
        exp = Experiment.from_dict(raw)
        tags = ",".join(f"{k}={v}" for k, v in sorted(exp.tags.items()))
        rows.append([exp.experiment_id, exp.name, str(exp.creation_time), tags])
    click.echo(format_table(["experiment_id", "name", "creation_time", "tags"], rows))


@experiments.command("create")
@click.argument("name")
@click.pass_context
def experiments_create(ctx: click.Context, name: str) -> None:
    try:
        body = _client(ctx).post_json("/api/v1/experiments", {"name": name})
    except ApiFailure as exc:
        raise _fail(exc)
    click.echo(body["experiment_id"])


# -- runs -------------------------------------------------------------------------


@main.group()
def runs() -> None:
    """Search and inspect runs."""


def _echo_parse_error(filter_text: str, exc: ApiFailure) -> None:
    match = re.search(r"parse error at byte (\d+)", exc.message)
    if match is None:
        raise _fail(exc)
    position = int(match.group(1))
    prefix = len(filter_text.encode("utf-8")[:position].decode("utf-8", "replace"))
    click.echo(f"error: {exc.message}", err=True)
    click.echo(f"  {filter_text}", err=True)
    click.echo(f"  {' ' * prefix}^", err=True)
    sys.exit(1)


@runs.command("search")
@click.option("-e", "--experiment", "exp_name", required=True, help="Experiment name.")
@click.option("-f", "--filter", "filter_text", default="", help="Filter expression.")
@click.option("--order-by", "order_by", multiple=True, help="Sort term, e.g. 'metrics.fidelity DESC'.")
@click.option("--max-results", type=click.IntRange(1, 1000), default=100, show_default=True)
@click.option("--page-token", default=None, help="Continue a previous page.")
@click.option("--format", "fmt", type=click.Choice(["table", "json", "csv"]), default="table")
@click.pass_context
def runs_search(
    ctx: click.Context,
    exp_name: str,
    filter_text: str,
    order_by: tuple[str, ...],
    max_results: int,
    page_token: str | None,
    fmt: str,
) -> None:
    client = _client(ctx)
    try:
        exp = client.experiment_by_name(exp_name)
        body: dict = {
            "experiment_ids": [exp["experiment_id"]],
            "filter": filter_text,
            "max_results": max_results,
        }
        if order_by:
            body["order_by"] = list(order_by)
        if page_token:
            body["page_token"] = page_token
        page = client.post_json("/api/v1/runs/search", body)
    except ApiFailure as exc:
        if exc.error_code == "INVALID_PARAMETER" and "parse error" in exc.message:
            _echo_parse_error(filter_text, exc)
        raise _fail(exc)
    if fmt == "json":
        click.echo(canonical_json(page, pretty=True), nl=False)
        return
    rows_flat = [flatten_run(Run.from_dict(r)) for r in page["items"]]
    columns = run_columns(rows_flat)
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf)
        writer.writerow(columns)
        for row in rows_flat:
            writer.writerow([row.get(c, "") for c in columns])
        click.echo(buf.getvalue(), nl=False)
        return
    click.echo(format_table(columns, [[r.get(c, "") for c in columns] for r in rows_flat]))
    token = page.get("next_page_token")
    if token:
        click.echo(f"next page: --page-token {token}", err=True)


@runs.command("show")
@click.argument("run_id")
@click.option("--json", "as_json", is_flag=True, help="Emit the canonical run document.")
@click.pass_context
def runs_show(ctx: click.Context, run_id: str, as_json: bool) -> None:
    try:
        raw = _client(ctx).get_json(f"/api/v1/runs/{run_id}")
    except ApiFailure as exc:
        raise _fail(exc)
    if as_json:
        click.echo(canonical_json(raw, pretty=True), nl=False)
        return
    run = Run.from_dict(raw)
    click.echo(f"run_id:         {run.run_id}")
    click.echo(f"experiment_id:  {run.experiment_id}")
    click.echo(f"status:         {run.status.value}")
    click.echo(f"start_time:     {run.start_time}")
    if run.end_time is not None:
        click.echo(f"end_time:       {run.end_time}")
    for title, mapping in (("params", run.params), ("tags", run.tags)):
        if mapping:
            click.echo(f"{title}:")
            for key, value in sorted(mapping.items()):
                click.echo(f"  {key} = {value}")
    if run.metrics:
        click.echo("metrics:")
        for key, points in sorted(run.metrics.items()):
            latest = latest_metric_point(points)
            click.echo(f"  {key} = {latest.value!r} ({len(points)} points)")
    if run.artifacts:
        click.echo("artifacts:")
        for ref in run.artifacts:
            click.echo(
                f"  {ref.path}  sha256={ref.sha256[:12]}  {ref.size_bytes}B  {ref.media_type}"
            )
    kinds = [
        kind
        for kind in ("circuit", "compilation", "calibration", "execution")
        if getattr(run.provenance, kind) is not None
    ]
    if kinds:
        click.echo(f"provenance:     {', '.join(kinds)}")


# -- calibration ---------------------------------------------------------------------


@main.group()
def calib() -> None:
    """Calibration tooling."""


@calib.command("diff")
@click.argument("run_a")
@click.argument("run_b")
@click.option("--json", "as_json", is_flag=True, help="Emit the canonical diff document.")
@click.pass_context
def calib_diff(ctx: click.Context, run_a: str, run_b: str, as_json: bool) -> None:
    try:
        diff = _client(ctx).post_json(
            "/api/v1/calibration/diff", {"base_run_id": run_a, "other_run_id": run_b}
        )
    except ApiFailure as exc:
        raise _fail(exc)
    if as_json:
        click.echo(canonical_json(diff, pretty=True), nl=False)
        return
    if diff["base_id"] == diff["other_id"]:
        click.echo("identical calibration set (same calibration_set_id); all deltas zero")
    click.echo(f"base:  {diff['base_id']}")
    click.echo(f"other: {diff['other_id']}")
    rows = [
        [
            str(d["qubit_index"]),
            f"{d['d_t1_us']:+.3f}",
            f"{d['d_t2_us']:+.3f}",
            f"{d['d_readout_fidelity']:+.6f}",
        ]
        for d in diff["qubit_deltas"]
    ]
    click.echo(format_table(["qubit", "d_t1_us", "d_t2_us", "d_readout_fidelity"], rows))
    if diff["gate_deltas"]:
        rows = [
            [d["gate_name"], ",".join(map(str, d["qubit_indices"])), f"{d['d_fidelity']:+.6f}"]
            for d in diff["gate_deltas"]
        ]
        click.echo(format_table(["gate", "qubits", "d_fidelity"], rows))
    if diff["added_qubits"]:
        click.echo(f"added qubits:   {diff['added_qubits']}")
    if diff["removed_qubits"]:
        click.echo(f"removed qubits: {diff['removed_qubits']}")


# -- fixtures ---------------------------------------------------------------------------


@main.group()
def fixtures() -> None:
    """Deterministic synthetic data for demos and tests."""


@fixtures.command("calibration")
@click.option("--seed", type=int, required=True)
@click.option("--qubits", type=click.IntRange(min=1), required=True)
def fixtures_calibration(seed: int, qubits: int) -> None:
    calibration = generate_synthetic_calibration(seed, qubits)
    click.echo(canonical_json(calibration.to_dict(), pretty=True), nl=False)


# -- export / import ----------------------------------------------------------------------

BUNDLE_FORMAT = "qtrack-bundle"
BUNDLE_VERSION = 1


@main.command()
@click.option("-e", "--experiment", "exp_name", required=True, help="Experiment name.")
@click.option("--out", "out_dir", required=True, help="Bundle output directory.")
@click.option("--force", is_flag=True, help="Replace an existing non-empty output directory.")
@click.pass_context
def export(ctx: click.Context, exp_name: str, out_dir: str, force: bool) -> None:
    """Write an experiment's runs and artifacts to a portable bundle."""
    out = Path(out_dir)
    if out.exists() and any(out.iterdir()):
        if not force:
            raise click.UsageError(f"output directory {out} is not empty; pass --force")
        shutil.rmtree(out)
    client = _client(ctx)
    try:
        exp = client.experiment_by_name(exp_name)
        run_docs: list[dict] = []
        page_token: str | None = None
        while True:
            body: dict = {
                "experiment_ids": [exp["experiment_id"]],
                "max_results": 1000,
            }
            if page_token:
                body["page_token"] = page_token
            page = client.post_json("/api/v1/runs/search", body)
            run_docs.extend(page["items"])
            page_token = page.get("next_page_token")
            if not page_token:
                break

        (out / "runs").mkdir(parents=True, exist_ok=True)
        (out / "blobs").mkdir(exist_ok=True)
        seen: set[str] = set()
        for doc in run_docs:
            run_id = doc["run_id"]
            (out / "runs" / f"{run_id}.json").write_text(
                canonical_json(doc, pretty=True), encoding="utf-8"
            )
            for ref in doc.get("artifacts", []):
                sha = ref["sha256"]
                if sha in seen:
                    continue
                quoted = urllib.parse.quote(ref["path"], safe="/")
                resp = client.request(
                    "GET", f"/api/v1/runs/{run_id}/artifacts/{quoted}"
                )
                (out / "blobs" / sha).write_bytes(resp.content)
                seen.add(sha)
        manifest = {
            "format": BUNDLE_FORMAT,
            "version": BUNDLE_VERSION,
            "experiment": exp,
            "run_ids": [doc["run_id"] for doc in run_docs],
        }
        (out / "manifest.json").write_text(
            canonical_json(manifest, pretty=True), encoding="utf-8"
        )
    except ApiFailure as exc:
        raise _fail(exc)
    click.echo(f"exported {len(run_docs)} runs to {out}", err=True)


@main.command("import", hidden=True)
@click.option("--bundle", "bundle_dir", required=True, help="Bundle directory to import.")
@click.option("--store", "store_dir", required=True, help="Target store root.")
@click.option("--create", is_flag=True, help="Initialize the target store if missing.")
def import_bundle(bundle_dir: str, store_dir: str, create: bool) -> None:
    """Load an exported bundle directly into a store root.

    The target store must not be owned by a live server (single-owner rule);
    ids are preserved so searches against the import match the source.
    """
    from qtrack.errors import QTrackError
    from qtrack.storage.store import open_store

    bundle = Path(bundle_dir)
    try:
        manifest = json.loads((bundle / "manifest.json").read_text(encoding="utf-8"))
    except OSError as exc:
        raise CliError(f"cannot read bundle manifest: {exc}") from None
    if manifest.get("format") != BUNDLE_FORMAT or manifest.get("version") != BUNDLE_VERSION:
        raise CliError(f"{bundle} is not a supported bundle")
    try:
        with open_store(store_dir, create_if_missing=create) as store:
            store.create_experiment(Experiment.from_dict(manifest["experiment"]))
            for blob in sorted((bundle / "blobs").iterdir()):
                store.import_blob(blob.name, blob.read_bytes())
            count = 0
            for run_id in manifest["run_ids"]:
                doc = json.loads(
                    (bundle / "runs" / f"{run_id}.json").read_text(encoding="utf-8")
                )
                store.put_run(Run.from_dict(doc))
                count += 1
    except QTrackError as exc:
        raise CliError(str(exc)) from None
    click.echo(f"imported {count} runs into {store_dir}", err=True)


if __name__ == "__main__":
    main()

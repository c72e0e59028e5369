// Test harness: boots a real tracking server as a subprocess and seeds it
// over the public HTTP API, so every UI test exercises the same wire format a
// browser would see.
import { type ChildProcess, spawn } from "node:child_process";
import { mkdtempSync, rmSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { setTimeout as sleep } from "node:timers/promises";

export class TrackingServer {
  constructor(
    readonly base: string,
    private readonly proc: ChildProcess,
    private readonly dir: string,
    private readonly stderr: string[],
  ) {}

  stop(): void {
    this.proc.kill("SIGKILL");
    rmSync(this.dir, { recursive: true, force: true });
  }

  errorOutput(): string {
    return this.stderr.join("");
  }
}

export interface ServerOptions {
  // Directory of built static assets to serve alongside the API.
  uiDir?: string;
}

async function tryStart(port: number, options: ServerOptions): Promise<TrackingServer | undefined> {
  const dir = mkdtempSync(join(tmpdir(), "qtrack-ui-test-"));
  const base = `http://127.0.0.1:${port}`;
  const env = { ...process.env };
  delete env.QTRACK_AUTH_TOKEN;
  delete env.QTRACK_TRACKING_URI;
  const args = [
    "-m",
    "qtrack.cli",
    "serve",
    "--addr",
    `127.0.0.1:${port}`,
    "--store",
    join(dir, "store"),
    "--create",
  ];
  if (options.uiDir !== undefined) {
    args.push("--ui-dir", options.uiDir);
  }
  const proc = spawn("python3", args, { env, stdio: ["ignore", "ignore", "pipe"] });
  const stderr: string[] = [];
  proc.stderr?.on("data", (chunk: Buffer) => stderr.push(chunk.toString()));
  let exited = false;
  proc.on("exit", () => {
    exited = true;
  });

  const deadline = Date.now() + 20_000;
  while (Date.now() < deadline) {
    if (exited) {
      rmSync(dir, { recursive: true, force: true });
      return undefined;
    }
    try {
      const res = await fetch(`${base}/healthz`);
      if (res.ok) {
        return new TrackingServer(base, proc, dir, stderr);
      }
    } catch {
      // Server not accepting connections yet.
    }
    await sleep(100);
  }
  proc.kill("SIGKILL");
  rmSync(dir, { recursive: true, force: true });
  throw new Error(`server did not become healthy on port ${port}:\n${stderr.join("")}`);
}

export async function startServer(options: ServerOptions = {}): Promise<TrackingServer> {
  for (let attempt = 0; attempt < 5; attempt += 1) {
    const port = 21000 + Math.floor(Math.random() * 20000);
    const server = await tryStart(port, options);
    if (server !== undefined) {
      return server;
    }
  }
  throw new Error("could not find a free port for the tracking server");
}

// Raw request with a pre-encoded body; encoding is done by the callers so
// no type sniffing happens here (instanceof checks are unreliable across
// the jsdom/node realm boundary).
async function request(
  base: string,
  method: string,
  path: string,
  body?: BodyInit,
  contentType = "application/json",
): Promise<Response> {
  const init: RequestInit = { method };
  if (body !== undefined) {
    init.headers = { "content-type": contentType };
    init.body = body;
  }
  const res = await fetch(`${base}/api/v1${path}`, init);
  if (!res.ok) {
    const text = await res.text();
    throw new Error(`${method} ${path} -> ${res.status}: ${text}`);
  }
  return res;
}

export async function postJson<T = Record<string, unknown>>(
  base: string,
  path: string,
  body: unknown,
): Promise<T> {
  const res = await request(base, "POST", path, JSON.stringify(body));
  return (await res.json()) as T;
}

export async function getJson<T = Record<string, unknown>>(
  base: string,
  path: string,
): Promise<T> {
  const res = await request(base, "GET", path);
  return (await res.json()) as T;
}

export async function createExperiment(base: string, name: string): Promise<string> {
  const doc = await postJson<{ experiment_id: string }>(base, "/experiments", { name });
  return doc.experiment_id;
}

export interface SeedRun {
  params?: Record<string, string>;
  tags?: Record<string, string>;
  metrics?: Array<{ key: string; value: number; step?: number; timestamp?: number }>;
  status?: string;
}

export async function createRun(
  base: string,
  experimentId: string,
  seed: SeedRun = {},
): Promise<string> {
  const doc = await postJson<{ run_id: string }>(base, "/runs", {
    experiment_id: experimentId,
  });
  const runId = doc.run_id;
  for (const [key, value] of Object.entries(seed.params ?? {})) {
    await postJson(base, `/runs/${runId}/params`, { key, value });
  }
  for (const [key, value] of Object.entries(seed.tags ?? {})) {
    await postJson(base, `/runs/${runId}/tags`, { key, value });
  }
  for (const point of seed.metrics ?? []) {
    await postJson(base, `/runs/${runId}/metrics`, {
      key: point.key,
      value: point.value,
      step: point.step ?? 0,
      timestamp: point.timestamp ?? 1_754_000_000_000,
    });
  }
  if (seed.status !== undefined) {
    await request(
      base,
      "PATCH",
      `/runs/${runId}`,
      JSON.stringify({ status: seed.status, end_time: Date.now() }),
    );
  }
  // The server assigns start_time itself; keep creation times strictly
  // increasing so the default search order (newest first) is deterministic
  // for runs seeded back to back.
  await sleep(5);
  return runId;
}

export async function finishRun(base: string, runId: string): Promise<void> {
  await request(
    base,
    "PATCH",
    `/runs/${runId}`,
    JSON.stringify({ status: "FINISHED", end_time: Date.now() }),
  );
}

export async function putArtifact(
  base: string,
  runId: string,
  path: string,
  payload: Uint8Array | string,
  mediaType: string,
): Promise<void> {
  const bytes =
    typeof payload === "string" ? new TextEncoder().encode(payload) : payload;
  // The lib typings want a Uint8Array backed by a plain ArrayBuffer; encode()
  // is typed looser than that, so assert the body type once here.
  await request(
    base,
    "PUT",
    `/runs/${runId}/artifacts/${path}`,
    bytes as unknown as BodyInit,
    mediaType,
  );
}

export async function postProvenance(
  base: string,
  runId: string,
  kind: string,
  payload: unknown,
): Promise<void> {
  await postJson(base, `/runs/${runId}/provenance`, { [kind]: payload });
}

// Small handcrafted calibration set: three qubits, prx on each, cz on the
// neighbouring pairs. The offset shifts every figure so two payloads built
// with different offsets produce nonzero deltas everywhere.
export function makeCalibration(
  calibrationSetId: string,
  offset: number,
): Record<string, unknown> {
  const qubits = [0, 1, 2].map((i) => ({
    qubit_index: i,
    t1_us: 50 + 10 * i + offset,
    t2_us: 40 + 8 * i + offset / 2,
    readout_fidelity: 0.95 + 0.002 * i + 0.001 * offset,
  }));
  const prx = [0, 1, 2].map((i) => ({
    gate_name: "prx",
    qubit_indices: [i],
    fidelity: 0.99 - 0.001 * i - 0.0005 * offset,
  }));
  const cz = [0, 1].map((i) => ({
    gate_name: "cz",
    qubit_indices: [i, i + 1],
    fidelity: 0.97 - 0.002 * i - 0.001 * offset,
  }));
  return {
    calibration_set_id: calibrationSetId,
    device_name: "ui-test-3q",
    qubit_count: 3,
    timestamp: 1_735_689_600_000 + offset,
    qubits,
    gates: [...prx, ...cz],
  };
}

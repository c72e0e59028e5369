// Typed access to the tracking server's HTTP API. Every number and string
// the UI renders comes out of one of these responses; nothing is derived
// client-side beyond display formatting.

export interface MetricPoint {
  key: string;
  value: number;
  timestamp: number;
  step: number;
}

export interface ArtifactRef {
  run_id: string;
  path: string;
  sha256: string;
  size_bytes: number;
  media_type: string;
}

export interface CalibrationDoc {
  calibration_set_id: string;
  device_name: string;
  qubit_count: number;
  timestamp: number;
  qubits: Array<{
    qubit_index: number;
    t1_us: number;
    t2_us: number;
    readout_fidelity: number;
  }>;
  gates: Array<{ gate_name: string; qubit_indices: number[]; fidelity: number }>;
}

export interface ExecutionDoc {
  shots: number;
  counts: Record<string, number>;
  backend_name: string;
  calibration_set_id?: string;
  submitted_at: number;
  completed_at: number;
}

export interface RunDoc {
  run_id: string;
  experiment_id: string;
  status: string;
  start_time: number;
  end_time?: number;
  params: Record<string, string>;
  tags: Record<string, string>;
  metrics: Record<string, MetricPoint[]>;
  artifacts: ArtifactRef[];
  provenance?: {
    circuit?: Record<string, unknown>;
    compilation?: Record<string, unknown>;
    calibration?: CalibrationDoc;
    execution?: ExecutionDoc;
  };
}

export interface ExperimentDoc {
  experiment_id: string;
  name: string;
  creation_time: number;
  lifecycle: string;
  tags: Record<string, string>;
}

export interface SearchRequest {
  experiment_ids: string[];
  filter?: string;
  order_by?: string[];
  max_results?: number;
  page_token?: string;
}

export interface SearchPage {
  items: RunDoc[];
  next_page_token?: string;
}

export interface QubitDelta {
  qubit_index: number;
  d_t1_us: number;
  d_t2_us: number;
  d_readout_fidelity: number;
}

export interface GateDelta {
  gate_name: string;
  qubit_indices: number[];
  d_fidelity: number;
}

export interface CalibrationDiffDoc {
  base_id: string;
  other_id: string;
  qubit_deltas: QubitDelta[];
  gate_deltas: GateDelta[];
  added_qubits: number[];
  removed_qubits: number[];
}

export type LatestMetrics = Record<string, MetricPoint>;

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly errorCode: string,
    message: string,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

export class Api {
  // Empty base means same-origin, which is how the served UI runs.
  constructor(readonly base: string = "") {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    let resp: Response;
    try {
      resp = await fetch(this.base + path, {
        method,
        headers: body === undefined ? {} : { "content-type": "application/json" },
        body: body === undefined ? undefined : JSON.stringify(body),
      });
    } catch (err) {
      throw new Error(`cannot reach tracking server: ${String(err)}`);
    }
    if (!resp.ok) {
      let code = "INTERNAL";
      let message = `request failed with status ${resp.status}`;
      try {
        const data = (await resp.json()) as { error_code?: string; message?: string };
        if (typeof data.error_code === "string") code = data.error_code;
        if (typeof data.message === "string") message = data.message;
      } catch {
        // Non-JSON error body; keep the fallback message.
      }
      throw new ApiError(resp.status, code, message);
    }
    return (await resp.json()) as T;
  }

  listExperiments(): Promise<{ experiments: ExperimentDoc[] }> {
    return this.request("GET", "/api/v1/experiments");
  }

  searchRuns(body: SearchRequest): Promise<SearchPage> {
    return this.request("POST", "/api/v1/runs/search", body);
  }

  getRun(runId: string): Promise<RunDoc> {
    return this.request("GET", `/api/v1/runs/${encodeURIComponent(runId)}`);
  }

  latestMetrics(runId: string): Promise<LatestMetrics> {
    return this.request<{ latest: LatestMetrics }>(
      "GET",
      `/api/v1/runs/${encodeURIComponent(runId)}/metrics/latest`,
    ).then((body) => body.latest);
  }

  calibrationDiff(baseRunId: string, otherRunId: string): Promise<CalibrationDiffDoc> {
    return this.request("POST", "/api/v1/calibration/diff", {
      base_run_id: baseRunId,
      other_run_id: otherRunId,
    });
  }

  artifactUrl(runId: string, path: string): string {
    const encodedPath = path.split("/").map(encodeURIComponent).join("/");
    return `${this.base}/api/v1/runs/${encodeURIComponent(runId)}/artifacts/${encodedPath}`;
  }

  async artifactText(runId: string, path: string): Promise<string> {
    const resp = await fetch(this.artifactUrl(runId, path));
    if (!resp.ok) {
      throw new ApiError(resp.status, "RESOURCE_NOT_FOUND", `artifact ${path} not found`);
    }
    return resp.text();
  }
}

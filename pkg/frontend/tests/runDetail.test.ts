// Run detail view against a live tracking server: params, tags, metric
// sparklines labelled with the server's latest value, and the artifact list
// with inline previews.
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { Api, ApiError } from "../src/api.js";
import { renderNotFound, renderRunDetail, renderSparkline } from "../src/runDetail.js";
import {
  createExperiment,
  createRun,
  finishRun,
  putArtifact,
  startServer,
  type TrackingServer,
} from "./harness.js";

const PNG_BYTES = new Uint8Array([
  0x89, 0x50, 0x4e, 0x47, 0x0d, 0x0a, 0x1a, 0x0a, 0x00, 0x00, 0x00, 0x0d,
]);

let server: TrackingServer;
let api: Api;
let experimentId: string;
let runId: string;

beforeAll(async () => {
  server = await startServer();
  api = new Api(server.base);
  experimentId = await createExperiment(server.base, "detail fixtures");
  runId = await createRun(server.base, experimentId, {
    params: { shots: "500" },
    tags: { "Training info": "Qiskit on Qx" },
    metrics: [
      { key: "fidelity", value: 0.5, step: 0 },
      { key: "fidelity", value: 0.7, step: 1 },
      { key: "fidelity", value: 0.6, step: 2 },
    ],
  });
  await putArtifact(server.base, runId, "results.png", PNG_BYTES, "image/png");
  await putArtifact(
    server.base,
    runId,
    "calibration_data.json",
    '{"calibration_set_id":"cal-7","qubit_count":3}',
    "application/json",
  );
  await putArtifact(server.base, runId, "notes/readme.txt", "two qubits", "text/plain");
  await finishRun(server.base, runId);
});

afterAll(() => {
  server.stop();
});

async function renderedDetail(): Promise<HTMLElement> {
  const run = await api.getRun(runId);
  const latest = await api.latestMetrics(runId);
  const jsonPreviews: Record<string, string> = {};
  for (const artifact of run.artifacts) {
    if (artifact.media_type.startsWith("application/json")) {
      jsonPreviews[artifact.path] = await api.artifactText(runId, artifact.path);
    }
  }
  return renderRunDetail(document, { run, latest, jsonPreviews, api });
}

describe("run detail view", () => {
  it("shows params and tags as logged", async () => {
    const view = await renderedDetail();
    expect(
      view.querySelector('.params-table tr[data-key="shots"] td:last-child')?.textContent,
    ).toBe("500");
    expect(
      view.querySelector('.tags-table tr[data-key="Training info"] td:last-child')?.textContent,
    ).toBe("Qiskit on Qx");
  });

  it("labels each metric with the server's latest value and draws one point per log", async () => {
    const view = await renderedDetail();
    const row = view.querySelector('.metric-row[data-metric="fidelity"]');
    expect(row).not.toBeNull();
    // Latest by step is 0.6, not the maximum or the last-written value.
    expect(row?.querySelector(".metric-label")?.textContent).toBe("fidelity = 0.6");
    expect(row?.querySelector(".metric-count")?.textContent).toBe("3 points");
    const polyline = row?.querySelector("polyline");
    expect(polyline?.getAttribute("points")?.split(" ").length).toBe(3);
  });

  it("lists artifacts with size, media type, and working links", async () => {
    const view = await renderedDetail();
    const items = [...view.querySelectorAll(".artifact-list li")];
    expect(items.map((li) => li.getAttribute("data-path"))).toEqual([
      "calibration_data.json",
      "notes/readme.txt",
      "results.png",
    ]);

    const pngItem = view.querySelector('.artifact-list li[data-path="results.png"]');
    expect(pngItem?.textContent).toContain("(image/png, 12 bytes)");
    const href = pngItem?.querySelector("a")?.getAttribute("href") ?? "";
    expect(href).toBe(`${server.base}/api/v1/runs/${runId}/artifacts/results.png`);
    const fetched = new Uint8Array(await (await fetch(href)).arrayBuffer());
    expect([...fetched]).toEqual([...PNG_BYTES]);
  });

  it("previews images inline", async () => {
    const view = await renderedDetail();
    const img = view.querySelector<HTMLImageElement>(
      'li[data-path="results.png"] img.artifact-preview',
    );
    expect(img).not.toBeNull();
    expect(img?.getAttribute("src")).toContain("/artifacts/results.png");
    expect(view.querySelector('li[data-path="notes/readme.txt"] img')).toBeNull();
  });

  it("pretty-prints JSON artifacts in the viewer", async () => {
    const view = await renderedDetail();
    const viewer = view.querySelector('pre.json-viewer[data-path="calibration_data.json"]');
    expect(viewer).not.toBeNull();
    expect(viewer?.textContent).toBe(
      JSON.stringify({ calibration_set_id: "cal-7", qubit_count: 3 }, null, 2),
    );
    expect(view.querySelector('pre.json-viewer[data-path="results.png"]')).toBeNull();
  });

  it("encodes artifact path segments in links without mangling slashes", () => {
    const url = api.artifactUrl(runId, "plots/fidelity vs shots.png");
    expect(url).toBe(
      `${server.base}/api/v1/runs/${runId}/artifacts/plots/fidelity%20vs%20shots.png`,
    );
  });

  it("renders a not-found view for a missing run", async () => {
    let error: ApiError | undefined;
    try {
      await api.getRun("0".repeat(32));
    } catch (err) {
      error = err as ApiError;
    }
    expect(error).toBeInstanceOf(ApiError);
    expect(error?.status).toBe(404);
    expect(error?.errorCode).toBe("RESOURCE_NOT_FOUND");
    const view = renderNotFound(document, error?.message ?? "");
    expect(view.className).toBe("not-found");
    expect(view.textContent).toBe(error?.message);
  });
});

describe("sparkline", () => {
  it("draws a coordinate pair for every point in series order", () => {
    const points = [5, 3, 9, 7].map((value, i) => ({
      key: "m",
      value,
      timestamp: 1_754_000_000_000 + i,
      step: i,
    }));
    const svg = renderSparkline(document, points);
    const coords = svg.querySelector("polyline")?.getAttribute("points")?.split(" ") ?? [];
    expect(coords.length).toBe(4);
    for (const pair of coords) {
      expect(pair).toMatch(/^-?\d+(\.\d+)?,-?\d+(\.\d+)?$/);
    }
    // Lowest value sits lower in the image (larger y) than the highest.
    const ys = coords.map((pair) => Number(pair.split(",")[1]));
    expect(Math.max(...(ys as number[]))).toBe(ys[1]);
    expect(Math.min(...(ys as number[]))).toBe(ys[2]);
  });

  it("handles a single point without dividing by zero", () => {
    const svg = renderSparkline(document, [
      { key: "m", value: 1.5, timestamp: 1, step: 0 },
    ]);
    const points = svg.querySelector("polyline")?.getAttribute("points") ?? "";
    expect(points).not.toContain("NaN");
    expect(points.split(" ").length).toBe(1);
  });
});

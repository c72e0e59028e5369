// Typed access to the tracking server's HTTP API. Every number and string
// the UI renders comes out of one of these responses; nothing is derived
// client-side beyond display formatting.
export class ApiError extends Error {
    constructor(status, errorCode, message) {
        super(message);
        this.status = status;
        this.errorCode = errorCode;
        this.name = "ApiError";
    }
}
export class Api {
    // Empty base means same-origin, which is how the served UI runs.
    constructor(base = "") {
        this.base = base;
    }
    async request(method, path, body) {
        let resp;
        try {
            resp = await fetch(this.base + path, {
                method,
                headers: body === undefined ? {} : { "content-type": "application/json" },
                body: body === undefined ? undefined : JSON.stringify(body),
            });
        }
        catch (err) {
            throw new Error(`cannot reach tracking server: ${String(err)}`);
        }
        if (!resp.ok) {
            let code = "INTERNAL";
            let message = `request failed with status ${resp.status}`;
            try {
                const data = (await resp.json());
                if (typeof data.error_code === "string")
                    code = data.error_code;
                if (typeof data.message === "string")
                    message = data.message;
            }
            catch {
                // Non-JSON error body; keep the fallback message.
            }
            throw new ApiError(resp.status, code, message);
        }
        return (await resp.json());
    }
    listExperiments() {
        return this.request("GET", "/api/v1/experiments");
    }
    searchRuns(body) {
        return this.request("POST", "/api/v1/runs/search", body);
    }
    getRun(runId) {
        return this.request("GET", `/api/v1/runs/${encodeURIComponent(runId)}`);
    }
    latestMetrics(runId) {
        return this.request("GET", `/api/v1/runs/${encodeURIComponent(runId)}/metrics/latest`).then((body) => body.latest);
    }
    calibrationDiff(baseRunId, otherRunId) {
        return this.request("POST", "/api/v1/calibration/diff", {
            base_run_id: baseRunId,
            other_run_id: otherRunId,
        });
    }
    artifactUrl(runId, path) {
        const encodedPath = path.split("/").map(encodeURIComponent).join("/");
        return `${this.base}/api/v1/runs/${encodeURIComponent(runId)}/artifacts/${encodedPath}`;
    }
    async artifactText(runId, path) {
        const resp = await fetch(this.artifactUrl(runId, path));
        if (!resp.ok) {
            throw new ApiError(resp.status, "RESOURCE_NOT_FOUND", `artifact ${path} not found`);
        }
        return resp.text();
    }
}

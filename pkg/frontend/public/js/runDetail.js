// Single-run view: params, tags, metric histories with sparklines and the
// server-reported latest value, the artifact list with an inline preview
// for images, and a JSON viewer for JSON artifacts.
import { el } from "./dom.js";
import { formatNumber, formatTime } from "./format.js";
const SVG_NS = "http://www.w3.org/2000/svg";
// Inline sparkline of a metric history in series order. Scaling is purely
// visual; one polyline point per logged point.
export function renderSparkline(doc, points) {
    const width = 160;
    const height = 36;
    const pad = 2;
    const svg = doc.createElementNS(SVG_NS, "svg");
    svg.setAttribute("class", "sparkline");
    svg.setAttribute("viewBox", `0 0 ${width} ${height}`);
    svg.setAttribute("width", String(width));
    svg.setAttribute("height", String(height));
    const values = points.map((p) => p.value);
    const min = Math.min(...values);
    const max = Math.max(...values);
    const span = max - min || 1;
    const stepX = points.length > 1 ? (width - 2 * pad) / (points.length - 1) : 0;
    const coords = values.map((value, i) => {
        const x = pad + i * stepX;
        const y = height - pad - ((value - min) / span) * (height - 2 * pad);
        return `${x.toFixed(1)},${y.toFixed(1)}`;
    });
    const line = doc.createElementNS(SVG_NS, "polyline");
    line.setAttribute("points", coords.join(" "));
    line.setAttribute("fill", "none");
    line.setAttribute("stroke", "#4878a8");
    line.setAttribute("stroke-width", "1.5");
    svg.append(line);
    return svg;
}
function kvTable(doc, className, entries) {
    const keys = Object.keys(entries).sort();
    if (keys.length === 0) {
        return el(doc, "p", { class: "empty" }, "none");
    }
    const table = el(doc, "table", { class: className });
    for (const key of keys) {
        table.append(el(doc, "tr", { "data-key": key }, el(doc, "td", { class: "key-cell" }, key), el(doc, "td", {}, entries[key] ?? "")));
    }
    return table;
}
export function renderRunDetail(doc, data) {
    const { run, latest } = data;
    const root = el(doc, "div", { class: "run-detail" });
    root.append(el(doc, "h2", {}, `run ${run.run_id}`));
    const facts = el(doc, "table", { class: "run-facts" });
    const rows = [
        ["experiment", run.experiment_id],
        ["status", run.status],
        ["started", formatTime(run.start_time)],
        ["ended", formatTime(run.end_time)],
    ];
    for (const [label, value] of rows) {
        facts.append(el(doc, "tr", {}, el(doc, "td", { class: "key-cell" }, label), el(doc, "td", {}, value)));
    }
    root.append(facts);
    root.append(el(doc, "h3", {}, "Params"));
    root.append(kvTable(doc, "params-table", run.params));
    root.append(el(doc, "h3", {}, "Tags"));
    root.append(kvTable(doc, "tags-table", run.tags));
    root.append(el(doc, "h3", {}, "Metrics"));
    const metricKeys = Object.keys(run.metrics).sort();
    if (metricKeys.length === 0) {
        root.append(el(doc, "p", { class: "empty" }, "none"));
    }
    for (const key of metricKeys) {
        const points = run.metrics[key] ?? [];
        const row = el(doc, "div", { class: "metric-row", "data-metric": key });
        const latestPoint = latest[key];
        const label = latestPoint === undefined ? key : `${key} = ${formatNumber(latestPoint.value)}`;
        row.append(el(doc, "span", { class: "metric-label" }, label));
        row.append(renderSparkline(doc, points));
        row.append(el(doc, "span", { class: "metric-count" }, `${points.length} points`));
        root.append(row);
    }
    root.append(el(doc, "h3", {}, "Artifacts"));
    if (run.artifacts.length === 0) {
        root.append(el(doc, "p", { class: "empty" }, "none"));
    }
    else {
        const list = el(doc, "ul", { class: "artifact-list" });
        for (const artifact of run.artifacts) {
            const item = el(doc, "li", { "data-path": artifact.path });
            const url = data.api?.artifactUrl(run.run_id, artifact.path) ?? "";
            item.append(el(doc, "a", { href: url, target: "_blank" }, artifact.path), ` (${artifact.media_type}, ${artifact.size_bytes} bytes)`);
            if (artifact.media_type.startsWith("image/")) {
                item.append(el(doc, "img", { class: "artifact-preview", src: url, alt: artifact.path }));
            }
            const preview = data.jsonPreviews?.[artifact.path];
            if (preview !== undefined) {
                let pretty = preview;
                try {
                    pretty = JSON.stringify(JSON.parse(preview), null, 2);
                }
                catch {
                    // Not valid JSON after all; show the raw text.
                }
                item.append(el(doc, "pre", { class: "json-viewer", "data-path": artifact.path }, pretty));
            }
            list.append(item);
        }
        root.append(list);
    }
    return root;
}
export function renderNotFound(doc, message) {
    return el(doc, "div", { class: "not-found" }, message);
}

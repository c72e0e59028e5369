// Calibration diff view: per-qubit and per-gate delta tables plus a
// worst-drift summary. Every delta cell renders a number from the server's
// diff response verbatim; the view only chooses which of those numbers to
// headline.
import { el } from "./dom.js";
import { formatNumber } from "./format.js";
function worstQubit(deltas) {
    let worst;
    for (const delta of deltas) {
        if (worst === undefined || Math.abs(delta.d_readout_fidelity) > Math.abs(worst.d_readout_fidelity)) {
            worst = delta;
        }
    }
    return worst;
}
function worstGate(deltas) {
    let worst;
    for (const delta of deltas) {
        if (worst === undefined || Math.abs(delta.d_fidelity) > Math.abs(worst.d_fidelity)) {
            worst = delta;
        }
    }
    return worst;
}
function gateLabel(delta) {
    return `${delta.gate_name}[${delta.qubit_indices.join(",")}]`;
}
export function renderCalibrationDiff(doc, diff) {
    const root = el(doc, "div", { class: "calib-diff-view" });
    root.append(el(doc, "h2", {}, "calibration diff"));
    root.append(el(doc, "p", { class: "diff-ids" }, `base ${diff.base_id} → other ${diff.other_id}`));
    if (diff.base_id === diff.other_id) {
        root.append(el(doc, "div", { class: "identical-banner" }, "identical calibration sets"));
    }
    const summary = el(doc, "div", { class: "worst-drift" });
    const qubit = worstQubit(diff.qubit_deltas);
    const gate = worstGate(diff.gate_deltas);
    if (qubit === undefined && gate === undefined) {
        summary.append("no overlapping calibration entries");
    }
    if (qubit !== undefined) {
        summary.append(el(doc, "p", { "data-qubit": String(qubit.qubit_index) }, `worst readout drift: qubit ${qubit.qubit_index} (${formatNumber(qubit.d_readout_fidelity)})`));
    }
    if (gate !== undefined) {
        summary.append(el(doc, "p", { "data-gate": gateLabel(gate) }, `worst gate drift: ${gateLabel(gate)} (${formatNumber(gate.d_fidelity)})`));
    }
    root.append(summary);
    const qubitTable = el(doc, "table", { class: "qubit-deltas" });
    qubitTable.append(el(doc, "thead", {}, el(doc, "tr", {}, el(doc, "th", {}, "qubit"), el(doc, "th", {}, "d_t1_us"), el(doc, "th", {}, "d_t2_us"), el(doc, "th", {}, "d_readout_fidelity"))));
    const qubitBody = el(doc, "tbody");
    for (const delta of diff.qubit_deltas) {
        qubitBody.append(el(doc, "tr", { "data-qubit": String(delta.qubit_index) }, el(doc, "td", {}, String(delta.qubit_index)), el(doc, "td", { "data-field": "d_t1_us" }, formatNumber(delta.d_t1_us)), el(doc, "td", { "data-field": "d_t2_us" }, formatNumber(delta.d_t2_us)), el(doc, "td", { "data-field": "d_readout_fidelity" }, formatNumber(delta.d_readout_fidelity))));
    }
    qubitTable.append(qubitBody);
    root.append(el(doc, "h3", {}, "per-qubit deltas"), qubitTable);
    const gateTable = el(doc, "table", { class: "gate-deltas" });
    gateTable.append(el(doc, "thead", {}, el(doc, "tr", {}, el(doc, "th", {}, "gate"), el(doc, "th", {}, "d_fidelity"))));
    const gateBody = el(doc, "tbody");
    for (const delta of diff.gate_deltas) {
        gateBody.append(el(doc, "tr", { "data-gate": gateLabel(delta) }, el(doc, "td", {}, gateLabel(delta)), el(doc, "td", { "data-field": "d_fidelity" }, formatNumber(delta.d_fidelity))));
    }
    gateTable.append(gateBody);
    root.append(el(doc, "h3", {}, "per-gate deltas"), gateTable);
    if (diff.added_qubits.length > 0 || diff.removed_qubits.length > 0) {
        root.append(el(doc, "p", { class: "membership" }, `added qubits: [${diff.added_qubits.join(", ")}] removed qubits: [${diff.removed_qubits.join(", ")}]`));
    }
    return root;
}

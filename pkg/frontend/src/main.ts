// Hash-routed single-page shell over the tracking API. Views are pure
// render functions fed by API responses; this module only wires routing,
// fetching, and input state together.

import { Api, ApiError } from "./api.js";
import type { RunDoc } from "./api.js";
import { renderCalibrationDiff } from "./calibDiff.js";
import { renderCompare } from "./compare.js";
import { el } from "./dom.js";
import { formatTime } from "./format.js";
import { renderNotFound, renderRunDetail } from "./runDetail.js";
import type { RunTableSort } from "./runTable.js";
import { orderByForColumn, renderFilterError, renderRunTable } from "./runTable.js";

const api = new Api("");

// Only JSON artifacts up to this size are fetched for the inline viewer.
const JSON_PREVIEW_LIMIT = 256 * 1024;

interface ExperimentViewState {
  experimentId: string;
  filter: string;
  sort?: RunTableSort;
  selected: Set<string>;
}

let viewState: ExperimentViewState | null = null;

function appRoot(): HTMLElement {
  const root = document.getElementById("app");
  if (root === null) {
    throw new Error("missing #app container");
  }
  return root;
}

function showError(root: HTMLElement, err: unknown): void {
  const message = err instanceof Error ? err.message : String(err);
  root.replaceChildren(el(document, "div", { class: "error-box" }, message));
}

async function showExperiments(root: HTMLElement): Promise<void> {
  const { experiments } = await api.listExperiments();
  const view = el(document, "div", { class: "experiments-view" });
  view.append(el(document, "h2", {}, "Experiments"));
  if (experiments.length === 0) {
    view.append(el(document, "p", { class: "empty" }, "no experiments yet"));
  } else {
    const table = el(document, "table", { class: "experiments-table" });
    table.append(
      el(
        document,
        "thead",
        {},
        el(
          document,
          "tr",
          {},
          el(document, "th", {}, "name"),
          el(document, "th", {}, "created"),
          el(document, "th", {}, "id"),
        ),
      ),
    );
    const body = el(document, "tbody");
    for (const exp of experiments) {
      body.append(
        el(
          document,
          "tr",
          { "data-experiment-id": exp.experiment_id },
          el(
            document,
            "td",
            {},
            el(document, "a", { href: `#/exp/${exp.experiment_id}` }, exp.name),
          ),
          el(document, "td", {}, formatTime(exp.creation_time)),
          el(document, "td", { class: "mono" }, exp.experiment_id),
        ),
      );
    }
    table.append(body);
    view.append(table);
  }
  root.replaceChildren(view);
}

function debounce(fn: () => void, delayMs: number): () => void {
  let timer: ReturnType<typeof setTimeout> | undefined;
  return () => {
    if (timer !== undefined) clearTimeout(timer);
    timer = setTimeout(fn, delayMs);
  };
}

async function showExperiment(root: HTMLElement, experimentId: string): Promise<void> {
  if (viewState === null || viewState.experimentId !== experimentId) {
    viewState = { experimentId, filter: "", selected: new Set() };
  }
  const state = viewState;

  const view = el(document, "div", { class: "experiment-view" });
  view.append(el(document, "h2", {}, "Runs"));

  const filterInput = el(document, "input", {
    class: "filter-input",
    type: "text",
    placeholder: 'filter, e.g. params.shots = "500" AND metrics.fidelity > 0.9',
    value: state.filter,
  });
  const compareButton = el(
    document,
    "button",
    { class: "compare-button", disabled: "" },
    "compare selected",
  );
  const errorSlot = el(document, "div", { class: "filter-error-slot" });
  const tableSlot = el(document, "div", { class: "run-table-slot" });
  view.append(
    el(document, "div", { class: "toolbar" }, filterInput, compareButton),
    errorSlot,
    tableSlot,
  );

  function syncCompareButton(): void {
    const usable = state.selected.size >= 2 && state.selected.size <= 4;
    if (usable) {
      compareButton.removeAttribute("disabled");
      compareButton.title = "";
    } else {
      compareButton.setAttribute("disabled", "");
      compareButton.title = "select two to four runs";
    }
  }

  async function refresh(): Promise<void> {
    try {
      const orderBy = state.sort
        ? orderByForColumn(state.sort.column, state.sort.ascending)
        : undefined;
      const page = await api.searchRuns({
        experiment_ids: [experimentId],
        filter: state.filter,
        order_by: orderBy === undefined ? undefined : [orderBy],
      });
      errorSlot.replaceChildren();
      const table = renderRunTable(document, page.items, {
        selectable: true,
        sort: state.sort,
        onSort: (column, ascending) => {
          state.sort = { column, ascending };
          void refresh();
        },
      });
      table.addEventListener("change", (event) => {
        const target = event.target as HTMLInputElement;
        if (!target.classList.contains("compare-select")) return;
        const runId = target.getAttribute("data-run-id");
        if (runId === null) return;
        if (target.checked) {
          state.selected.add(runId);
        } else {
          state.selected.delete(runId);
        }
        syncCompareButton();
      });
      for (const box of table.querySelectorAll<HTMLInputElement>("input.compare-select")) {
        box.checked = state.selected.has(box.getAttribute("data-run-id") ?? "");
      }
      tableSlot.replaceChildren(table);
    } catch (err) {
      if (err instanceof ApiError && err.errorCode === "INVALID_PARAMETER") {
        errorSlot.replaceChildren(renderFilterError(document, state.filter, err.message));
      } else {
        showError(tableSlot, err);
      }
    }
    syncCompareButton();
  }

  const debouncedRefresh = debounce(() => void refresh(), 250);
  filterInput.addEventListener("input", () => {
    state.filter = filterInput.value;
    debouncedRefresh();
  });
  compareButton.addEventListener("click", () => {
    const ids = [...state.selected].sort();
    window.location.hash = `#/compare/${ids.join(",")}`;
  });

  root.replaceChildren(view);
  await refresh();
}

async function showRun(root: HTMLElement, runId: string): Promise<void> {
  let run: RunDoc;
  try {
    run = await api.getRun(runId);
  } catch (err) {
    if (err instanceof ApiError && err.status === 404) {
      root.replaceChildren(renderNotFound(document, `run ${runId} not found`));
      return;
    }
    throw err;
  }
  const latest = await api.latestMetrics(runId);
  const jsonPreviews: Record<string, string> = {};
  for (const artifact of run.artifacts) {
    const isJson = artifact.media_type === "application/json";
    if (isJson && artifact.size_bytes <= JSON_PREVIEW_LIMIT) {
      jsonPreviews[artifact.path] = await api.artifactText(runId, artifact.path);
    }
  }
  root.replaceChildren(renderRunDetail(document, { run, latest, jsonPreviews, api }));
}

async function showCompare(root: HTMLElement, idsCsv: string): Promise<void> {
  const ids = idsCsv.split(",").filter((id) => id.length > 0);
  if (ids.length < 2 || ids.length > 4) {
    root.replaceChildren(
      el(document, "div", { class: "error-box" }, "select two to four runs to compare"),
    );
    return;
  }
  const runs = await Promise.all(ids.map((id) => api.getRun(id)));
  const latestPairs = await Promise.all(
    ids.map(async (id) => [id, await api.latestMetrics(id)] as const),
  );
  root.replaceChildren(
    renderCompare(document, { runs, latest: Object.fromEntries(latestPairs) }),
  );
}

async function showCalibrationDiff(root: HTMLElement, baseId: string, otherId: string): Promise<void> {
  try {
    const diff = await api.calibrationDiff(baseId, otherId);
    root.replaceChildren(renderCalibrationDiff(document, diff));
  } catch (err) {
    if (err instanceof ApiError && err.status === 404) {
      root.replaceChildren(renderNotFound(document, err.message));
      return;
    }
    throw err;
  }
}

async function route(): Promise<void> {
  const root = appRoot();
  const hash = window.location.hash;
  try {
    const exp = /^#\/exp\/([0-9a-f]+)$/.exec(hash);
    const run = /^#\/run\/([0-9a-f]+)$/.exec(hash);
    const compare = /^#\/compare\/([0-9a-f,]+)$/.exec(hash);
    const calib = /^#\/calib\/([0-9a-f]+)\/([0-9a-f]+)$/.exec(hash);
    if (exp !== null) {
      await showExperiment(root, exp[1]!);
    } else if (run !== null) {
      await showRun(root, run[1]!);
    } else if (compare !== null) {
      await showCompare(root, compare[1]!);
    } else if (calib !== null) {
      await showCalibrationDiff(root, calib[1]!, calib[2]!);
    } else {
      await showExperiments(root);
    }
  } catch (err) {
    showError(root, err);
  }
}

window.addEventListener("hashchange", () => void route());
void route();

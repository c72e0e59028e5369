// Run table: one row per run from a search response, with columns for the
// base attributes plus every param and tag key present in the page. Sorting
// is delegated to the server: clicking a header asks the caller to re-query
// with an order_by clause, so the table never reorders rows itself.

import type { RunDoc } from "./api.js";
import { el } from "./dom.js";
import { ABSENT, byteOffsetToColumn, formatTime, shortId } from "./format.js";

export interface RunTableSort {
  column: string;
  ascending: boolean;
}

export interface RunTableOptions {
  sort?: RunTableSort;
  onSort?: (column: string, ascending: boolean) => void;
  selectable?: boolean;
}

const BASE_COLUMNS = ["run_id", "status", "start_time", "end_time"];

export function runTableColumns(runs: RunDoc[]): string[] {
  const paramKeys = new Set<string>();
  const tagKeys = new Set<string>();
  for (const run of runs) {
    for (const key of Object.keys(run.params)) paramKeys.add(key);
    for (const key of Object.keys(run.tags)) tagKeys.add(key);
  }
  return [
    ...BASE_COLUMNS,
    ...[...paramKeys].sort().map((key) => `params.${key}`),
    ...[...tagKeys].sort().map((key) => `tags.${key}`),
  ];
}

const SAFE_IDENT = /^[A-Za-z_][A-Za-z0-9_]*$/;

// Server-side sort key for a column, in the same canonical form the server
// itself prints: plain identifiers stay bare, anything else wraps the whole
// dotted path in backticks. Keys containing a backtick have no quoted form
// in the search grammar, so those columns cannot be server-sorted.
export function orderByForColumn(column: string, ascending: boolean): string | undefined {
  const direction = ascending ? "ASC" : "DESC";
  if (BASE_COLUMNS.includes(column)) {
    return `attributes.${column} ${direction}`;
  }
  const dot = column.indexOf(".");
  const namespace = column.slice(0, dot);
  const key = column.slice(dot + 1);
  if (SAFE_IDENT.test(key)) {
    return `${namespace}.${key} ${direction}`;
  }
  if (key.includes("`")) {
    return undefined;
  }
  return `\`${namespace}.${key}\` ${direction}`;
}

function cellText(run: RunDoc, column: string): string {
  if (column === "run_id") return shortId(run.run_id);
  if (column === "status") return run.status;
  if (column === "start_time") return formatTime(run.start_time);
  if (column === "end_time") return formatTime(run.end_time);
  const dot = column.indexOf(".");
  const source = column.slice(0, dot) === "params" ? run.params : run.tags;
  const value = source[column.slice(dot + 1)];
  return value === undefined ? ABSENT : value;
}

export function renderRunTable(
  doc: Document,
  runs: RunDoc[],
  options: RunTableOptions = {},
): HTMLTableElement {
  const columns = runTableColumns(runs);
  const table = el(doc, "table", { class: "run-table" });

  const headRow = el(doc, "tr");
  if (options.selectable) {
    headRow.append(el(doc, "th", { class: "select-col" }, ""));
  }
  for (const column of columns) {
    const th = el(doc, "th", { "data-column": column }, column);
    if (options.sort && options.sort.column === column) {
      th.append(options.sort.ascending ? " ▲" : " ▼");
    }
    if (options.onSort) {
      th.classList.add("sortable");
      th.addEventListener("click", () => {
        const current = options.sort;
        const ascending = current && current.column === column ? !current.ascending : true;
        options.onSort?.(column, ascending);
      });
    }
    headRow.append(th);
  }
  table.append(el(doc, "thead", {}, headRow));

  const tbody = el(doc, "tbody");
  for (const run of runs) {
    const tr = el(doc, "tr", { "data-run-id": run.run_id });
    if (options.selectable) {
      const box = el(doc, "input", {
        type: "checkbox",
        class: "compare-select",
        "data-run-id": run.run_id,
      });
      tr.append(el(doc, "td", { class: "select-col" }, box));
    }
    for (const column of columns) {
      const td = el(doc, "td", { "data-column": column });
      if (column === "run_id") {
        td.append(
          el(doc, "a", { href: `#/run/${run.run_id}`, title: run.run_id }, cellText(run, column)),
        );
      } else {
        td.textContent = cellText(run, column);
      }
      tr.append(td);
    }
    tbody.append(tr);
  }
  table.append(tbody);
  return table;
}

// Inline rendering for a rejected filter: the server's message, the filter
// text, and a caret under the offending byte offset.
export function renderFilterError(
  doc: Document,
  filterText: string,
  message: string,
): HTMLElement {
  const box = el(doc, "pre", { class: "filter-error" });
  box.append(message);
  const match = /^parse error at byte (\d+)/.exec(message);
  if (match !== null) {
    const column = byteOffsetToColumn(filterText, Number(match[1]));
    box.append(`\n  ${filterText}\n  ${" ".repeat(column)}^`);
  }
  return box;
}

/** DOM wiring for the explorer. All logic lives in the sibling modules;
 * this file only renders view models and forwards events.
 */

import { ApiClient, ApiError, RequestSequencer } from "./api.js";
import { compareBadge } from "./compare.js";
import { HeatmapCapError, HeatmapModel } from "./heatmap.js";
import { buildQuery, rangeClause, type WidgetState } from "./queryBuilder.js";
import { schemaView } from "./schemaBrowser.js";
import { ExplorerSession } from "./session.js";
import type { AttributeDocument, QueryDocument, SchemaDocument } from "./types.js";

const params = new URLSearchParams(window.location.search);
const api = new ApiClient(params.get("api") ?? "http://127.0.0.1:8000");
const session = new ExplorerSession();
const countGate = new RequestSequencer();
const heatmapGate = new RequestSequencer();

let schema: SchemaDocument | null = null;

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  text?: string,
  className?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (text !== undefined) node.textContent = text;
  if (className !== undefined) node.className = className;
  return node;
}

function byId(id: string): HTMLElement {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node;
}

function showError(message: string): void {
  const banner = byId("error-banner");
  banner.textContent = message;
  banner.hidden = message === "";
}

async function loadSummaries(): Promise<void> {
  const select = byId("summary-select") as HTMLSelectElement;
  const items = await api.listSummaries();
  select.replaceChildren();
  if (items.length === 0) {
    byId("empty-state").hidden = false;
    return;
  }
  byId("empty-state").hidden = true;
  for (const item of items) {
    const option = el("option", `${item.name} (${item.state})`);
    option.value = item.id;
    option.disabled = item.state !== "ready";
    select.append(option);
  }
  const ready = items.find((i) => i.state === "ready");
  if (ready) {
    select.value = ready.id;
    await selectSummary(ready.id);
  }
}

async function selectSummary(id: string): Promise<void> {
  session.selectSummary(id);
  try {
    schema = await api.getSchema(id);
  } catch (exc) {
    showError(exc instanceof ApiError ? exc.message : String(exc));
    return;
  }
  showError("");
  renderSchema();
  renderWidgets();
  renderPairPicker();
  await runCount();
}

function renderSchema(): void {
  if (!schema) return;
  const view = schemaView(schema);
  const panel = byId("schema-panel");
  panel.replaceChildren(el("h2", `schema — n = ${view.n}`));
  for (const attr of view.attributes) {
    const line = el("div", undefined, "attr");
    line.append(el("strong", attr.name));
    line.append(
      el("span", ` ${attr.kind}, ${attr.domainSize} values: ` +
        attr.domainPreview.join(", ") + (attr.domainSize > 8 ? ", …" : "")),
    );
    if (attr.pairedWith.length > 0) {
      line.append(el("span", ` 2D with ${attr.pairedWith.join(", ")}`, "badge"));
    }
    panel.append(line);
  }
  for (const pair of view.pairs) {
    panel.append(el("div", `${pair.label}: ${pair.statistics} statistics`, "pair"));
  }
}

function widgetFor(attr: AttributeDocument, container: HTMLElement): void {
  const row = el("div", undefined, "widget");
  row.append(el("label", attr.name));
  if (attr.kind === "numeric") {
    const lo = el("input") as HTMLInputElement;
    const hi = el("input") as HTMLInputElement;
    lo.type = hi.type = "number";
    const apply = () => {
      if (lo.value === "" && hi.value === "") {
        session.widgets.set(attr.name, { kind: "untouched" });
      } else {
        try {
          rangeClause(attr.name, Number(lo.value), Number(hi.value));
          session.widgets.set(attr.name, {
            kind: "range",
            lo: Number(lo.value),
            hi: Number(hi.value),
          });
          showError("");
        } catch (exc) {
          showError(String(exc instanceof Error ? exc.message : exc));
          return;
        }
      }
      void runCount();
    };
    lo.addEventListener("change", apply);
    hi.addEventListener("change", apply);
    row.append(lo, el("span", "to"), hi);
  } else {
    const select = el("select") as HTMLSelectElement;
    select.append(el("option", "(any)"));
    for (const label of attr.domain) select.append(el("option", label));
    select.addEventListener("change", () => {
      session.widgets.set(
        attr.name,
        select.selectedIndex === 0
          ? { kind: "untouched" }
          : { kind: "point", value: select.value },
      );
      void runCount();
    });
    row.append(select);
  }
  container.append(row);
}

function renderWidgets(): void {
  if (!schema) return;
  const panel = byId("builder-panel");
  panel.replaceChildren(el("h2", "query"));
  for (const attr of schema.attributes) widgetFor(attr, panel);
}

function currentQuery(): QueryDocument {
  if (!schema) return { clauses: [] };
  return buildQuery(
    schema.attributes,
    session.widgets as Map<string, WidgetState>,
  );
}

async function runCount(): Promise<void> {
  if (!session.summaryId) return;
  const id = session.summaryId;
  const query = currentQuery();
  const answer = await countGate.run(() => api.query(id, query));
  if (answer === null) return; // superseded by a newer query
  session.record(query, answer);
  byId("answer").textContent =
    `≈ ${answer.rounded} (expectation ${answer.expectation.toFixed(3)}, ` +
    `${answer.elapsedMs.toFixed(2)} ms)`;
  renderHistory();
}

function renderHistory(): void {
  const list = byId("history");
  list.replaceChildren();
  for (const entry of [...session.history].reverse().slice(0, 20)) {
    const clauses = entry.query.clauses
      .map((c) => `${c.attr} ${c.op} ${JSON.stringify(c.value ?? c.values)}`)
      .join(" AND ");
    list.append(el("li", `${clauses || "(all)"} → ${entry.rounded}`));
  }
}

function renderPairPicker(): void {
  if (!schema) return;
  const select = byId("pair-select") as HTMLSelectElement;
  select.replaceChildren();
  const names = schema.attributes.map((a) => a.name);
  for (const a of names) {
    for (const b of names) {
      if (a < b) {
        const option = el("option", `${a} × ${b}`);
        option.value = `${a}|${b}`;
        select.append(option);
      }
    }
  }
}

async function runHeatmap(): Promise<void> {
  if (!schema || !session.summaryId) return;
  const id = session.summaryId;
  const select = byId("pair-select") as HTMLSelectElement;
  const [rowName, colName] = select.value.split("|");
  const rowAttr = schema.attributes.find((a) => a.name === rowName);
  const colAttr = schema.attributes.find((a) => a.name === colName);
  if (!rowAttr || !colAttr) return;
  const filter = currentQuery().clauses.filter(
    (c) => c.attr !== rowName && c.attr !== colName,
  );
  let request: QueryDocument;
  try {
    request = HeatmapModel.request(rowAttr, colAttr, filter);
  } catch (exc) {
    if (exc instanceof HeatmapCapError) {
      showError(exc.message);
      return;
    }
    throw exc;
  }
  const payload = await heatmapGate.run(() => api.groupBy(id, request));
  if (payload === null) return;
  const model = HeatmapModel.fromPayload(rowAttr, colAttr, payload, filter);
  renderHeatmapTable(model);
}

function renderHeatmapTable(model: HeatmapModel): void {
  const container = byId("heatmap");
  const table = el("table");
  const head = el("tr");
  head.append(el("th", ""));
  for (const col of model.colAttr.domain) head.append(el("th", col));
  table.append(head);
  for (const row of model.rowAttr.domain) {
    const tr = el("tr");
    tr.append(el("th", row));
    for (const col of model.colAttr.domain) {
      const cell = model.cell(row, col);
      const td = el("td", String(cell.rounded));
      td.style.backgroundColor =
        `rgba(30, 110, 190, ${model.intensity(row, col).toFixed(3)})`;
      td.addEventListener("click", () => void drill(model, row, col));
      tr.append(td);
    }
    table.append(tr);
  }
  container.replaceChildren(
    el("div", `total ≈ ${model.total().toFixed(2)}`),
    table,
  );
}

async function drill(model: HeatmapModel, row: string, col: string): Promise<void> {
  if (!session.summaryId) return;
  const query = model.drillQuery(row, col);
  const answer = await api.query(session.summaryId, query);
  session.record(query, answer);
  renderHistory();
  const exactField = byId("exact-input") as HTMLInputElement;
  if (session.compareExact && exactField.value !== "") {
    const badge = compareBadge(Number(exactField.value), answer.expectation);
    byId("compare-panel").textContent =
      `exact ${badge.exact} vs estimate ${badge.estimate.toFixed(3)} — ${badge.label}`;
  }
  byId("answer").textContent =
    `${row} × ${col} ≈ ${answer.rounded} (expectation ${answer.expectation.toFixed(3)})`;
}

function wire(): void {
  (byId("summary-select") as HTMLSelectElement).addEventListener("change", (e) => {
    void selectSummary((e.target as HTMLSelectElement).value);
  });
  byId("heatmap-run").addEventListener("click", () => void runHeatmap());
  (byId("compare-toggle") as HTMLInputElement).addEventListener("change", (e) => {
    session.compareExact = (e.target as HTMLInputElement).checked;
  });
  void loadSummaries().catch((exc) => showError(String(exc)));
}

if (typeof document !== "undefined" && document.getElementById("summary-select")) {
  wire();
}

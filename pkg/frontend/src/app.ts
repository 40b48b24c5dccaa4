/** DOM wiring for the rule editor.
 *
 * Single page, no framework: a rule table with functor / family /
 * mapping filters and a threshold slider (live local preview, explicit
 * commit), a detail panel with evidence sentences and delete, a mapping
 * report view, the whiteboard, and an iterate button.
 */

import { EditorClient, type Family, type RuleRecord } from "./api.js";
import { SessionStore } from "./state.js";
import {
  detailView,
  iterateSummary,
  mappingView,
  noteLine,
  tableRows,
  thresholdPreview,
} from "./viewmodel.js";

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

function text(tag: string, content: string, className?: string): HTMLElement {
  const node = document.createElement(tag);
  node.textContent = content;
  if (className) node.className = className;
  return node;
}

const base =
  new URLSearchParams(window.location.search).get("api") ??
  "http://127.0.0.1:8377";
const store = new SessionStore(new EditorClient(base));

const statusLine = el<HTMLElement>("status");
const tableBody = el<HTMLTableSectionElement>("rule-rows");
const detailPane = el<HTMLElement>("detail");
const mappingPane = el<HTMLElement>("mapping");
const whiteboardList = el<HTMLUListElement>("notes");
const previewPane = el<HTMLElement>("preview");

function setStatus(message: string): void {
  statusLine.textContent = message;
}

function fail(err: unknown): void {
  setStatus(err instanceof Error ? err.message : String(err));
}

function currentFamily(): Family {
  return el<HTMLSelectElement>("family").value as Family;
}

function renderTable(): void {
  store.filters.family = currentFamily();
  const functor = el<HTMLInputElement>("functor").value.trim();
  store.filters.functor = functor === "" ? undefined : functor;
  const mapping = el<HTMLSelectElement>("mapping-filter").value;
  store.filters.mapping =
    mapping === "" ? undefined : (mapping as RuleRecord["mapping"]);

  tableBody.replaceChildren();
  for (const row of tableRows(store.visibleRules(), store.filters.family)) {
    const tr = document.createElement("tr");
    tr.append(
      text("td", row.id),
      text("td", row.rule, "rule-text"),
      text("td", String(row.invocations)),
      text("td", row.thetaBar),
      text("td", row.probability),
      text("td", row.mapping),
    );
    tr.addEventListener("click", () => {
      void showDetail(row.id);
    });
    tableBody.append(tr);
  }
  setStatus(
    `${store.visibleRules().length} of ${store.rules.length} rules` +
      (store.dirty ? " (unsaved changes)" : ""),
  );
}

async function showDetail(id: string): Promise<void> {
  const record = store.rules.find((r) => r.id === id);
  if (!record) return;
  const evidence = await store.sentencesFor(id).catch(() => []);
  const view = detailView(record, evidence);

  detailPane.replaceChildren(
    text("h3", `${view.rule}.`),
    text(
      "p",
      `${view.predicate}/${view.arity}: ${view.invocations} invocations, ` +
        `${view.lfCount} readings, theta ${view.thetaBar}, ${view.mapping}`,
    ),
  );
  const probs = document.createElement("ul");
  for (const p of view.probabilities) {
    probs.append(text("li", `${p.label}: ${p.value}`));
  }
  detailPane.append(probs);
  const sentences = document.createElement("ul");
  for (const s of view.evidence) {
    sentences.append(text("li", `${s.sid}: ${s.text}`));
  }
  detailPane.append(sentences);

  const remove = document.createElement("button");
  remove.textContent = "delete rule";
  remove.addEventListener("click", () => {
    if (!window.confirm(`Delete ${view.rule}?`)) return;
    store
      .deleteRule(id)
      .then(() => {
        detailPane.replaceChildren();
        renderTable();
      })
      .catch(fail);
  });
  detailPane.append(remove);
}

function renderPreview(): void {
  const raw = el<HTMLInputElement>("threshold").value;
  const minP = Number(raw).toFixed(6);
  el<HTMLElement>("threshold-value").textContent = minP;
  const split = thresholdPreview(store.rules, currentFamily(), minP);
  previewPane.replaceChildren(
    text("p", `would keep ${split.kept.length}, drop ${split.removed.length}`),
  );
  const dropped = document.createElement("ul");
  for (const r of split.removed) {
    dropped.append(text("li", r.rule));
  }
  previewPane.append(dropped);
}

function wireControls(): void {
  el<HTMLSelectElement>("family").addEventListener("change", () => {
    renderTable();
    renderPreview();
  });
  el<HTMLInputElement>("functor").addEventListener("input", renderTable);
  el<HTMLSelectElement>("mapping-filter").addEventListener(
    "change",
    renderTable,
  );
  el<HTMLInputElement>("threshold").addEventListener("input", renderPreview);

  el<HTMLButtonElement>("commit-threshold").addEventListener("click", () => {
    const minP = Number(el<HTMLInputElement>("threshold").value).toFixed(6);
    store
      .commitThreshold(minP)
      .then(() => renderTable())
      .catch(fail);
  });
  el<HTMLButtonElement>("clear-threshold").addEventListener("click", () => {
    store.clearThreshold();
    renderTable();
  });

  el<HTMLButtonElement>("add-rule").addEventListener("click", () => {
    const input = el<HTMLInputElement>("new-rule");
    store
      .addRule(input.value)
      .then(() => {
        input.value = "";
        renderTable();
      })
      .catch(fail);
  });

  el<HTMLButtonElement>("run-mapping").addEventListener("click", () => {
    setStatus("mapping against reference...");
    store
      .runMapping()
      .then((result) => {
        const view = mappingView(result);
        mappingPane.replaceChildren();
        const table = document.createElement("table");
        for (const row of view.rows) {
          const tr = document.createElement("tr");
          tr.append(text("td", row.label), text("td", String(row.count)));
          table.append(tr);
        }
        mappingPane.append(table);
        for (const m of view.metrics) {
          mappingPane.append(text("p", `${m.label} ${m.value}`));
        }
        renderTable();
      })
      .catch(fail);
  });

  el<HTMLButtonElement>("save").addEventListener("click", () => {
    store
      .save()
      .then((path) => setStatus(`saved to ${path}`))
      .catch(fail);
  });

  el<HTMLButtonElement>("iterate").addEventListener("click", () => {
    setStatus("reparsing corpus...");
    store
      .iterate({ family: currentFamily() })
      .then((result) => {
        const summary = iterateSummary(result);
        setStatus(`${summary.headline}; ${summary.parsedLine}`);
        mappingPane.replaceChildren();
        for (const line of summary.diff) {
          mappingPane.append(text("p", line, "diff-line"));
        }
        renderTable();
      })
      .catch(fail);
  });

  el<HTMLButtonElement>("add-note").addEventListener("click", () => {
    const input = el<HTMLInputElement>("note-text");
    if (input.value.trim() === "") return;
    store
      .addNote({ text: input.value })
      .then(() => {
        input.value = "";
        renderNotes();
      })
      .catch(fail);
  });
}

function renderNotes(): void {
  whiteboardList.replaceChildren();
  for (const note of store.notes) {
    whiteboardList.append(text("li", noteLine(note)));
  }
}

async function start(): Promise<void> {
  wireControls();
  await store.refresh();
  await store.loadWhiteboard();
  renderTable();
  renderPreview();
  renderNotes();
}

start().catch(fail);

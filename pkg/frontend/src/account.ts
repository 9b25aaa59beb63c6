// Personal review page: every record the caller has annotated, in
// record order, with an inline editor so any entry can be revised.

import { ApiError, listDatasets, myAnnotations, reviseAnnotation } from "./api";
import { topbar } from "./datasets";
import { clear, el } from "./dom";
import type { DatasetInfo, RecordEntry } from "./types";

function reviseForm(
  ds: DatasetInfo,
  entry: RecordEntry,
  onSaved: () => void,
): HTMLElement {
  const a = entry.annotation;
  const selected = new Set(a.labels);
  const labels = el("div", { class: "label-grid" });
  for (const def of ds.labels) {
    const input = el("input", {
      type: "checkbox",
      class: "revise-label",
      "data-code": def.code,
      onchange: () => {
        if (selected.has(def.code)) selected.delete(def.code);
        else selected.add(def.code);
      },
    });
    if (selected.has(def.code)) input.checked = true;
    labels.append(el("label", { class: "label-option" }, input, ` ${def.display_text}`));
  }
  const comment = el("textarea", { class: "revise-comment", rows: "2" });
  comment.value = a.comment;
  const status = el("select", { class: "revise-status" });
  for (const value of ["confirmed", "unsure"] as const) {
    const option = el("option", { value }, value);
    if (a.status === value) option.selected = true;
    status.append(option);
  }
  const error = el("div", { class: "error hidden" });
  const save = el(
    "button",
    {
      class: "primary revise-save",
      onclick: async () => {
        error.classList.add("hidden");
        try {
          await reviseAnnotation(
            a.annotation_id,
            [...selected],
            comment.value,
            status.value as "confirmed" | "unsure",
            a.revision,
          );
          onSaved();
        } catch (err) {
          error.textContent =
            err instanceof ApiError ? err.message : "save failed";
          error.classList.remove("hidden");
        }
      },
    },
    "Save revision",
  );
  return el(
    "div",
    { class: "revise-form" },
    labels,
    el("label", {}, "Comment", comment),
    el("label", {}, "Status", status),
    error,
    save,
  );
}

function entryRow(
  ds: DatasetInfo,
  entry: RecordEntry,
  onSaved: () => void,
): HTMLElement {
  const a = entry.annotation;
  const row = el(
    "section",
    { class: "card entry-row", "data-record": entry.record_name },
    el(
      "div",
      { class: "entry-head", onclick: () => toggle() },
      el("strong", { class: "entry-record" }, entry.record_name),
      el("span", { class: `status status-${a.status}` }, a.status),
      el("span", { class: "entry-labels" }, a.labels.join(", ") || "(no labels)"),
      el("span", { class: "muted entry-revision" }, `revision ${a.revision}`),
      el("span", { class: "muted" }, a.updated_at),
    ),
  );
  let form: HTMLElement | null = null;
  const toggle = () => {
    if (form) {
      form.remove();
      form = null;
      return;
    }
    form = reviseForm(ds, entry, onSaved);
    row.append(form);
  };
  return row;
}

export async function renderAccount(
  root: HTMLElement,
  datasetId: string,
): Promise<void> {
  clear(root);
  root.append(topbar("My annotations"));
  const main = el("main", { class: "list-page", id: "account-list" });
  root.append(main);

  const datasets = await listDatasets();
  const ds = datasets.find((d) => d.dataset_id === datasetId);
  if (!ds) {
    main.append(el("p", { class: "error" }, "unknown dataset"));
    return;
  }

  const reload = () => void renderAccount(root, datasetId);
  const page = await myAnnotations(datasetId, 0, 1000);
  main.append(
    el(
      "p",
      { class: "muted" },
      `${page.total} annotated record(s) in ${ds.name}; click one to revise`,
    ),
  );
  if (page.total === 0) {
    main.append(el("p", { class: "muted", id: "empty-note" }, "nothing annotated yet"));
    return;
  }
  for (const entry of page.entries) {
    main.append(entryRow(ds, entry, reload));
  }
}

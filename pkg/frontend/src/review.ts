// Expert adjudication: every record with its live annotation heads,
// approve/override controls, and the final-label CSV export.

import { ApiError, decide, exportCsv, listDatasets, listReview } from "./api";
import { topbar } from "./datasets";
import { clear, el } from "./dom";
import type { Annotation, DatasetInfo, ReviewEntry } from "./types";

function overrideForm(
  ds: DatasetInfo,
  head: Annotation,
  onDone: () => void,
): HTMLElement {
  const selected = new Set(head.labels);
  const labels = el("div", { class: "label-grid" });
  for (const def of ds.labels) {
    const input = el("input", {
      type: "checkbox",
      class: "override-label",
      "data-code": def.code,
      onchange: () => {
        if (selected.has(def.code)) selected.delete(def.code);
        else selected.add(def.code);
      },
    });
    if (selected.has(def.code)) input.checked = true;
    labels.append(el("label", { class: "label-option" }, input, ` ${def.display_text}`));
  }
  const error = el("div", { class: "error hidden" });
  return el(
    "div",
    { class: "override-form" },
    labels,
    error,
    el(
      "button",
      {
        class: "primary override-save",
        onclick: async () => {
          error.classList.add("hidden");
          try {
            await decide(head.annotation_id, "override", [...selected]);
            onDone();
          } catch (err) {
            error.textContent =
              err instanceof ApiError ? err.message : "decision failed";
            error.classList.remove("hidden");
          }
        },
      },
      "Save override",
    ),
  );
}

function headRow(
  ds: DatasetInfo,
  head: Annotation,
  onDone: () => void,
): HTMLElement {
  const row = el(
    "div",
    { class: "head-row", "data-annotation": head.annotation_id },
    el("span", { class: "head-annotator" }, head.annotator_username),
    el("span", { class: `status status-${head.status}` }, head.status),
    el("span", { class: "entry-labels" }, head.labels.join(", ") || "(no labels)"),
    el("span", { class: "muted" }, `revision ${head.revision}`),
    head.comment ? el("span", { class: "entry-comment" }, head.comment) : null,
  );
  let form: HTMLElement | null = null;
  row.append(
    el(
      "button",
      {
        class: "approve-btn",
        onclick: async () => {
          try {
            await decide(head.annotation_id, "approve");
            onDone();
          } catch {
            // a stale head means someone else just decided; refresh
            onDone();
          }
        },
      },
      "Approve",
    ),
    el(
      "button",
      {
        class: "override-btn",
        onclick: () => {
          if (form) {
            form.remove();
            form = null;
            return;
          }
          form = overrideForm(ds, head, onDone);
          row.append(form);
        },
      },
      "Override",
    ),
  );
  return row;
}

function recordBlock(
  ds: DatasetInfo,
  entry: ReviewEntry,
  onDone: () => void,
): HTMLElement {
  const block = el(
    "section",
    { class: "card review-record", "data-record": entry.record_name },
    el("h3", {}, entry.record_name),
  );
  if (entry.heads.length === 0) {
    block.append(el("p", { class: "muted" }, "no annotations yet"));
  }
  for (const head of entry.heads) block.append(headRow(ds, head, onDone));
  return block;
}

export async function renderReview(
  root: HTMLElement,
  datasetId: string,
): Promise<void> {
  clear(root);
  root.append(topbar("Expert review"));
  const main = el("main", { class: "list-page", id: "review-list" });
  root.append(main);

  const datasets = await listDatasets();
  const ds = datasets.find((d) => d.dataset_id === datasetId);
  if (!ds) {
    main.append(el("p", { class: "error" }, "unknown dataset"));
    return;
  }

  let page;
  try {
    page = await listReview(datasetId, 0, 1000);
  } catch (err) {
    if (err instanceof ApiError && err.status === 403) {
      main.append(
        el(
          "section",
          { class: "card", id: "access-denied" },
          el("h2", {}, "Experts only"),
          el("p", {}, "this page needs expert review rights on the dataset"),
        ),
      );
      return;
    }
    throw err;
  }

  const reload = () => void renderReview(root, datasetId);
  const exportOut = el("pre", { class: "export-output hidden", id: "export-output" });
  main.append(
    el(
      "div",
      { class: "actions" },
      el(
        "button",
        {
          id: "export-btn",
          onclick: async () => {
            exportOut.textContent = await exportCsv(datasetId);
            exportOut.classList.remove("hidden");
          },
        },
        "Export CSV",
      ),
    ),
    exportOut,
  );
  for (const entry of page.entries) {
    main.append(recordBlock(ds, entry, reload));
  }
}

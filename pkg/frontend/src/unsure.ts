// Unsure records across the whole group, visible to every member, so
// hard cases can be discussed and picked up by anyone.

import { listUnsure } from "./api";
import { topbar } from "./datasets";
import { clear, el } from "./dom";

export async function renderUnsure(
  root: HTMLElement,
  datasetId: string,
): Promise<void> {
  clear(root);
  root.append(topbar("Unsure records"));
  const main = el("main", { class: "list-page", id: "unsure-list" });
  root.append(main);

  const page = await listUnsure(datasetId, 0, 1000);
  if (page.total === 0) {
    main.append(
      el("p", { class: "muted", id: "empty-note" }, "no unsure records"),
    );
    return;
  }
  for (const entry of page.entries) {
    const a = entry.annotation;
    main.append(
      el(
        "section",
        { class: "card entry-row", "data-record": entry.record_name },
        el(
          "div",
          { class: "entry-head" },
          el("strong", { class: "entry-record" }, entry.record_name),
          el("span", { class: "muted" }, `by ${a.annotator_username}`),
          el("span", { class: "entry-labels" }, a.labels.join(", ") || "(no labels)"),
          a.comment ? el("span", { class: "entry-comment" }, a.comment) : null,
          el(
            "a",
            {
              class: "button",
              href: `#/annotate/${encodeURIComponent(datasetId)}/${encodeURIComponent(entry.record_id)}`,
            },
            "Open",
          ),
        ),
      ),
    );
  }
}

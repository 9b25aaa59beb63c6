import { listDatasets, logout } from "./api";
import { clear, el } from "./dom";
import { clearSession, loadSession } from "./session";
import type { DatasetInfo } from "./types";

export function topbar(title: string): HTMLElement {
  const session = loadSession();
  return el(
    "header",
    { class: "topbar" },
    el("a", { href: "#/datasets", class: "brand" }, "ECG annotation"),
    el("span", { class: "topbar-title" }, title),
    el("span", { class: "spacer" }),
    el("span", { class: "whoami", id: "whoami" }, session?.username ?? ""),
    el(
      "button",
      {
        id: "logout-btn",
        class: "ghost",
        onclick: async () => {
          try {
            await logout();
          } catch {
            // the session may already be gone; sign out locally anyway
          }
          clearSession();
          location.hash = "#/login";
        },
      },
      "Sign out",
    ),
  );
}

function datasetCard(ds: DatasetInfo): HTMLElement {
  const id = encodeURIComponent(ds.dataset_id);
  const links = [
    el("a", { href: `#/annotate/${id}`, class: "button primary" }, "Annotate"),
    el("a", { href: `#/account/${id}`, class: "button" }, "My annotations"),
    el("a", { href: `#/unsure/${id}`, class: "button" }, "Unsure"),
  ];
  if (ds.is_expert) {
    links.push(el("a", { href: `#/review/${id}`, class: "button" }, "Review"));
  }
  return el(
    "section",
    { class: "card dataset-card", "data-dataset": ds.name },
    el("h2", {}, ds.name),
    el(
      "p",
      { class: "progress" },
      `${ds.annotated_count} / ${ds.total} annotated`,
    ),
    el("div", { class: "actions" }, ...links),
  );
}

export async function renderDatasets(root: HTMLElement): Promise<void> {
  clear(root);
  root.append(topbar("Datasets"));
  const list = el("main", { class: "dataset-list" });
  root.append(list);
  const datasets = await listDatasets();
  if (datasets.length === 0) {
    list.append(
      el(
        "p",
        { class: "muted" },
        "No dataset memberships yet; ask your administrator.",
      ),
    );
    return;
  }
  for (const ds of datasets) list.append(datasetCard(ds));
}

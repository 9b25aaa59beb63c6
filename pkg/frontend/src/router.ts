// Hash router. Record ids carry slashes, so annotate routes encode the
// record segment with encodeURIComponent and everything after the
// dataset id is treated as one segment.

import { renderAccount } from "./account";
import { renderAnnotate } from "./annotate";
import { ApiError } from "./api";
import { renderDatasets } from "./datasets";
import { renderLogin } from "./login";
import { renderReview } from "./review";
import { clear, el } from "./dom";
import { clearSession, loadSession } from "./session";
import { renderUnsure } from "./unsure";

type Cleanup = () => void;

let teardown: Cleanup | null = null;

function fail(root: HTMLElement, err: unknown): void {
  clear(root);
  root.append(
    el(
      "div",
      { class: "error page-error" },
      `something went wrong: ${err instanceof Error ? err.message : String(err)}`,
    ),
    el("a", { href: "#/datasets" }, "back to datasets"),
  );
}

export async function route(root: HTMLElement): Promise<void> {
  if (teardown) {
    teardown();
    teardown = null;
  }
  const hash = location.hash || "#/datasets";
  const parts = hash.replace(/^#\//, "").split("/");
  const [page, datasetId, ...rest] = parts;

  if (page === "login") {
    renderLogin(root);
    return;
  }
  if (!loadSession()) {
    location.hash = "#/login";
    return;
  }
  try {
    switch (page) {
      case "datasets":
      case "":
        await renderDatasets(root);
        break;
      case "annotate":
        if (!datasetId) throw new Error("missing dataset");
        teardown = await renderAnnotate(
          root,
          decodeURIComponent(datasetId),
          rest.length ? rest.join("/") : undefined,
        );
        break;
      case "account":
        if (!datasetId) throw new Error("missing dataset");
        await renderAccount(root, decodeURIComponent(datasetId));
        break;
      case "unsure":
        if (!datasetId) throw new Error("missing dataset");
        await renderUnsure(root, decodeURIComponent(datasetId));
        break;
      case "review":
        if (!datasetId) throw new Error("missing dataset");
        await renderReview(root, decodeURIComponent(datasetId));
        break;
      default:
        location.hash = "#/datasets";
    }
  } catch (err) {
    if (err instanceof ApiError && err.status === 401) {
      clearSession();
      location.hash = "#/login";
      return;
    }
    fail(root, err);
  }
}

export function startRouter(root: HTMLElement): void {
  window.addEventListener("hashchange", () => void route(root));
  void route(root);
}

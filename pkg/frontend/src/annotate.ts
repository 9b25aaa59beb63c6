// The working surface: strips below, three boxes above (analysis
// features on the left, automatic suggestions in the middle, the
// annotation editor on the right), confirm/unsure with auto-advance.

import {
  ApiError,
  fetchAnalysis,
  fetchSegment,
  listDatasets,
  navigate,
  recordMetadata,
  resumeDataset,
  submitAnnotation,
} from "./api";
import { topbar } from "./datasets";
import { clear, el } from "./dom";
import {
  clearDraft,
  confirmProblem,
  emptyDraft,
  toggleLabel,
  type Draft,
} from "./draft";
import { bindKeys } from "./keyboard";
import type { AnalysisResponse, DatasetInfo, RecordMetadata } from "./types";
import {
  SEGMENT_REQUEST_BUCKETS,
  fullWindow,
  initialViewer,
  panWindow,
  renderStrips,
  visibleLeads,
  zoomWindow,
  type ViewerState,
} from "./viewer";

function featuresBox(analysis: AnalysisResponse | null): HTMLElement {
  const box = el("section", { class: "box", id: "features-box" });
  box.append(el("h3", {}, "Analysis"));
  const f = analysis?.features;
  if (!f) {
    box.append(
      el("p", { class: "muted" }, "too few beats for automatic analysis"),
    );
    return box;
  }
  const dl = el("dl", {});
  const row = (term: string, value: string) => {
    dl.append(el("dt", {}, term), el("dd", {}, value));
  };
  row("Mean HR", `${f.mean_hr.toFixed(1)} bpm`);
  row("RR mean", `${f.rr_mean.toFixed(3)} s`);
  row("RR std", `${f.rr_std.toFixed(3)} s`);
  row("Beats", String(f.n_beats));
  if (analysis?.analyzed_lead) row("Lead", analysis.analyzed_lead);
  box.append(dl);
  return box;
}

function suggestionsBox(analysis: AnalysisResponse | null): HTMLElement {
  const box = el("section", { class: "box", id: "suggestions-box" });
  box.append(
    el("h3", {}, "Suggestions"),
    el("p", { class: "muted" }, "automatic, not authoritative"),
  );
  const suggestions = analysis?.suggestions ?? [];
  if (suggestions.length === 0) {
    box.append(el("p", { class: "muted" }, "none"));
    return box;
  }
  const list = el("ul", { class: "chips" });
  for (const s of suggestions) {
    list.append(el("li", { class: "chip", title: s.rule_id }, s.display_text));
  }
  box.append(list);
  return box;
}

export async function renderAnnotate(
  root: HTMLElement,
  datasetId: string,
  recordParam?: string,
): Promise<() => void> {
  clear(root);
  root.append(topbar("Annotate"));

  const datasets = await listDatasets();
  const ds = datasets.find((d) => d.dataset_id === datasetId);
  if (!ds) {
    root.append(el("p", { class: "error" }, "unknown dataset"));
    return () => {};
  }

  const flash = el("div", { class: "flash hidden", id: "flash" });
  const main = el("main", { class: "annotate-page" }, flash);
  root.append(main);

  let epoch = 0;
  let meta: RecordMetadata | null = null;
  let viewer: ViewerState | null = null;
  let draft: Draft = emptyDraft();

  const showFlash = (text: string) => {
    flash.textContent = text;
    flash.classList.remove("hidden");
    setTimeout(() => flash.classList.add("hidden"), 2000);
  };

  const renderComplete = (total: number) => {
    epoch++;
    clear(main);
    main.append(
      el(
        "section",
        { class: "card", id: "complete-banner" },
        el("h2", {}, "Dataset complete"),
        el("p", {}, `all ${total} records carry your annotation`),
        el(
          "a",
          {
            href: `#/account/${encodeURIComponent(datasetId)}`,
            class: "button",
          },
          "Review your annotations",
        ),
      ),
    );
  };

  const loadRecord = async (recordId: string) => {
    const myEpoch = ++epoch;
    meta = await recordMetadata(recordId);
    if (myEpoch !== epoch) return;
    viewer = initialViewer(recordId, meta.duration, meta.lead_names);
    draft = emptyDraft();
    if (meta.my_annotation) {
      draft.labels = new Set(meta.my_annotation.labels);
      draft.comment = meta.my_annotation.comment;
    }
    history.replaceState(
      null,
      "",
      `#/annotate/${encodeURIComponent(datasetId)}/${encodeURIComponent(recordId)}`,
    );
    renderRecord(myEpoch);
    void refreshAnalysis(myEpoch);
    void refreshSegment(myEpoch);
  };

  let stripsMount: HTMLElement = el("div");
  let boxesMount: HTMLElement = el("div");
  let analysis: AnalysisResponse | null = null;

  const refreshAnalysis = async (myEpoch: number) => {
    if (!meta) return;
    try {
      analysis = await fetchAnalysis(meta.record_id);
    } catch {
      analysis = null; // boxes degrade; the draft editor still works
    }
    if (myEpoch !== epoch) return;
    renderBoxes();
  };

  const refreshSegment = async (myEpoch: number) => {
    if (!meta || !viewer) return;
    const banner = document.getElementById("retry-banner");
    banner?.classList.add("hidden");
    const visible = visibleLeads(viewer);
    if (visible.length === 0) {
      viewer.segment = null;
      clear(stripsMount);
      stripsMount.append(el("p", { class: "muted" }, "all leads hidden"));
      return;
    }
    try {
      const segment = await fetchSegment(meta.record_id, {
        start: viewer.tStart,
        end: viewer.tEnd,
        leads: visible,
        maxBuckets: SEGMENT_REQUEST_BUCKETS,
      });
      if (myEpoch !== epoch || !viewer) return;
      viewer.segment = segment;
      renderStrips(viewer, stripsMount);
    } catch {
      if (myEpoch !== epoch) return;
      clear(stripsMount);
      stripsMount.append(
        el(
          "div",
          { class: "error", id: "retry-banner" },
          "could not load the waveform ",
          el(
            "button",
            { id: "retry-btn", onclick: () => void refreshSegment(epoch) },
            "Retry",
          ),
        ),
      );
    }
  };

  const setWindow = (window: [number, number]) => {
    if (!viewer) return;
    [viewer.tStart, viewer.tEnd] = window;
    void refreshSegment(epoch);
  };

  const submit = async (status: "confirmed" | "unsure") => {
    if (!meta) return;
    const errorBox = document.getElementById("draft-error");
    errorBox?.classList.add("hidden");
    if (status === "confirmed") {
      const problem = confirmProblem(draft);
      if (problem && errorBox) {
        errorBox.textContent = problem;
        errorBox.classList.remove("hidden");
        return;
      }
    }
    try {
      const result = await submitAnnotation(
        meta.record_id,
        [...draft.labels],
        draft.comment,
        status,
      );
      clearDraft(draft);
      if (result.next_record_id) {
        await loadRecord(result.next_record_id);
      } else {
        renderComplete(meta.total);
      }
    } catch (err) {
      if (err instanceof ApiError && errorBox) {
        errorBox.textContent = err.message;
        errorBox.classList.remove("hidden");
      } else {
        showFlash("submit failed, check the connection");
      }
    }
  };

  const browse = async (direction: "next" | "previous") => {
    if (!meta) return;
    try {
      const target = await navigate(datasetId, meta.position, direction);
      await loadRecord(target.record_id);
    } catch (err) {
      if (err instanceof ApiError && err.code === "at_boundary") {
        showFlash(
          direction === "next"
            ? "already at the last record"
            : "already at the first record",
        );
      } else {
        showFlash("navigation failed");
      }
    }
  };

  const draftBox = (ds: DatasetInfo): HTMLElement => {
    const box = el("section", { class: "box", id: "draft-box" });
    box.append(el("h3", {}, "Annotation"));
    if (meta?.my_annotation) {
      box.append(
        el(
          "p",
          { class: "notice", id: "revision-note" },
          `saving creates revision ${meta.my_annotation.revision + 1}`,
        ),
      );
    }
    const labels = el("div", { class: "label-grid" });
    for (const def of ds.labels) {
      const input = el("input", {
        type: "checkbox",
        class: "label-toggle",
        "data-code": def.code,
        onchange: () => toggleLabel(draft, def.code),
      });
      if (draft.labels.has(def.code)) input.checked = true;
      labels.append(
        el("label", { class: "label-option" }, input, ` ${def.display_text}`),
      );
    }
    const comment = el("textarea", {
      id: "comment-input",
      rows: "2",
      placeholder: "comment (optional)",
      oninput: () => {
        draft.comment = comment.value;
      },
    });
    comment.value = draft.comment;
    box.append(
      labels,
      comment,
      el("div", { class: "error hidden", id: "draft-error" }),
      el(
        "div",
        { class: "actions" },
        el(
          "button",
          {
            id: "confirm-btn",
            class: "primary",
            onclick: () => void submit("confirmed"),
          },
          "Confirm",
        ),
        el(
          "button",
          { id: "unsure-btn", onclick: () => void submit("unsure") },
          "Unsure",
        ),
      ),
      el(
        "div",
        { class: "actions" },
        el(
          "button",
          { id: "prev-btn", class: "ghost", onclick: () => void browse("previous") },
          "Previous One",
        ),
        el(
          "button",
          { id: "next-btn", class: "ghost", onclick: () => void browse("next") },
          "Next One",
        ),
      ),
      el("p", { class: "muted" }, "keys: Enter confirm, U unsure, ←→ pan"),
    );
    return box;
  };

  const renderBoxes = () => {
    clear(boxesMount);
    boxesMount.append(featuresBox(analysis), suggestionsBox(analysis), draftBox(ds));
  };

  const leadToggles = (): HTMLElement => {
    const wrap = el("div", { class: "lead-toggles" });
    if (!viewer) return wrap;
    for (const name of viewer.leadNames) {
      const input = el("input", {
        type: "checkbox",
        class: "lead-toggle",
        "data-lead": name,
        onchange: () => {
          if (!viewer) return;
          if (viewer.hidden.has(name)) viewer.hidden.delete(name);
          else viewer.hidden.add(name);
          void refreshSegment(epoch);
        },
      });
      if (!viewer.hidden.has(name)) input.checked = true;
      wrap.append(el("label", { class: "lead-option" }, input, ` ${name}`));
    }
    return wrap;
  };

  const renderRecord = (myEpoch: number) => {
    if (myEpoch !== epoch || !meta || !viewer) return;
    clear(main);
    main.append(flash);
    main.append(
      el(
        "div",
        { class: "record-head" },
        el("h2", { id: "record-title" }, meta.name),
        el(
          "span",
          { class: "muted", id: "record-position" },
          `record ${meta.position + 1} of ${meta.total}`,
        ),
      ),
    );
    boxesMount = el("div", { class: "boxes" });
    renderBoxes();
    main.append(boxesMount);

    const controls = el(
      "div",
      { class: "viewer-controls" },
      el(
        "button",
        { id: "pan-left-btn", onclick: () => viewer && setWindow(panWindow(viewer, -1)) },
        "←",
      ),
      el(
        "button",
        { id: "pan-right-btn", onclick: () => viewer && setWindow(panWindow(viewer, 1)) },
        "→",
      ),
      el(
        "button",
        { id: "zoom-in-btn", onclick: () => viewer && setWindow(zoomWindow(viewer, 0.5)) },
        "Zoom in",
      ),
      el(
        "button",
        { id: "zoom-out-btn", onclick: () => viewer && setWindow(zoomWindow(viewer, 2)) },
        "Zoom out",
      ),
      el(
        "button",
        { id: "fit-btn", onclick: () => viewer && setWindow(fullWindow(viewer)) },
        "Whole record",
      ),
      leadToggles(),
    );
    main.append(controls);

    stripsMount = el("div", { class: "strips", id: "strips" });
    main.append(stripsMount);
  };

  const unbind = bindKeys({
    confirm: () => void submit("confirmed"),
    unsure: () => void submit("unsure"),
    panLeft: () => viewer && setWindow(panWindow(viewer, -1)),
    panRight: () => viewer && setWindow(panWindow(viewer, 1)),
  });

  if (recordParam) {
    await loadRecord(decodeURIComponent(recordParam));
  } else {
    const point = await resumeDataset(datasetId);
    if (point.record_id === null) {
      renderComplete(point.total);
    } else {
      await loadRecord(point.record_id);
    }
  }
  return unbind;
}

import { describe, expect, it } from "vitest";

import {
  DEFAULT_WINDOW_SECONDS,
  PX_PER_MV,
  PX_PER_SECOND,
  STRIP_HEIGHT_PX,
  fullWindow,
  initialViewer,
  panWindow,
  renderStrips,
  visibleLeads,
  zoomWindow,
  type ViewerState,
} from "../src/viewer";
import type { SegmentResponse } from "../src/types";

const LEADS = ["I", "II", "III", "aVR", "aVL", "aVF", "V1", "V2", "V3", "V4", "V5", "V6"];

function viewer(overrides: Partial<ViewerState> = {}): ViewerState {
  return { ...initialViewer("ds/rec0", 30, LEADS), ...overrides };
}

function fakeSegment(leadNames: string[], tEnd = 10): SegmentResponse {
  return {
    record_id: "ds/rec0",
    t_start: 0,
    t_end: tEnd,
    sampling_frequency: 250,
    n_samples: tEnd * 250,
    lead_names: LEADS,
    leads: leadNames.map((name) => ({
      lead_name: name,
      bucket_width: 250,
      extrema: Array.from({ length: tEnd }, (_, i) => [
        -0.5 - 0.01 * i,
        0.5 + 0.01 * i,
      ]) as [number, number][],
    })),
  };
}

describe("window arithmetic", () => {
  it("starts at the first ten seconds", () => {
    const v = viewer();
    expect([v.tStart, v.tEnd]).toEqual([0, DEFAULT_WINDOW_SECONDS]);
  });

  it("short records open at their full duration", () => {
    const v = initialViewer("ds/rec1", 4, LEADS);
    expect([v.tStart, v.tEnd]).toEqual([0, 4]);
  });

  it("pans by half a window", () => {
    expect(panWindow(viewer(), 1)).toEqual([5, 15]);
    expect(panWindow(viewer({ tStart: 5, tEnd: 15 }), -1)).toEqual([0, 10]);
  });

  it("pan clamps at the record end instead of overflowing", () => {
    expect(panWindow(viewer({ tStart: 18, tEnd: 28 }), 1)).toEqual([20, 30]);
    expect(panWindow(viewer({ tStart: 20, tEnd: 30 }), 1)).toEqual([20, 30]);
  });

  it("pan clamps at zero", () => {
    expect(panWindow(viewer({ tStart: 2, tEnd: 12 }), -1)).toEqual([0, 10]);
  });

  it("zoom keeps the center and clamps to the record", () => {
    expect(zoomWindow(viewer({ tStart: 10, tEnd: 20 }), 0.5)).toEqual([12.5, 17.5]);
    const widened = zoomWindow(viewer({ tStart: 0, tEnd: 10 }), 2);
    expect(widened).toEqual([0, 20]);
    expect(zoomWindow(viewer({ tStart: 0, tEnd: 30 }), 2)).toEqual([0, 30]);
  });

  it("full window covers the whole record", () => {
    expect(fullWindow(viewer({ tStart: 7, tEnd: 9 }))).toEqual([0, 30]);
  });
});

describe("lead visibility", () => {
  it("hiding is a view concern: names filter, nothing else changes", () => {
    const v = viewer();
    v.hidden.add("V5");
    v.hidden.add("V6");
    expect(visibleLeads(v)).toHaveLength(10);
    expect(visibleLeads(v)).not.toContain("V5");
    expect(v.leadNames).toHaveLength(12);
  });
});

describe("renderStrips", () => {
  it("renders one strip per visible lead", () => {
    const v = viewer();
    v.hidden.add("V5");
    v.hidden.add("V6");
    v.segment = fakeSegment(visibleLeads(v));
    const mount = document.createElement("div");
    renderStrips(v, mount);
    const strips = mount.querySelectorAll(".strip");
    expect(strips).toHaveLength(10);
    const svgLeads = [...mount.querySelectorAll(".strip-svg")].map((svg) =>
      svg.getAttribute("data-lead"),
    );
    expect(svgLeads).toEqual(LEADS.filter((l) => l !== "V5" && l !== "V6"));
  });

  it("sizes the time axis at 25 mm/s equivalent", () => {
    const v = viewer();
    v.segment = fakeSegment(visibleLeads(v), 10);
    const mount = document.createElement("div");
    renderStrips(v, mount);
    const svg = mount.querySelector(".strip-svg")!;
    expect(svg.getAttribute("width")).toBe(String(10 * PX_PER_SECOND));
    expect(svg.getAttribute("height")).toBe(String(STRIP_HEIGHT_PX));
  });

  it("draws each bucket as a vertical extent at 10 mm/mV", () => {
    const v = viewer();
    v.segment = fakeSegment(["I"]);
    v.hidden = new Set(LEADS.filter((l) => l !== "I"));
    const mount = document.createElement("div");
    renderStrips(v, mount);
    const d = mount.querySelector(".trace")!.getAttribute("d")!;
    const mid = STRIP_HEIGHT_PX / 2;
    // first bucket is [-0.5, 0.5] mV, drawn at the bucket center: 250 samples
    // at 250 Hz is one second, so the center sits at 50 px
    const yTop = mid - 0.5 * PX_PER_MV;
    const yBottom = mid + 0.5 * PX_PER_MV;
    expect(
      d.startsWith(`M50.00 ${yTop.toFixed(2)}L50.00 ${yBottom.toFixed(2)}`),
    ).toBe(true);
    // one M...L... pair per bucket
    expect(d.match(/M/g)).toHaveLength(10);
  });

  it("renders nothing without a fetched segment", () => {
    const v = viewer();
    const mount = document.createElement("div");
    renderStrips(v, mount);
    expect(mount.querySelectorAll(".strip")).toHaveLength(0);
  });
});

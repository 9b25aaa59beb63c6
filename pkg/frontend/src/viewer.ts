// Multi-lead strip viewer. Time window and lead-visibility state plus
// SVG rendering of the server's min/max bucket envelopes. Nothing here
// invents samples: every drawn extent comes straight from a
// SegmentResponse bucket.

import { clear, el, svgEl } from "./dom";
import type { LeadSegment, SegmentResponse } from "./types";

// Standard ECG presentation: 25 mm/s, 10 mm/mV, at 4 css px per mm.
export const PX_PER_MM = 4;
export const PX_PER_SECOND = 25 * PX_PER_MM;
export const PX_PER_MV = 10 * PX_PER_MM;
export const STRIP_HEIGHT_PX = 30 * PX_PER_MM; // +-1.5 mV before clipping

export const DEFAULT_WINDOW_SECONDS = 10;
const MIN_WINDOW_SECONDS = 0.5;
// Every segment request uses the same bucket budget no matter how wide
// the window is; widening the view just makes the server downsample
// harder, it never changes the payload size.
export const SEGMENT_REQUEST_BUCKETS = 4000;

export interface ViewerState {
  recordId: string;
  duration: number;
  leadNames: string[];
  hidden: Set<string>;
  tStart: number;
  tEnd: number;
  gainScale: number;
  segment: SegmentResponse | null;
}

export function initialViewer(
  recordId: string,
  duration: number,
  leadNames: string[],
): ViewerState {
  // phones get three leads by default; everything else shows all
  const narrow = typeof window !== "undefined" && window.innerWidth < 600;
  return {
    recordId,
    duration,
    leadNames,
    hidden: new Set(narrow ? leadNames.slice(3) : []),
    tStart: 0,
    tEnd: Math.min(duration, DEFAULT_WINDOW_SECONDS),
    gainScale: 1,
    segment: null,
  };
}

export function visibleLeads(state: ViewerState): string[] {
  return state.leadNames.filter((name) => !state.hidden.has(name));
}

function clampWindow(
  duration: number,
  tStart: number,
  width: number,
): [number, number] {
  const w = Math.min(width, duration);
  let start = tStart;
  if (start + w > duration) start = duration - w;
  if (start < 0) start = 0;
  return [start, start + w];
}

// Pan by half a window; hitting either end clamps instead of erroring.
export function panWindow(
  state: ViewerState,
  direction: -1 | 1,
): [number, number] {
  const width = state.tEnd - state.tStart;
  return clampWindow(state.duration, state.tStart + direction * width * 0.5, width);
}

export function zoomWindow(state: ViewerState, factor: number): [number, number] {
  const width = state.tEnd - state.tStart;
  const next = Math.max(MIN_WINDOW_SECONDS, width * factor);
  const center = (state.tStart + state.tEnd) / 2;
  return clampWindow(state.duration, center - next / 2, next);
}

// Whole record in one screenful; the server's downsampling carries the
// load, the bucket budget stays the same as any other window.
export function fullWindow(state: ViewerState): [number, number] {
  return [0, state.duration];
}

function envelopePath(
  lead: LeadSegment,
  fs: number,
  gainScale: number,
): string {
  const midY = STRIP_HEIGHT_PX / 2;
  const pxPerBucket = (lead.bucket_width / fs) * PX_PER_SECOND;
  const parts: string[] = [];
  for (let i = 0; i < lead.extrema.length; i++) {
    const pair = lead.extrema[i];
    if (!pair) continue;
    const [lo, hi] = pair;
    const x = (i * pxPerBucket + pxPerBucket / 2).toFixed(2);
    const yTop = midY - hi * PX_PER_MV * gainScale;
    // every bucket paints at least one pixel even when min == max
    const yBottom = Math.max(midY - lo * PX_PER_MV * gainScale, yTop + 0.75);
    parts.push(`M${x} ${yTop.toFixed(2)}L${x} ${yBottom.toFixed(2)}`);
  }
  return parts.join("");
}

function gridLines(widthPx: number): SVGElement {
  const group = svgEl("g", { class: "grid" });
  const smallPx = 5 * PX_PER_MM; // 5 mm boxes: 0.2 s / 0.5 mV
  for (let x = 0; x <= widthPx; x += smallPx) {
    const line = svgEl("line", {
      x1: x,
      y1: 0,
      x2: x,
      y2: STRIP_HEIGHT_PX,
    });
    group.append(line);
  }
  for (let y = 0; y <= STRIP_HEIGHT_PX; y += smallPx) {
    group.append(svgEl("line", { x1: 0, y1: y, x2: widthPx, y2: y }));
  }
  return group;
}

// One strip per visible lead, shared time axis, bucket extents drawn
// as vertical segments.
export function renderStrips(state: ViewerState, mount: HTMLElement): void {
  clear(mount);
  const segment = state.segment;
  if (!segment) return;
  const widthPx = Math.ceil((segment.t_end - segment.t_start) * PX_PER_SECOND);
  const byName = new Map(segment.leads.map((lead) => [lead.lead_name, lead]));
  for (const name of visibleLeads(state)) {
    const lead = byName.get(name);
    if (!lead) continue;
    const strip = el("div", { class: "strip" });
    const label = el("span", { class: "strip-label" }, name);
    const svg = svgEl("svg", {
      width: widthPx,
      height: STRIP_HEIGHT_PX,
      viewBox: `0 0 ${widthPx} ${STRIP_HEIGHT_PX}`,
      "data-lead": name,
      class: "strip-svg",
    });
    svg.append(gridLines(widthPx));
    const path = svgEl("path", {
      d: envelopePath(lead, segment.sampling_frequency, state.gainScale),
      class: "trace",
    });
    svg.append(path);
    strip.append(label, svg);
    mount.append(strip);
  }
}

import { afterEach, describe, expect, it } from "vitest";

import { bindKeys, type KeyHandlers } from "../src/keyboard";

function counters() {
  const counts = { confirm: 0, unsure: 0, panLeft: 0, panRight: 0 };
  const handlers: KeyHandlers = {
    confirm: () => counts.confirm++,
    unsure: () => counts.unsure++,
    panLeft: () => counts.panLeft++,
    panRight: () => counts.panRight++,
  };
  return { counts, handlers };
}

function press(key: string, init: KeyboardEventInit = {}, target?: Element) {
  const event = new KeyboardEvent("keydown", { key, bubbles: true, ...init });
  (target ?? document.body).dispatchEvent(event);
}

let unbind: (() => void) | null = null;

afterEach(() => {
  unbind?.();
  unbind = null;
  document.body.innerHTML = "";
});

describe("keyboard shortcuts", () => {
  it("maps Enter, U and the arrows", () => {
    const { counts, handlers } = counters();
    unbind = bindKeys(handlers);
    press("Enter");
    press("u");
    press("U");
    press("ArrowLeft");
    press("ArrowRight");
    press("x");
    expect(counts).toEqual({ confirm: 1, unsure: 2, panLeft: 1, panRight: 1 });
  });

  it("stays quiet while typing in a field", () => {
    const { counts, handlers } = counters();
    unbind = bindKeys(handlers);
    const input = document.createElement("input");
    const textarea = document.createElement("textarea");
    document.body.append(input, textarea);
    press("Enter", {}, input);
    press("u", {}, textarea);
    expect(counts).toEqual({ confirm: 0, unsure: 0, panLeft: 0, panRight: 0 });
  });

  it("ignores chorded keys", () => {
    const { counts, handlers } = counters();
    unbind = bindKeys(handlers);
    press("Enter", { ctrlKey: true });
    press("u", { metaKey: true });
    press("ArrowLeft", { altKey: true });
    expect(counts).toEqual({ confirm: 0, unsure: 0, panLeft: 0, panRight: 0 });
  });

  it("unbind detaches the listener", () => {
    const { counts, handlers } = counters();
    const off = bindKeys(handlers);
    press("Enter");
    off();
    press("Enter");
    expect(counts.confirm).toBe(1);
  });
});

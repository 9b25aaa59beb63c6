import { describe, expect, it } from "vitest";

import { clearDraft, confirmProblem, emptyDraft, toggleLabel } from "../src/draft";

describe("draft", () => {
  it("toggles labels on and off", () => {
    const d = emptyDraft();
    toggleLabel(d, "AF");
    toggleLabel(d, "NORM");
    expect([...d.labels].sort()).toEqual(["AF", "NORM"]);
    toggleLabel(d, "AF");
    expect([...d.labels]).toEqual(["NORM"]);
  });

  it("rejects an empty confirm", () => {
    expect(confirmProblem(emptyDraft())).toMatch(/labels or a comment/);
  });

  it("whitespace is not a comment", () => {
    const d = emptyDraft();
    d.comment = "   \n\t";
    expect(confirmProblem(d)).not.toBeNull();
  });

  it("either a label or a comment satisfies confirm", () => {
    const labeled = emptyDraft();
    toggleLabel(labeled, "ER");
    expect(confirmProblem(labeled)).toBeNull();

    const commented = emptyDraft();
    commented.comment = "odd baseline, lead off?";
    expect(confirmProblem(commented)).toBeNull();
  });

  it("clear resets both fields", () => {
    const d = emptyDraft();
    toggleLabel(d, "TWC");
    d.comment = "x";
    clearDraft(d);
    expect(d.labels.size).toBe(0);
    expect(d.comment).toBe("");
  });
});

// The annotation being composed for the record on screen.

export interface Draft {
  labels: Set<string>;
  comment: string;
}

export function emptyDraft(): Draft {
  return { labels: new Set(), comment: "" };
}

export function toggleLabel(draft: Draft, code: string): void {
  if (draft.labels.has(code)) draft.labels.delete(code);
  else draft.labels.add(code);
}

// Mirrors the server rule so the common case never round-trips; the
// server still enforces it.
export function confirmProblem(draft: Draft): string | null {
  if (draft.labels.size === 0 && draft.comment.trim() === "") {
    return "a confirmed annotation needs labels or a comment";
  }
  return null;
}

export function clearDraft(draft: Draft): void {
  draft.labels.clear();
  draft.comment = "";
}

// Fetch client for the annotation server. Every call goes through
// request() so auth, query building and the error envelope are handled
// in one place.

import type {
  AnalysisResponse,
  Annotation,
  DatasetInfo,
  DecisionResult,
  Page,
  RecordEntry,
  RecordMetadata,
  ResumePoint,
  ReviewEntry,
  SegmentResponse,
  SessionInfo,
  SubmitResult,
} from "./types";

// Same-origin by default (the server hosts the built UI); tests point
// this at a live server on another port.
let apiBase = "";

export function setApiBase(url: string): void {
  apiBase = url.replace(/\/$/, "");
}

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    message: string,
  ) {
    super(message);
  }
}

let authToken: string | null = null;

export function setToken(token: string | null): void {
  authToken = token;
}

export function getToken(): string | null {
  return authToken;
}

type Query = Record<string, string | number | undefined>;

function buildUrl(path: string, query?: Query): string {
  let url = apiBase + path;
  if (query) {
    const params = new URLSearchParams();
    for (const [key, value] of Object.entries(query)) {
      if (value !== undefined) params.set(key, String(value));
    }
    const qs = params.toString();
    if (qs) url += "?" + qs;
  }
  return url;
}

async function request<T>(
  method: string,
  path: string,
  opts: { body?: unknown; query?: Query; text?: boolean } = {},
): Promise<T> {
  const headers: Record<string, string> = {};
  if (authToken) headers["Authorization"] = `Bearer ${authToken}`;
  if (opts.body !== undefined) headers["Content-Type"] = "application/json";
  const response = await fetch(buildUrl(path, opts.query), {
    method,
    headers,
    body: opts.body === undefined ? undefined : JSON.stringify(opts.body),
  });
  if (!response.ok) {
    let code = "internal";
    let message = `request failed (${response.status})`;
    try {
      const payload = await response.json();
      code = payload.error.code;
      message = payload.error.message;
    } catch {
      // non-JSON error body; keep the fallback message
    }
    throw new ApiError(response.status, code, message);
  }
  if (response.status === 204) return undefined as T;
  return (opts.text ? response.text() : response.json()) as Promise<T>;
}

// --- accounts ---

export function register(code: string, username: string, password: string) {
  return request<{ user_id: string; username: string; role: string }>(
    "POST",
    "/api/register",
    { body: { code, username, password } },
  );
}

export function login(username: string, password: string) {
  return request<SessionInfo>("POST", "/api/login", {
    body: { username, password },
  });
}

export function logout() {
  return request<void>("POST", "/api/logout");
}

// --- datasets ---

export async function listDatasets(): Promise<DatasetInfo[]> {
  const payload = await request<{ datasets: DatasetInfo[] }>(
    "GET",
    "/api/datasets",
  );
  return payload.datasets;
}

export function resumeDataset(datasetId: string) {
  return request<ResumePoint>(
    "GET",
    `/api/datasets/${encodeURIComponent(datasetId)}/resume`,
  );
}

export function navigate(
  datasetId: string,
  position: number,
  direction: "next" | "previous",
) {
  return request<{ record_id: string; position: number }>(
    "GET",
    `/api/datasets/${encodeURIComponent(datasetId)}/navigate`,
    { query: { position, direction } },
  );
}

export function listUnsure(datasetId: string, offset = 0, limit = 200) {
  return request<Page<RecordEntry>>(
    "GET",
    `/api/datasets/${encodeURIComponent(datasetId)}/unsure`,
    { query: { offset, limit } },
  );
}

export function listReview(datasetId: string, offset = 0, limit = 200) {
  return request<Page<ReviewEntry>>(
    "GET",
    `/api/datasets/${encodeURIComponent(datasetId)}/review`,
    { query: { offset, limit } },
  );
}

export function exportCsv(datasetId: string) {
  return request<string>(
    "GET",
    `/api/datasets/${encodeURIComponent(datasetId)}/export`,
    { text: true },
  );
}

export function myAnnotations(datasetId: string, offset = 0, limit = 200) {
  return request<Page<RecordEntry>>("GET", "/api/me/annotations", {
    query: { dataset: datasetId, offset, limit },
  });
}

// --- records ---
// Record ids contain slashes ("<dataset>/<name>") and the server routes
// them with a path converter, so they are embedded unescaped.

export function recordMetadata(recordId: string) {
  return request<RecordMetadata>("GET", `/api/records/${recordId}`);
}

export function fetchSegment(
  recordId: string,
  opts: {
    start?: number;
    end?: number;
    leads?: string[];
    maxBuckets?: number;
  } = {},
) {
  return request<SegmentResponse>("GET", `/api/records/${recordId}/segment`, {
    query: {
      start: opts.start,
      end: opts.end,
      leads: opts.leads?.length ? opts.leads.join(",") : undefined,
      max_buckets: opts.maxBuckets,
    },
  });
}

export function fetchAnalysis(recordId: string) {
  return request<AnalysisResponse>("GET", `/api/records/${recordId}/analysis`);
}

export function submitAnnotation(
  recordId: string,
  labels: string[],
  comment: string,
  status: "confirmed" | "unsure",
) {
  return request<SubmitResult>("POST", `/api/records/${recordId}/annotation`, {
    body: { labels, comment, status },
  });
}

export function reviseAnnotation(
  annotationId: string,
  labels: string[],
  comment: string,
  status: "confirmed" | "unsure",
  expectedRevision: number,
) {
  return request<{ annotation: Annotation }>(
    "PUT",
    `/api/annotations/${encodeURIComponent(annotationId)}`,
    {
      body: {
        labels,
        comment,
        status,
        expected_revision: expectedRevision,
      },
    },
  );
}

export function decide(
  annotationId: string,
  action: "approve" | "override",
  overrideLabels?: string[],
) {
  return request<DecisionResult>(
    "POST",
    `/api/annotations/${encodeURIComponent(annotationId)}/decision`,
    {
      body: {
        action,
        override_labels: overrideLabels ?? null,
      },
    },
  );
}

// Wire shapes, field for field as the server sends them.

export interface SessionInfo {
  token: string;
  user_id: string;
  username: string;
  role: string;
  expires_at: string;
}

export interface LabelDef {
  code: string;
  display_text: string;
}

export interface DatasetInfo {
  dataset_id: string;
  name: string;
  total: number;
  annotated_count: number;
  is_expert: boolean;
  labels: LabelDef[];
}

export interface ResumePoint {
  record_id: string | null;
  position: number;
  total: number;
  annotated_count: number;
  complete: boolean;
}

export interface LeadSegment {
  lead_name: string;
  bucket_width: number; // samples per bucket
  extrema: [number, number][]; // [min, max] mV per bucket
}

export interface SegmentResponse {
  record_id: string;
  t_start: number;
  t_end: number;
  sampling_frequency: number;
  n_samples: number;
  lead_names: string[];
  leads: LeadSegment[];
}

export interface RhythmFeatures {
  mean_hr: number;
  rr_mean: number;
  rr_std: number;
  rr_cv: number;
  n_beats: number;
}

export interface Suggestion {
  code: string;
  display_text: string;
  rule_id: string;
}

export interface AnalysisResponse {
  record_id?: string;
  analyzed_lead?: string;
  n_beats?: number;
  features?: RhythmFeatures | null;
  suggestions?: Suggestion[];
}

export interface Annotation {
  annotation_id: string;
  record_id: string;
  annotator_id: string;
  annotator_username: string;
  labels: string[];
  comment: string;
  status: "confirmed" | "unsure";
  revision: number;
  created_at: string;
  updated_at: string;
  superseded_by: string | null;
  derived_from: string | null;
}

export interface RecordMetadata {
  record_id: string;
  dataset_id: string;
  name: string;
  position: number;
  total: number;
  sampling_frequency: number;
  n_samples: number;
  duration: number;
  lead_names: string[];
  my_annotation: Annotation | null;
}

export interface SubmitResult {
  annotation: Annotation;
  next_record_id: string | null;
  complete: boolean;
}

export interface Page<T> {
  total: number;
  offset: number;
  limit: number;
  entries: T[];
}

export interface RecordEntry {
  record_id: string;
  record_name: string;
  position: number;
  annotation: Annotation;
}

export interface ReviewEntry {
  record_id: string;
  record_name: string;
  position: number;
  heads: Annotation[];
}

export interface Decision {
  review_id: string;
  reviewer_id: string;
  target_annotation_id: string;
  action: "approve" | "override";
  override_labels: string[] | null;
  created_annotation_id: string | null;
  decided_at: string;
}

export interface DecisionResult {
  decision: Decision;
  annotation: Annotation | null;
}

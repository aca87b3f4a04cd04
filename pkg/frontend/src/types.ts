/** Payload shapes of the job server API. */

export interface CodeEntry {
  code: string;
  category: string;
  description: string;
}

export interface JobSummary {
  job_id: string;
  state: string;
  created_at: string;
  paragraph_count: number;
  current_round: number;
  warning_count: number;
}

export interface AnnotationJson {
  span: string;
  occurrence: number;
  code: string;
  suggestion: string;
  rationale: string;
}

export interface RoundView {
  round: number;
  annotations: AnnotationJson[];
  revision: string | null;
  warnings: string[];
}

export interface ParagraphView {
  index: number;
  source: string;
  draft: string | null;
  rounds: RoundView[];
  final: string | null;
}

export interface JobWarningView {
  kind: string;
  paragraph_index: number;
  round: number;
  message: string;
  details: Record<string, number>;
}

export interface JobView {
  job_id: string;
  state: string;
  created_at: string;
  doc_id: string;
  direction: { source: string; target: string };
  failure: string | null;
  paragraphs: ParagraphView[];
  usage: { phase: string; input_tokens: number; output_tokens: number; provider: string }[];
  cost: { per_phase: Record<string, string>; total: string };
  warnings: JobWarningView[];
}

export interface FieldError {
  field: string;
  message: string;
}

export interface JobCreateRequest {
  role_bindings: Record<string, string>;
  direction: { source: string; target: string };
  glossary_ref?: string | null;
  rounds?: number;
  human_annotation?: boolean;
  few_shot?: boolean;
  text: string;
}

/** Session-scoped configuration; provider keys live in page memory only. */
export interface SessionConfig {
  providerKeys: Map<string, string>;
  roles: Record<string, string>;
  direction: { source: string; target: string };
  glossaryRef: string | null;
}

export const ROLES = ['Translator', 'Annotator', 'Proofreader'] as const;

export const DEFAULT_DIRECTION = { source: 'en', target: 'zh-Hant' };

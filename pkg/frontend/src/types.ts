// Server JSON shapes. The UI is a pure renderer of these; it never parses
// model output or locates entities itself.

export interface ModelInfo {
  id: string;
  display_name: string;
}

export interface HealthInfo {
  status: string;
  backends: Record<string, boolean>;
  max_tokens_limit: number;
}

export interface EntityRef {
  type: string;
  text: string;
}

export interface RelationEntry {
  subject: EntityRef;
  relation: string;
  object: EntityRef;
}

export interface RejectedLine {
  line: number;
  raw: string;
  reason: string;
}

export interface WarningLine {
  line: number;
  note: string;
}

export interface ParseReportJson {
  relations: RelationEntry[];
  rejected: RejectedLine[];
  warnings: WarningLine[];
}

export interface SpanJson {
  start: number;
  end: number;
  type: string;
  text: string;
}

export interface AnnotatedJson {
  article: string;
  spans: SpanJson[];
  unlocated: EntityRef[];
  colors: Record<string, string>;
}

export interface EntityRow {
  text: string;
  type: string;
}

export interface RelationRow {
  subject: string;
  relation: string;
  object: string;
}

export interface ExtractResponse {
  raw: string;
  relations: ParseReportJson;
  annotated: AnnotatedJson;
  entity_table: EntityRow[];
  relation_table: RelationRow[];
  timing_ms: number;
}

export interface ExtractRequest {
  article: string;
  model: string;
  max_tokens: number;
}

export type View = "raw" | "json" | "article";

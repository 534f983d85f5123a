/** Payload shapes of the evaluation service API.
 *
 * The service encodes an undefined statistic as null and an infinite one as
 * the string "inf" / "-inf" (strict JSON has no Infinity literal).
 */

export type CellValue = number | "inf" | "-inf" | null;

export type PromptStatus = "answer" | "server_busy" | "transport_error";

export type OutcomeTag =
  | "accepted"
  | "rejected_wrong_output"
  | "rejected_runtime_error"
  | "rejected_misunderstood";

export const OUTCOME_TAGS: OutcomeTag[] = [
  "accepted",
  "rejected_wrong_output",
  "rejected_runtime_error",
  "rejected_misunderstood",
];

export interface PromptResult {
  status: PromptStatus;
  latency_s: number;
  text: string | null;
  detail: string | null;
}

export interface ProvisionalIndices {
  e_sbr: number | null;
  e_art: number | null;
  e: number | null;
  c: number | null;
}

export interface LiveStats {
  framework_label: string;
  task_label: string;
  attempts_q: number;
  total_queries_n: number;
  sb_count: number;
  response_times_s: number[];
  state: string;
  artpq_s: number | null;
  provisional: ProvisionalIndices;
}

export interface SessionEvent {
  seq: number;
  ts: string;
  kind: string;
  payload: Record<string, unknown>;
}

export interface IniReport {
  session_id: string;
  framework_label: string;
  e_sbr: number;
  e_art: number;
  e: number;
  c: number;
  a: number;
  ini: number;
  artpq_s: number;
  mape_av_pct: number;
}

export interface ComparisonRow {
  framework: string;
  values: CellValue[];
}

export interface ComparisonTable {
  metric: string;
  variables: string[];
  rows: ComparisonRow[];
}

export interface RankingRow {
  framework: string;
  e_sbr: number;
  e_art: number;
  e: number;
  c: number;
  a: number;
  ini: number;
  artpq_s: number;
  mape_av_pct: number;
}

export interface Comparison {
  ranking: RankingRow[];
  tables: Record<string, ComparisonTable>;
}

export interface PlotSeries {
  session_id: string;
  framework_label: string;
  variable: string;
  variables: string[];
  start_index: number;
  index: number[];
  truth: number[];
  prediction: number[];
}

export interface MetricReportPayload {
  [field: string]: CellValue;
}

export interface PredictionsUploadResult {
  reports: Record<string, MetricReportPayload>;
  mape_av_pct: number;
}

export interface ApiErrorBody {
  code: string;
  message: string;
  detail: string;
}

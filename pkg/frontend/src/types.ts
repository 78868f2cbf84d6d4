/** Shapes of the review service's HTTP responses. The client treats the
 * service as the single source of truth and never recomputes metrics. */

export type Prediction = 0 | 1;

export interface SessionInfo {
  session_id: string;
  participant_id: string;
  n_cases: number;
}

export interface GuidanceView {
  verdict: 'present' | 'absent';
  probability: number;
  reason_for: string;
  reason_against: string;
}

export interface CaseView {
  id: string;
  report_text: string;
  index: number;
  total: number;
}

export type NextResponse =
  | { done: true }
  | {
      done: false;
      case: CaseView;
      phase: 'AwaitInitial' | 'GuidanceRevealed';
      guidance?: GuidanceView;
    };

export type InitialResponse =
  | { advance: true }
  | { advance: false; guidance: GuidanceView };

export interface ReliabilityRow {
  lower: number;
  upper: number;
  count: number;
  mean_confidence: number | null;
  mean_label: number | null;
  ece_weight: number;
  gamma_weight: number;
}

export interface ReliabilityResponse {
  gamma: number;
  source: string;
  rows: ReliabilityRow[];
}

export interface ArcResponse {
  rank_source: string;
  classification_source: string;
  points: [number, number][];
  auarc: number;
}

export interface ClassificationEntry {
  precision: number | null;
  recall: number | null;
  f1: number | null;
  accuracy: number;
}

export interface SessionSummary {
  accuracy_unguided: Record<string, number>;
  accuracy_guided: Record<string, number>;
  llm_accuracy: number | null;
  wilcoxon: [number, number] | null;
  chi_squared: [number, number] | null;
  n_participants: number;
  n_guidance_shown: number;
}

export interface MetricsDocument {
  schema_version: number;
  n: number;
  class_balance: number;
  alpha: number;
  deferred_count: number;
  theta: number;
  classification: Record<string, ClassificationEntry | null>;
  calibration: Record<
    string,
    { ece: number; ace: number; ece_imb: number } | null
  >;
  deferral: { auarc: Record<string, number> };
  sessions: SessionSummary | null;
}

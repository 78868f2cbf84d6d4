/** Dashboard view models: pure formatting of the service's metrics
 * documents. No metric is ever recomputed client-side; undefined values
 * render as an explicit absent marker. */

import type {
  ArcResponse,
  MetricsDocument,
  ReliabilityResponse,
  SessionSummary,
} from './types.js';

export const ABSENT = '—';

export function formatMetric(value: number | null | undefined, digits = 4): string {
  if (value === null || value === undefined) return ABSENT;
  return value.toFixed(digits);
}

export interface ReliabilityTableRow {
  range: string;
  count: number;
  confidence: string;
  observed: string;
  eceWeight: string;
  gammaWeight: string;
}

export function reliabilityTable(res: ReliabilityResponse): ReliabilityTableRow[] {
  return res.rows.map((row) => ({
    range: `(${row.lower.toFixed(2)}, ${row.upper.toFixed(2)}]`,
    count: row.count,
    confidence: formatMetric(row.mean_confidence),
    observed: formatMetric(row.mean_label),
    eceWeight: formatMetric(row.ece_weight),
    gammaWeight: formatMetric(row.gamma_weight),
  }));
}

export interface ArcSummary {
  label: string;
  auarc: string;
  points: [number, number][];
}

export function arcSummary(res: ArcResponse): ArcSummary {
  return {
    label: `rank ${res.rank_source} / classify ${res.classification_source}`,
    auarc: formatMetric(res.auarc),
    points: res.points,
  };
}

export interface SourceRow {
  source: string;
  precision: string;
  recall: string;
  f1: string;
  accuracy: string;
  ece: string;
  eceImb: string;
}

export function sourceTable(doc: MetricsDocument): SourceRow[] {
  return Object.keys(doc.classification).map((source) => {
    const cls = doc.classification[source];
    const cal = doc.calibration[source];
    return {
      source,
      precision: formatMetric(cls?.precision),
      recall: formatMetric(cls?.recall),
      f1: formatMetric(cls?.f1),
      accuracy: formatMetric(cls?.accuracy),
      ece: formatMetric(cal?.ece),
      eceImb: formatMetric(cal?.ece_imb),
    };
  });
}

export interface PilotPanel {
  participants: number;
  guidanceShown: number;
  llmAccuracy: string;
  meanUnguided: string;
  meanGuided: string;
  wilcoxonP: string;
  chiSquaredP: string;
}

/** Session accuracy summary; null when no pilot data exists so the
 * dashboard omits the panel entirely. The per-session means are display
 * aggregation of server-reported values, not metric math. */
export function pilotPanel(sessions: SessionSummary | null): PilotPanel | null {
  if (sessions === null || sessions.n_participants === 0) return null;
  const mean = (values: Record<string, number>): string => {
    const nums = Object.values(values);
    return formatMetric(nums.reduce((a, b) => a + b, 0) / nums.length);
  };
  return {
    participants: sessions.n_participants,
    guidanceShown: sessions.n_guidance_shown,
    llmAccuracy: formatMetric(sessions.llm_accuracy),
    meanUnguided: mean(sessions.accuracy_unguided),
    meanGuided: mean(sessions.accuracy_guided),
    wilcoxonP: formatMetric(sessions.wilcoxon ? sessions.wilcoxon[1] : null),
    chiSquaredP: formatMetric(sessions.chi_squared ? sessions.chi_squared[1] : null),
  };
}

export interface DashboardView {
  n: number;
  deferred: number;
  theta: string;
  alpha: string;
  sources: SourceRow[];
  reliability: ReliabilityTableRow[];
  arc: ArcSummary;
  pilot: PilotPanel | null;
}

export function buildDashboard(
  doc: MetricsDocument,
  reliability: ReliabilityResponse,
  arc: ArcResponse,
): DashboardView {
  return {
    n: doc.n,
    deferred: doc.deferred_count,
    theta: formatMetric(doc.theta),
    alpha: formatMetric(doc.alpha, 2),
    sources: sourceTable(doc),
    reliability: reliabilityTable(reliability),
    arc: arcSummary(arc),
    pilot: pilotPanel(doc.sessions),
  };
}

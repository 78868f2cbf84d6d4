export { ApiClient, ServiceError } from './api.js';
export type { FetchLike, ResponseTracer } from './api.js';
export { ReviewFlow, ProtocolError } from './flow.js';
export type { FlowPhase, FlowState } from './flow.js';
export {
  ABSENT,
  arcSummary,
  buildDashboard,
  formatMetric,
  pilotPanel,
  reliabilityTable,
  sourceTable,
} from './dashboard.js';
export type { DashboardView } from './dashboard.js';
export { escapeHtml, renderCase, renderDashboard } from './render.js';
export type * from './types.js';

/** HTML rendering for the review console. Framework-free string templates
 * so rendering is testable without a browser; the host page injects the
 * output and wires the enabled buttons back to the flow. */

import type { DashboardView } from './dashboard.js';
import type { FlowState } from './flow.js';

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, '&amp;')
    .replace(/</g, '&lt;')
    .replace(/>/g, '&gt;')
    .replace(/"/g, '&quot;');
}

export function renderCase(state: FlowState, briefing: string): string {
  if (state.phase === 'Briefing') {
    return `<section class="briefing"><p>${escapeHtml(briefing)}</p>` +
      `<button data-action="start">Begin</button></section>`;
  }
  if (state.phase === 'Done' || state.case === null) {
    return `<section class="done"><p>All assigned cases reviewed.</p></section>`;
  }
  const c = state.case;
  const progress = `Case ${c.index + 1} of ${c.total}`;
  const report =
    `<header>${escapeHtml(progress)}</header>` +
    `<article class="report">${escapeHtml(c.report_text)}</article>`;
  if (state.phase === 'AwaitInitial') {
    return (
      `<section class="case await-initial">${report}` +
      `<button data-action="initial" data-prediction="1">Present</button>` +
      `<button data-action="initial" data-prediction="0">Absent</button>` +
      `</section>`
    );
  }
  const g = state.guidance;
  const guidance = g
    ? `<aside class="guidance">` +
      `<p class="verdict">Model verdict: ${escapeHtml(g.verdict)} ` +
      `(${g.probability.toFixed(2)})</p>` +
      `<p class="for">${escapeHtml(g.reason_for)}</p>` +
      `<p class="against">${escapeHtml(g.reason_against)}</p>` +
      `</aside>`
    : '';
  return (
    `<section class="case guidance-revealed">${report}${guidance}` +
    `<button data-action="final" data-prediction="1">Present</button>` +
    `<button data-action="final" data-prediction="0">Absent</button>` +
    `</section>`
  );
}

export function renderDashboard(view: DashboardView): string {
  const sourceRows = view.sources
    .map(
      (r) =>
        `<tr><td>${escapeHtml(r.source)}</td><td>${r.precision}</td>` +
        `<td>${r.recall}</td><td>${r.f1}</td><td>${r.accuracy}</td>` +
        `<td>${r.ece}</td><td>${r.eceImb}</td></tr>`,
    )
    .join('');
  const reliabilityRows = view.reliability
    .map(
      (r) =>
        `<tr><td>${r.range}</td><td>${r.count}</td><td>${r.confidence}</td>` +
        `<td>${r.observed}</td><td>${r.eceWeight}</td><td>${r.gammaWeight}</td></tr>`,
    )
    .join('');
  const pilot = view.pilot
    ? `<section class="pilot">` +
      `<p>${view.pilot.participants} participants, ` +
      `${view.pilot.guidanceShown} guidance reveals</p>` +
      `<p>unguided ${view.pilot.meanUnguided} → guided ${view.pilot.meanGuided} ` +
      `(p=${view.pilot.wilcoxonP})</p>` +
      `<p>model accuracy ${view.pilot.llmAccuracy}, ` +
      `change-vs-correctness p=${view.pilot.chiSquaredP}</p>` +
      `</section>`
    : '';
  return (
    `<section class="dashboard">` +
    `<p>${view.n} cases, ${view.deferred} deferred (θ=${view.theta}, α=${view.alpha})</p>` +
    `<table class="sources"><tbody>${sourceRows}</tbody></table>` +
    `<table class="reliability"><tbody>${reliabilityRows}</tbody></table>` +
    `<p class="arc">${escapeHtml(view.arc.label)}: AUARC ${view.arc.auarc}</p>` +
    pilot +
    `</section>`
  );
}

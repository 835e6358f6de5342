/**
 * Pure HTML renderers. Every number shown to the user passes through num(),
 * which stamps the value into a data-value attribute; the contract tests
 * walk rendered output and check each data-value appears verbatim in the
 * source payload. No arithmetic happens here.
 */

import { SCHEMA_VERSION } from './types.js';
import type {
  ExplainResponse,
  ExplanationPayload,
  FidelityRecordPayload,
  RegressionPayload,
  SimplifyResponse,
} from './types.js';

export class SchemaMismatchError extends Error {
  constructor(got: unknown) {
    super(`payload schema_version ${String(got)} does not match ${SCHEMA_VERSION}`);
  }
}

export function assertSchema(payload: { schema_version?: unknown }): void {
  if (payload.schema_version !== SCHEMA_VERSION) {
    throw new SchemaMismatchError(payload.schema_version);
  }
}

export function escapeHtml(text: string): string {
  return text
    .replaceAll('&', '&amp;')
    .replaceAll('<', '&lt;')
    .replaceAll('>', '&gt;')
    .replaceAll('"', '&quot;');
}

/** Verbatim display of a payload number (or a dash for missing values). */
export function num(value: number | null | undefined): string {
  if (value === null || value === undefined) {
    return '<span class="num missing">&mdash;</span>';
  }
  const text = String(value);
  return `<span class="num" data-value="${escapeHtml(text)}">${escapeHtml(text)}</span>`;
}

function pill(ok: boolean, textOk: string, textBad: string): string {
  return ok
    ? `<span class="pill ok">${textOk}</span>`
    : `<span class="pill bad">${textBad}</span>`;
}

export function renderEquation(regression: RegressionPayload): string {
  const terms = regression.terms
    .map(
      (t) =>
        `<li class="term" data-kind="${escapeHtml(t.kind)}">` +
        `${num(t.coefficient)} &times; <code>${escapeHtml(t.label)}</code></li>`,
    )
    .join('');
  return (
    `<div class="equation"><code class="equation-text">${escapeHtml(regression.equation)}</code>` +
    `<ul class="terms"><li class="term" data-kind="intercept">intercept ${num(regression.intercept)}</li>${terms}</ul></div>`
  );
}

function recordRow(record: FidelityRecordPayload): string {
  const failed = record.status !== 'ok';
  const cls = record.within_threshold ? 'ok' : 'bad';
  const statusCell = failed
    ? `<span class="estimation-failure">estimation failure: ${escapeHtml(record.status)}</span>`
    : pill(record.within_threshold, 'within T', 'outside T');
  return (
    `<tr class="record ${cls}${failed ? ' failure' : ''}">` +
    `<td>${escapeHtml(record.feature)}</td>` +
    `<td>${num(record.actual_delta)}</td>` +
    `<td>${num(record.estimated_delta)}</td>` +
    `<td>${num(record.error)}</td>` +
    `<td>${record.feasible ? 'yes' : 'no'}</td>` +
    `<td>${statusCell}</td></tr>`
  );
}

export function renderFidelityTable(records: FidelityRecordPayload[]): string {
  const rows = records.map(recordRow).join('');
  return (
    '<table class="records"><thead><tr>' +
    '<th>feature</th><th>actual &Delta;</th><th>estimated &Delta;</th>' +
    '<th>error</th><th>feasible</th><th>status</th>' +
    `</tr></thead><tbody>${rows}</tbody></table>`
  );
}

function renderFitStats(regression: RegressionPayload): string {
  if (!regression.fit_stats) {
    return '';
  }
  const items = Object.entries(regression.fit_stats)
    .filter(([, v]) => v !== null)
    .map(([k, v]) =>
      typeof v === 'number'
        ? `<li>${escapeHtml(k)}: ${num(v)}</li>`
        : `<li>${escapeHtml(k)}: ${escapeHtml(String(v))}</li>`,
    )
    .join('');
  return `<ul class="fit-stats">${items}</ul>`;
}

function renderSingleExplanation(expl: ExplanationPayload): string {
  const flips = expl.level_flips
    .map(
      (f) =>
        `<li>${escapeHtml(f.feature)}: ${escapeHtml(f.original_level)} &rarr; ` +
        `${escapeHtml(f.flipped_level)}</li>`,
    )
    .join('');
  return (
    `<section class="explanation" data-target-class="${expl.target_class}">` +
    `<h3>class ${expl.predicted_class} &rarr; class ${expl.target_class}</h3>` +
    `<p>model probability at x: ${num(expl.response_at_x)}; ` +
    `fidelity: ${num(expl.fidelity)}; surrogate gap: ${num(expl.surrogate_gap)}</p>` +
    renderEquation(expl.regression) +
    renderFidelityTable(expl.fidelity_records) +
    (flips ? `<p>level flips:</p><ul class="level-flips">${flips}</ul>` : '') +
    renderFitStats(expl.regression) +
    '</section>'
  );
}

/** Full explanation panel; throws SchemaMismatchError before emitting
 * anything when the payload version is wrong (no partial render). */
export function renderExplanation(payload: ExplainResponse): string {
  assertSchema(payload);
  for (const expl of payload.explanations) {
    assertSchema(expl);
  }
  const body = payload.explanations.map(renderSingleExplanation).join('');
  return (
    `<div class="explain-panel" data-seed="${payload.seed}">` +
    `<p class="overall">overall fidelity: ${num(payload.fidelity_overall)}</p>${body}</div>`
  );
}

export function renderSimplified(payload: SimplifyResponse): string {
  assertSchema(payload);
  const blocks = payload.simplified
    .map(
      (b) =>
        `<section class="simplified" data-target-class="${b.target_class}">` +
        `<p>fidelity after simplification: ${num(b.fidelity)}</p>` +
        renderEquation(b.regression) +
        renderFidelityTable(b.fidelity_records) +
        '</section>',
    )
    .join('');
  const keep = payload.keep.map((k) => `<code>${escapeHtml(k)}</code>`).join(', ');
  return `<div class="simplify-panel"><p>kept features: ${keep}</p>${blocks}</div>`;
}

export interface ComparisonEntry {
  label: string;
  fidelity: number | null;
}

/** History of tried configurations; fidelity values are shown verbatim so
 * the analyst can see each move's effect without the UI doing the math. */
export function renderComparison(history: ComparisonEntry[]): string {
  if (history.length === 0) {
    return '<div class="comparison empty">no configurations tried yet</div>';
  }
  const rows = history
    .map(
      (h, i) =>
        `<tr class="${i === history.length - 1 ? 'current' : 'previous'}">` +
        `<td>${escapeHtml(h.label)}</td><td>${num(h.fidelity)}</td></tr>`,
    )
    .join('');
  return (
    '<table class="comparison"><thead><tr><th>configuration</th><th>fidelity</th></tr></thead>' +
    `<tbody>${rows}</tbody></table>`
  );
}

export function renderErrorBanner(message: string): string {
  return `<div class="banner error" role="alert">${escapeHtml(message)}</div>`;
}

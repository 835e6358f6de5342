/**
 * Browser entry point: wires the controls to ExplorerState and redraws the
 * panels from each server payload. All rendering goes through the pure
 * functions in render.ts / scatter.ts; this file only touches the DOM.
 */

import { ApiClient } from './api.js';
import {
  renderComparison,
  renderErrorBanner,
  renderExplanation,
  renderSimplified,
} from './render.js';
import { renderScatter, renderScatterDisabled } from './scatter.js';
import { ExplorerState } from './state.js';
import type { ExplorerConfig, SessionResponse } from './types.js';

const $ = <T extends HTMLElement>(id: string): T => {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing element #${id}`);
  return el as T;
};

const api = new ApiClient('');
let state: ExplorerState | null = null;
let session: SessionResponse | null = null;

function numericFeatures(): string[] {
  return session ? session.features.filter((f) => f.kind === 'numeric').map((f) => f.name) : [];
}

function redraw(): void {
  if (!state) return;
  const banner = $('banner');
  banner.innerHTML = state.errorBanner ? renderErrorBanner(state.errorBanner) : '';
  $('status').textContent = state.pending ? 'working…' : 'idle';
  if (state.last) {
    try {
      $('explanation').innerHTML = renderExplanation(state.last);
    } catch (err) {
      $('explanation').innerHTML = '';
      banner.innerHTML = renderErrorBanner(err instanceof Error ? err.message : String(err));
    }
  }
  $('comparison').innerHTML = renderComparison(state.history);
  void drawScatter();
}

async function drawScatter(): Promise<void> {
  if (!state || !session || !state.last) return;
  const names = numericFeatures();
  const target = $('scatter');
  if (names.length < 2) {
    target.innerHTML = renderScatterDisabled(names.length);
    return;
  }
  const xSel = $<HTMLSelectElement>('scatter-x');
  const ySel = $<HTMLSelectElement>('scatter-y');
  try {
    const payload = await api.neighbourhood(session.session_id, state.observationIndex);
    target.innerHTML = renderScatter(payload, xSel.value, ySel.value);
  } catch (err) {
    target.innerHTML = renderErrorBanner(err instanceof Error ? err.message : String(err));
  }
}

function currentConfig(): ExplorerConfig {
  return {
    method: $<HTMLSelectElement>('cfg-method').value as ExplorerConfig['method'],
    family: $<HTMLSelectElement>('cfg-family').value as ExplorerConfig['family'],
    balanced: $<HTMLInputElement>('cfg-balanced').checked,
    centering: $<HTMLInputElement>('cfg-centering').checked,
    use_quadratic: $<HTMLInputElement>('cfg-quadratic').checked,
    use_interaction: $<HTMLInputElement>('cfg-interaction').checked,
    use_counterfactual_augmentation: $<HTMLInputElement>('cfg-augment').checked,
    max_terms: Number($<HTMLInputElement>('cfg-max-terms').value),
    T: Number($<HTMLInputElement>('cfg-threshold').value),
  };
}

function hookControls(): void {
  const ids = [
    'cfg-method', 'cfg-family', 'cfg-balanced', 'cfg-centering',
    'cfg-quadratic', 'cfg-interaction', 'cfg-augment', 'cfg-max-terms',
    'cfg-threshold',
  ];
  for (const id of ids) {
    $(id).addEventListener('change', () => {
      void state?.applyConfigChange(currentConfig());
    });
  }
  $('cfg-max-terms').addEventListener('input', () => {
    $('max-terms-value').textContent = $<HTMLInputElement>('cfg-max-terms').value;
  });
  $('scatter-x').addEventListener('change', () => void drawScatter());
  $('scatter-y').addEventListener('change', () => void drawScatter());

  $('observation-go').addEventListener('click', () => {
    void state?.selectObservation(Number($<HTMLInputElement>('observation-index').value));
  });

  $('simplify-go').addEventListener('click', async () => {
    if (!state || !session) return;
    const keep = $<HTMLInputElement>('simplify-keep')
      .value.split(',').map((s) => s.trim()).filter((s) => s.length > 0);
    try {
      const payload = await api.simplify(session.session_id, state.observationIndex, keep);
      $('simplified').innerHTML = renderSimplified(payload);
    } catch (err) {
      $('simplified').innerHTML = renderErrorBanner(
        err instanceof Error ? err.message : String(err),
      );
    }
  });

  $('view-save').addEventListener('click', () => {
    if (state) $<HTMLTextAreaElement>('view-serialized').value = state.serialize();
  });
  $('view-replay').addEventListener('click', () => {
    void state?.replay($<HTMLTextAreaElement>('view-serialized').value);
  });
}

async function connect(): Promise<void> {
  const body = {
    csv_path: $<HTMLInputElement>('session-csv').value,
    schema_path: $<HTMLInputElement>('session-schema').value,
    model: { kind: 'builtin', family: $<HTMLSelectElement>('session-model').value },
  };
  try {
    session = await api.createSession(body);
  } catch (err) {
    $('banner').innerHTML = renderErrorBanner(err instanceof Error ? err.message : String(err));
    return;
  }
  $('session-info').textContent =
    `session ${session.session_id}: ${session.n_train} train / ${session.n_test} test rows, ` +
    `classes ${session.class_names.join(', ')}`;
  const names = numericFeatures();
  for (const [selId, fallback] of [['scatter-x', 0], ['scatter-y', 1]] as const) {
    const sel = $<HTMLSelectElement>(selId);
    sel.innerHTML = names.map((n) => `<option>${n}</option>`).join('');
    sel.selectedIndex = Math.min(fallback, names.length - 1);
  }
  state = new ExplorerState(api, session.session_id);
  state.onUpdate(redraw);
  await state.selectObservation(0);
}

hookControls();
$('session-connect').addEventListener('click', () => void connect());

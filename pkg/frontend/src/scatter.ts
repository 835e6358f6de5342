/**
 * SVG scatter of the neighbourhood: a 2-D projection onto two user-chosen
 * numeric features, band-coloured, with the explained observation drawn as
 * a crosshair and weighted counterfactual points emphasised. The geometric
 * mapping to pixels is layout, not display: every number a user can read
 * (the tooltips) is a verbatim payload value.
 */

import { escapeHtml } from './render.js';
import type { NeighbourhoodResponse } from './types.js';

export const BAND_COLORS = ['#4878d0', '#b59a38', '#d65f5f'];
const SIZE = 420;
const PAD = 24;

export function renderScatterDisabled(featureCount: number): string {
  return (
    '<div class="scatter disabled">scatter view needs at least two numeric ' +
    `features; this dataset has ${featureCount}</div>`
  );
}

export function renderScatter(
  payload: NeighbourhoodResponse,
  xFeature: string,
  yFeature: string,
): string {
  const names = payload.feature_names;
  if (names.length < 2) {
    return renderScatterDisabled(names.length);
  }
  const xi = names.indexOf(xFeature);
  const yi = names.indexOf(yFeature);
  if (xi < 0 || yi < 0 || xi === yi) {
    return renderScatterDisabled(names.length);
  }

  const xs = payload.points.map((p) => p[xi]).concat([payload.x[xi]]);
  const ys = payload.points.map((p) => p[yi]).concat([payload.x[yi]]);
  const xLo = Math.min(...xs);
  const xHi = Math.max(...xs);
  const yLo = Math.min(...ys);
  const yHi = Math.max(...ys);
  const sx = (v: number): number =>
    PAD + ((v - xLo) / (xHi - xLo || 1)) * (SIZE - 2 * PAD);
  const sy = (v: number): number =>
    SIZE - PAD - ((v - yLo) / (yHi - yLo || 1)) * (SIZE - 2 * PAD);

  const dots = payload.points
    .map((p, i) => {
      const band = payload.bands[i];
      const cf = payload.is_counterfactual[i];
      const color = BAND_COLORS[band] ?? '#888888';
      const title =
        `<title>${escapeHtml(xFeature)}=${String(p[xi])} ` +
        `${escapeHtml(yFeature)}=${String(p[yi])} ` +
        `response=${String(payload.responses[i])} weight=${String(payload.weights[i])}</title>`;
      const common =
        `cx="${sx(p[xi]).toFixed(1)}" cy="${sy(p[yi]).toFixed(1)}" ` +
        `data-band="${band}" data-cf="${cf ? 1 : 0}"`;
      if (cf) {
        return (
          `<circle class="point counterfactual" ${common} r="7" fill="none" ` +
          `stroke="${color}" stroke-width="3">${title}</circle>`
        );
      }
      return `<circle class="point" ${common} r="3" fill="${color}">${title}</circle>`;
    })
    .join('');

  const cx = sx(payload.x[xi]).toFixed(1);
  const cy = sy(payload.x[yi]).toFixed(1);
  const marker =
    `<g class="x-marker"><line x1="${cx}" y1="${Number(cy) - 9}" x2="${cx}" y2="${Number(cy) + 9}" ` +
    'stroke="#111" stroke-width="2"/>' +
    `<line x1="${Number(cx) - 9}" y1="${cy}" x2="${Number(cx) + 9}" y2="${cy}" ` +
    'stroke="#111" stroke-width="2"/></g>';

  const legend = BAND_COLORS.map(
    (c, b) =>
      `<circle cx="${PAD + b * 90 + 6}" cy="12" r="4" fill="${c}"/>` +
      `<text x="${PAD + b * 90 + 14}" y="16" font-size="11">band ${b}</text>`,
  ).join('');

  return (
    `<svg class="scatter" viewBox="0 0 ${SIZE} ${SIZE}" width="${SIZE}" height="${SIZE}" ` +
    'xmlns="http://www.w3.org/2000/svg">' +
    `<text x="${SIZE / 2}" y="${SIZE - 4}" text-anchor="middle" font-size="12">` +
    `${escapeHtml(xFeature)}</text>` +
    `<text x="10" y="${SIZE / 2}" text-anchor="middle" font-size="12" ` +
    `transform="rotate(-90 10 ${SIZE / 2})">${escapeHtml(yFeature)}</text>` +
    legend +
    dots +
    marker +
    '</svg>'
  );
}

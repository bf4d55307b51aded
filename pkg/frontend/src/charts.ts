/** Pure SVG chart builders.
 *
 * Every builder returns both the markup and the exact server numbers it
 * plotted; nothing is recomputed client-side, coordinates are a display
 * transform only. */

import type { OutcomeSeries, ParetoEntry } from './types.js';

export const PALETTE = ['#2563eb', '#dc2626', '#059669', '#d97706', '#7c3aed', '#0891b2'];

export interface AxisSpec {
  label: string;
  indices: number[]; // objective indices summed for this axis (0-based)
}

export const AXIS_OPTIONS: AxisSpec[] = [
  { label: 'water supply (D3+D5)', indices: [2, 4] },
  { label: 'irrigation (D4+D6)', indices: [3, 5] },
  { label: 'min level D1', indices: [0] },
  { label: 'max level D2', indices: [1] },
  { label: 'towns A D3', indices: [2] },
  { label: 'irrigation A D4', indices: [3] },
  { label: 'towns B D5', indices: [4] },
  { label: 'irrigation B D6', indices: [5] },
  { label: 'ecology D7', indices: [6] },
  { label: 'hydropower D8', indices: [7] },
  { label: 'total users (D3..D7)', indices: [2, 3, 4, 5, 6] },
];

/** The default comparison axes: water supply against irrigation. */
export const PRESET_X = AXIS_OPTIONS[0];
export const PRESET_Y = AXIS_OPTIONS[1];

export function axisValue(sums: number[], axis: AxisSpec): number {
  let total = 0;
  for (const i of axis.indices) total += sums[i];
  return total;
}

function extent(values: number[]): [number, number] {
  let lo = Infinity;
  let hi = -Infinity;
  for (const v of values) {
    if (v < lo) lo = v;
    if (v > hi) hi = v;
  }
  if (!Number.isFinite(lo)) return [0, 1];
  if (lo === hi) return [lo - 1, hi + 1];
  return [lo, hi];
}

function scale([lo, hi]: [number, number], a: number, b: number) {
  return (v: number) => a + ((v - lo) / (hi - lo)) * (b - a);
}

const esc = (s: string) =>
  s.replace(/&/g, '&amp;').replace(/</g, '&lt;').replace(/>/g, '&gt;').replace(/"/g, '&quot;');

export interface TrajectoryInput {
  runId: string;
  label: string;
  series: OutcomeSeries;
}

export interface TrajectoryChart {
  svg: string;
  /** per run: the exact server storage trace that was plotted */
  plotted: { runId: string; values: number[] }[];
}

export function trajectoryChart(inputs: TrajectoryInput[], width = 640, height = 240): TrajectoryChart {
  const all = inputs.flatMap((r) => r.series.s_start);
  const [lo, hi] = extent(all);
  const longest = Math.max(1, ...inputs.map((r) => r.series.s_start.length - 1));
  const sx = scale([0, longest], 40, width - 8);
  const sy = scale([lo, hi], height - 20, 12);
  const lines = inputs.map((run, k) => {
    const pts = run.series.s_start
      .map((v, t) => `${sx(t).toFixed(1)},${sy(v).toFixed(1)}`)
      .join(' ');
    return (
      `<polyline fill="none" stroke="${PALETTE[k % PALETTE.length]}" stroke-width="1.5" points="${pts}">` +
      `<title>${esc(run.label)}</title></polyline>`
    );
  });
  const legend = inputs.map(
    (run, k) =>
      `<text x="44" y="${14 + 12 * k}" fill="${PALETTE[k % PALETTE.length]}" font-size="10">${esc(run.label)}</text>`,
  );
  const axis =
    `<text x="2" y="${height - 20}" font-size="9">${String(lo)}</text>` +
    `<text x="2" y="12" font-size="9">${String(hi)}</text>`;
  return {
    svg:
      `<svg viewBox="0 0 ${width} ${height}" xmlns="http://www.w3.org/2000/svg">` +
      axis +
      lines.join('') +
      legend.join('') +
      '</svg>',
    plotted: inputs.map((r) => ({ runId: r.runId, values: r.series.s_start })),
  };
}

export interface BarsInput {
  runId: string;
  label: string;
  objectiveSums: number[];
}

export interface BarsChart {
  svg: string;
  plotted: { runId: string; values: number[] }[];
}

/** Grouped per-objective bars; heights normalize within each objective so
 * metres and kWh can share one panel, labels carry the raw numbers. */
export function deficitBars(inputs: BarsInput[], width = 640, height = 220): BarsChart {
  const nObj = 8;
  const groupW = (width - 48) / nObj;
  const barW = Math.max(2, (groupW - 10) / Math.max(1, inputs.length));
  const parts: string[] = [];
  for (let obj = 0; obj < nObj; obj += 1) {
    const values = inputs.map((r) => r.objectiveSums[obj]);
    const top = Math.max(1e-12, ...values);
    inputs.forEach((run, k) => {
      const v = run.objectiveSums[obj];
      const h = (v / top) * (height - 50);
      const x = 40 + obj * groupW + 4 + k * barW;
      const y = height - 24 - h;
      parts.push(
        `<rect x="${x.toFixed(1)}" y="${y.toFixed(1)}" width="${(barW - 1).toFixed(1)}" height="${h.toFixed(1)}" ` +
          `fill="${PALETTE[k % PALETTE.length]}"><title>${esc(run.label)} D${obj + 1} = ${String(v)}</title></rect>`,
      );
    });
    parts.push(
      `<text x="${(40 + obj * groupW + groupW / 2).toFixed(1)}" y="${height - 10}" font-size="9" text-anchor="middle">D${obj + 1}</text>`,
    );
  }
  return {
    svg:
      `<svg viewBox="0 0 ${width} ${height}" xmlns="http://www.w3.org/2000/svg">` +
      parts.join('') +
      '</svg>',
    plotted: inputs.map((r) => ({ runId: r.runId, values: r.objectiveSums })),
  };
}

export interface ScatterPoint {
  runId: string;
  x: number;
  y: number;
  dominated: boolean;
}

export interface ScatterChart {
  svg: string;
  points: ScatterPoint[];
  xLabel: string;
  yLabel: string;
}

/** Pareto scatter over two selectable objective aggregates; dominated runs
 * (per the server's dominance table) are greyed. */
export function paretoScatter(
  entries: ParetoEntry[],
  axisX: AxisSpec = PRESET_X,
  axisY: AxisSpec = PRESET_Y,
  width = 360,
  height = 300,
): ScatterChart {
  const points: ScatterPoint[] = entries.map((e) => ({
    runId: e.run_id,
    x: axisValue(e.objective_sums, axisX),
    y: axisValue(e.objective_sums, axisY),
    dominated: e.dominated,
  }));
  const sx = scale(extent(points.map((p) => p.x)), 44, width - 12);
  const sy = scale(extent(points.map((p) => p.y)), height - 32, 14);
  const dots = points.map((p) => {
    const fill = p.dominated ? '#9ca3af' : '#2563eb';
    const cls = p.dominated ? 'dominated' : 'efficient';
    return (
      `<circle class="${cls}" cx="${sx(p.x).toFixed(1)}" cy="${sy(p.y).toFixed(1)}" r="5" fill="${fill}">` +
      `<title>${esc(p.runId)}: ${String(p.x)}, ${String(p.y)}${p.dominated ? ' (dominated)' : ''}</title></circle>`
    );
  });
  const labels =
    `<text x="${width / 2}" y="${height - 4}" font-size="10" text-anchor="middle">${esc(axisX.label)}</text>` +
    `<text x="10" y="${height / 2}" font-size="10" transform="rotate(-90 10 ${height / 2})" text-anchor="middle">${esc(axisY.label)}</text>`;
  return {
    svg:
      `<svg viewBox="0 0 ${width} ${height}" xmlns="http://www.w3.org/2000/svg">` +
      labels +
      dots.join('') +
      '</svg>',
    points,
    xLabel: axisX.label,
    yLabel: axisY.label,
  };
}

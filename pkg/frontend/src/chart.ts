import type { SurfaceRow } from "./types.js";

export interface ChartSeries {
  fraction: number;
  color: string;
  /** untouched (t, irr) pairs straight from the surface rows */
  points: Array<{ t: number; irr: number }>;
  path: string;
}

export interface ChartModel {
  width: number;
  height: number;
  series: ChartSeries[];
  xTicks: Array<{ x: number; label: string }>;
  yTicks: Array<{ y: number; label: string }>;
  hurdleY: number | null;
}

const MARGIN = { top: 12, right: 16, bottom: 28, left: 52 };
const PALETTE = ["#2563eb", "#d97706", "#059669", "#dc2626", "#7c3aed", "#0891b2"];

export function seriesColor(index: number): string {
  return PALETTE[index % PALETTE.length];
}

export function xScale(t: number, tMax: number, width: number): number {
  const inner = width - MARGIN.left - MARGIN.right;
  return MARGIN.left + (tMax === 0 ? 0 : (t / tMax) * inner);
}

export function yScale(irr: number, irrMin: number, irrMax: number, height: number): number {
  const inner = height - MARGIN.top - MARGIN.bottom;
  const span = irrMax - irrMin || 1;
  return MARGIN.top + (1 - (irr - irrMin) / span) * inner;
}

/**
 * Threshold curves over time, one series per size fraction. The data points
 * are carried through verbatim; only pixel coordinates are derived.
 */
export function buildChart(
  rows: SurfaceRow[],
  width: number,
  height: number,
  hurdleIrr: number | null = null,
): ChartModel {
  const byFraction = new Map<number, Array<{ t: number; irr: number }>>();
  for (const row of rows) {
    const bucket = byFraction.get(row.size_fraction) ?? [];
    bucket.push({ t: row.t_years, irr: row.required_irr });
    byFraction.set(row.size_fraction, bucket);
  }
  const fractions = [...byFraction.keys()].sort((a, b) => a - b);

  const irrs = rows.map((r) => r.required_irr);
  if (hurdleIrr !== null) irrs.push(hurdleIrr);
  const ts = rows.map((r) => r.t_years);
  const tMax = ts.length ? Math.max(...ts) : 1;
  const rawMin = irrs.length ? Math.min(...irrs) : 0;
  const rawMax = irrs.length ? Math.max(...irrs) : 1;
  const pad = (rawMax - rawMin || 0.01) * 0.05;
  const irrMin = rawMin - pad;
  const irrMax = rawMax + pad;

  const series: ChartSeries[] = fractions.map((fraction, i) => {
    const points = [...(byFraction.get(fraction) ?? [])].sort((a, b) => a.t - b.t);
    const path = points
      .map((p, j) => {
        const x = xScale(p.t, tMax, width);
        const y = yScale(p.irr, irrMin, irrMax, height);
        return `${j === 0 ? "M" : "L"}${x.toFixed(2)},${y.toFixed(2)}`;
      })
      .join(" ");
    return { fraction, color: seriesColor(i), points, path };
  });

  const xTicks = [];
  const nx = 6;
  for (let i = 0; i <= nx; i++) {
    const t = (tMax * i) / nx;
    xTicks.push({ x: xScale(t, tMax, width), label: `${t.toFixed(1)}y` });
  }
  const yTicks = [];
  const ny = 5;
  for (let i = 0; i <= ny; i++) {
    const irr = irrMin + ((irrMax - irrMin) * i) / ny;
    yTicks.push({ y: yScale(irr, irrMin, irrMax, height), label: `${(100 * irr).toFixed(1)}%` });
  }

  return {
    width,
    height,
    series,
    xTicks,
    yTicks,
    hurdleY: hurdleIrr === null ? null : yScale(hurdleIrr, irrMin, irrMax, height),
  };
}

export function renderChartSvg(model: ChartModel): string {
  const parts: string[] = [];
  parts.push(
    `<svg viewBox="0 0 ${model.width} ${model.height}" ` +
      `xmlns="http://www.w3.org/2000/svg" role="img">`,
  );
  for (const tick of model.yTicks) {
    parts.push(
      `<line x1="${MARGIN.left}" x2="${model.width - MARGIN.right}" ` +
        `y1="${tick.y.toFixed(2)}" y2="${tick.y.toFixed(2)}" class="gridline"/>`,
      `<text x="${MARGIN.left - 6}" y="${(tick.y + 4).toFixed(2)}" ` +
        `text-anchor="end" class="ticklabel">${tick.label}</text>`,
    );
  }
  for (const tick of model.xTicks) {
    parts.push(
      `<text x="${tick.x.toFixed(2)}" y="${model.height - 8}" ` +
        `text-anchor="middle" class="ticklabel">${tick.label}</text>`,
    );
  }
  if (model.hurdleY !== null) {
    parts.push(
      `<line x1="${MARGIN.left}" x2="${model.width - MARGIN.right}" ` +
        `y1="${model.hurdleY.toFixed(2)}" y2="${model.hurdleY.toFixed(2)}" class="hurdle"/>`,
    );
  }
  for (const series of model.series) {
    parts.push(`<path d="${series.path}" fill="none" stroke="${series.color}" stroke-width="2"/>`);
  }
  parts.push("</svg>");
  return parts.join("");
}

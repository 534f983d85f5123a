/** Dependency-free SVG builders for the dashboard.
 *
 * Pure geometry: values map to pixel coordinates, labels show the already
 * formatted display strings passed in by the view models.
 */

import type { BarViewModel } from "./dashboard-view.js";

const BAR_COLORS = ["#4e79a7", "#f28e2b", "#59a14f", "#e15759", "#76b7b2"];

function esc(text: string): string {
  return text.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}

/** Vertical bars on a fixed [0, 1] axis (indices are bounded by design). */
export function barChartSvg(bars: BarViewModel[], width = 420, height = 240): string {
  const margin = { top: 18, right: 12, bottom: 28, left: 34 };
  const plotW = width - margin.left - margin.right;
  const plotH = height - margin.top - margin.bottom;
  const slot = bars.length > 0 ? plotW / bars.length : plotW;
  const barW = Math.min(56, slot * 0.6);

  const parts: string[] = [
    `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" viewBox="0 0 ${width} ${height}">`,
  ];
  for (const tick of [0, 0.25, 0.5, 0.75, 1]) {
    const y = margin.top + plotH * (1 - tick);
    parts.push(
      `<line x1="${margin.left}" y1="${y}" x2="${width - margin.right}" y2="${y}" stroke="#ddd"/>`,
      `<text x="${margin.left - 6}" y="${y + 4}" text-anchor="end" font-size="10" fill="#666">${tick.toFixed(2)}</text>`,
    );
  }
  bars.forEach((bar, i) => {
    const clamped = Math.max(0, Math.min(1, bar.value));
    const barH = plotH * clamped;
    const x = margin.left + slot * i + (slot - barW) / 2;
    const y = margin.top + plotH - barH;
    const color = BAR_COLORS[i % BAR_COLORS.length];
    parts.push(
      `<rect x="${x.toFixed(1)}" y="${y.toFixed(1)}" width="${barW.toFixed(1)}" height="${barH.toFixed(1)}" fill="${color}"/>`,
      `<text x="${(x + barW / 2).toFixed(1)}" y="${(y - 5).toFixed(1)}" text-anchor="middle" font-size="12">${esc(bar.display)}</text>`,
      `<text x="${(x + barW / 2).toFixed(1)}" y="${height - 10}" text-anchor="middle" font-size="11" fill="#333">${esc(bar.label)}</text>`,
    );
  });
  parts.push("</svg>");
  return parts.join("");
}

export interface LineSeries {
  label: string;
  index: number[];
  values: number[];
  color?: string;
}

/** Overlaid line traces (truth vs predictions) over a shared index axis. */
export function linePlotSvg(series: LineSeries[], width = 640, height = 260): string {
  const margin = { top: 14, right: 10, bottom: 24, left: 46 };
  const plotW = width - margin.left - margin.right;
  const plotH = height - margin.top - margin.bottom;

  const allValues = series.flatMap((s) => s.values);
  const allIndex = series.flatMap((s) => s.index);
  if (allValues.length === 0) {
    return `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}"></svg>`;
  }
  const vMin = Math.min(...allValues);
  const vMax = Math.max(...allValues);
  const iMin = Math.min(...allIndex);
  const iMax = Math.max(...allIndex);
  const vSpan = vMax - vMin || 1;
  const iSpan = iMax - iMin || 1;

  const sx = (i: number) => margin.left + ((i - iMin) / iSpan) * plotW;
  const sy = (v: number) => margin.top + (1 - (v - vMin) / vSpan) * plotH;

  const parts: string[] = [
    `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" viewBox="0 0 ${width} ${height}">`,
    `<rect x="${margin.left}" y="${margin.top}" width="${plotW}" height="${plotH}" fill="none" stroke="#ccc"/>`,
    `<text x="${margin.left - 8}" y="${sy(vMax) + 4}" text-anchor="end" font-size="10" fill="#666">${vMax.toFixed(2)}</text>`,
    `<text x="${margin.left - 8}" y="${sy(vMin) + 4}" text-anchor="end" font-size="10" fill="#666">${vMin.toFixed(2)}</text>`,
    `<text x="${margin.left}" y="${height - 6}" font-size="10" fill="#666">${iMin}</text>`,
    `<text x="${width - margin.right}" y="${height - 6}" text-anchor="end" font-size="10" fill="#666">${iMax}</text>`,
  ];
  series.forEach((s, n) => {
    const color = s.color ?? BAR_COLORS[n % BAR_COLORS.length];
    const points = s.index.map((i, k) => `${sx(i).toFixed(1)},${sy(s.values[k] ?? 0).toFixed(1)}`);
    parts.push(
      `<polyline points="${points.join(" ")}" fill="none" stroke="${color}" stroke-width="1.4"/>`,
      `<text x="${margin.left + 8 + n * 110}" y="${margin.top + 12}" font-size="11" fill="${color}">${esc(s.label)}</text>`,
    );
  });
  parts.push("</svg>");
  return parts.join("");
}

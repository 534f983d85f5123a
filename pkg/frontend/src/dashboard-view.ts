/** Dashboard view models: bars, tables and plot traces built from fetched
 * payloads. Values are copied and formatted for display, never recomputed.
 */

import { formatIndex, formatMetric } from "./format.js";
import type { Comparison, ComparisonTable, IniReport, PlotSeries } from "./types.js";

/** The two focus windows preset on every plot panel. */
export const PRESET_WINDOWS: ReadonlyArray<{ start: number; end: number }> = [
  { start: 100, end: 200 },
  { start: 4100, end: 4200 },
];

export interface BarViewModel {
  label: string;
  value: number; // verbatim server value, used only for geometry
  display: string; // 2-decimal rendering
}

export interface IndexRowViewModel {
  framework: string;
  cells: { name: string; display: string }[];
}

export interface MetricTableViewModel {
  metric: string;
  variables: string[];
  rows: { framework: string; cells: string[] }[];
}

export interface PlotViewModel {
  variable: string;
  variables: string[];
  frameworkLabel: string;
  index: number[];
  truth: number[];
  prediction: number[];
}

export function buildBars(reports: IniReport[]): BarViewModel[] {
  return reports.map((report) => ({
    label: report.framework_label,
    value: report.ini,
    display: formatIndex(report.ini),
  }));
}

const INDEX_COLUMNS: ReadonlyArray<keyof Pick<
  IniReport,
  "e_sbr" | "e_art" | "e" | "c" | "a" | "ini"
>> = ["e_sbr", "e_art", "e", "c", "a", "ini"];

export function buildIndexRows(comparison: Comparison): IndexRowViewModel[] {
  return comparison.ranking.map((row) => ({
    framework: row.framework,
    cells: INDEX_COLUMNS.map((name) => ({
      name,
      display: formatIndex(row[name]),
    })),
  }));
}

export function buildMetricTable(table: ComparisonTable): MetricTableViewModel {
  return {
    metric: table.metric,
    variables: [...table.variables],
    rows: table.rows.map((row) => ({
      framework: row.framework,
      cells: row.values.map(formatMetric),
    })),
  };
}

export function buildPlot(series: PlotSeries): PlotViewModel {
  return {
    variable: series.variable,
    variables: [...series.variables],
    frameworkLabel: series.framework_label,
    index: [...series.index],
    truth: [...series.truth],
    prediction: [...series.prediction],
  };
}

export interface DashboardViewModel {
  bars: BarViewModel[];
  indexRows: IndexRowViewModel[];
  metricTables: MetricTableViewModel[];
}

export function buildDashboard(reports: IniReport[], comparison: Comparison): DashboardViewModel {
  return {
    bars: buildBars(reports),
    indexRows: buildIndexRows(comparison),
    metricTables: Object.values(comparison.tables).map(buildMetricTable),
  };
}

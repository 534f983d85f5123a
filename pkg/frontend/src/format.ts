/** Fixed-format rendering of server-sent values.
 *
 * These are the only transformations the UI applies to numbers: decimal
 * formatting for display. No index or metric is ever computed client-side.
 */

import type { CellValue } from "./types.js";

/** Indices (e_sbr, e_art, e, c, a, ini) render at 2 decimals. */
export function formatIndex(value: number): string {
  return value.toFixed(2);
}

/** Error metrics render at 4 decimals; undefined and infinite stay textual. */
export function formatMetric(value: CellValue): string {
  if (value === null) return "undefined";
  if (value === "inf") return "inf";
  if (value === "-inf") return "-inf";
  return value.toFixed(4);
}

/** Server-reported latency, one decimal, in seconds. */
export function formatLatency(seconds: number): string {
  return `${seconds.toFixed(1)} s`;
}

/** Elapsed-time ticker text shown while a prompt is in flight. The final
 * latency shown in the transcript always comes from the server payload. */
export function formatWaiting(elapsedSeconds: number): string {
  return `waiting… ${elapsedSeconds.toFixed(1)} s`;
}

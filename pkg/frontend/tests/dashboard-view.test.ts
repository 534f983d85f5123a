import { describe, expect, it } from "vitest";

import { ServiceClient } from "../src/api.js";
import { barChartSvg } from "../src/charts.js";
import {
  PRESET_WINDOWS,
  buildBars,
  buildMetricTable,
  buildPlot,
} from "../src/dashboard-view.js";
import type { ComparisonTable, IniReport, PlotSeries } from "../src/types.js";
import { StubService } from "./stub-service.js";

function iniReport(label: string, ini: number): IniReport {
  return {
    session_id: `${label}-session`,
    framework_label: label,
    e_sbr: 1,
    e_art: 0.5,
    e: 0.75,
    c: 0.59,
    a: 0.88,
    ini,
    artpq_s: 28.53,
    mape_av_pct: 11.76,
  };
}

// server-sent index values for the three reference sessions
const FIXTURE_REPORTS = [
  iniReport("GPT", 0.74),
  iniReport("OAI1", 0.6),
  iniReport("OAI3", 0.73),
];

describe("dashboard bars", () => {
  it("three fixture sessions read 0.74 / 0.60 / 0.73", () => {
    const bars = buildBars(FIXTURE_REPORTS);
    expect(bars.map((b) => b.display)).toEqual(["0.74", "0.60", "0.73"]);
    expect(bars.map((b) => b.label)).toEqual(["GPT", "OAI1", "OAI3"]);
  });

  it("bar values are the server values, not recomputed", () => {
    const bars = buildBars(FIXTURE_REPORTS);
    expect(bars.map((b) => b.value)).toEqual([0.74, 0.6, 0.73]);
  });

  it("the rendered chart carries the formatted labels", () => {
    const svg = barChartSvg(buildBars(FIXTURE_REPORTS));
    expect(svg).toContain(">0.74<");
    expect(svg).toContain(">0.60<");
    expect(svg).toContain(">0.73<");
    expect(svg).toContain(">GPT<");
  });
});

describe("metric tables", () => {
  const table: ComparisonTable = {
    metric: "mape_masked_pct",
    variables: ["temp", "hum", "windvel"],
    rows: [
      { framework: "LSTM-H", values: [1.1569, 1.1833, 36.4229] },
      { framework: "GPT", values: [0.9026, 1.0079, 33.3757] },
      { framework: "OAI1", values: ["inf", null, 36.0228] },
    ],
  };

  it("renders at four decimals with textual undefined and inf", () => {
    const vm = buildMetricTable(table);
    expect(vm.rows[0]?.cells).toEqual(["1.1569", "1.1833", "36.4229"]);
    expect(vm.rows[1]?.cells).toEqual(["0.9026", "1.0079", "33.3757"]);
    expect(vm.rows[2]?.cells).toEqual(["inf", "undefined", "36.0228"]);
  });

  it("keeps variables and framework order as served", () => {
    const vm = buildMetricTable(table);
    expect(vm.variables).toEqual(["temp", "hum", "windvel"]);
    expect(vm.rows.map((r) => r.framework)).toEqual(["LSTM-H", "GPT", "OAI1"]);
  });
});

describe("plots", () => {
  const series: PlotSeries = {
    session_id: "s1",
    framework_label: "GPT",
    variable: "temp",
    variables: ["temp", "hum", "windvel"],
    start_index: 100,
    index: [100, 101, 102],
    truth: [20.1, 20.2, 20.3],
    prediction: [20.0, 20.25, 20.31],
  };

  it("copies the series verbatim", () => {
    const vm = buildPlot(series);
    expect(vm.index).toEqual([100, 101, 102]);
    expect(vm.truth).toEqual([20.1, 20.2, 20.3]);
    expect(vm.prediction).toEqual([20.0, 20.25, 20.31]);
  });

  it("presets match the reference focus windows", () => {
    expect(PRESET_WINDOWS).toEqual([
      { start: 100, end: 200 },
      { start: 4100, end: 4200 },
    ]);
  });

  it("window change refetches only plot data", async () => {
    const plotBody = { ...series };
    const stub = new StubService({
      iniReports: { s1: iniReport("GPT", 0.74) },
      plots: { s1: plotBody },
    });
    const client = new ServiceClient("http://svc", stub.fetch);
    await client.getIni("s1");
    await client.getPlot("s1", "temp");
    const callsBefore = stub.calls.length;
    await client.getPlot("s1", "temp", { start: 100, end: 200 });
    const newCalls = stub.calls.slice(callsBefore);
    expect(newCalls).toHaveLength(1);
    expect(newCalls[0]?.path).toContain("/plots/s1");
    expect(newCalls[0]?.method).toBe("GET");
  });
});

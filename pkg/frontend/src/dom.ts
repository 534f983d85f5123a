/** Browser wiring: renders the session console and the dashboard into the page. */

import { ApiError, ServiceClient } from "./api.js";
import { barChartSvg, linePlotSvg } from "./charts.js";
import { SessionConsole } from "./console-view.js";
import {
  PRESET_WINDOWS,
  buildBars,
  buildIndexRows,
  buildMetricTable,
  buildPlot,
} from "./dashboard-view.js";
import { formatIndex, formatLatency, formatWaiting } from "./format.js";
import type { IniReport, OutcomeTag } from "./types.js";
import { OUTCOME_TAGS } from "./types.js";

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  attrs: Record<string, string> = {},
  text = "",
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  for (const [key, value] of Object.entries(attrs)) node.setAttribute(key, value);
  if (text) node.textContent = text;
  return node;
}

function byId(id: string): HTMLElement {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node;
}

export function mountApp(root: HTMLElement, serviceUrl: string): void {
  const client = new ServiceClient(serviceUrl);
  root.innerHTML = `
    <section id="session-section">
      <h2>Live session</h2>
      <form id="open-form">
        <input id="framework" placeholder="framework label" value="GPT" />
        <input id="task" placeholder="task label" value="lstm-weather" />
        <button type="submit">open session</button>
      </form>
      <div id="console" hidden>
        <div id="counters"></div>
        <div id="transcript"></div>
        <div id="status-line"></div>
        <form id="prompt-form">
          <textarea id="prompt" rows="3" placeholder="type the next prompt"></textarea>
          <label><input type="checkbox" id="new-attempt" checked /> new attempt</label>
          <button type="submit" id="send">send</button>
        </form>
        <div id="tags"></div>
        <div id="evaluation-panel" hidden>
          <h3>Evaluation</h3>
          <p>Outcome accepted. Upload predictions via the service or CLI, then add
             this session id to the dashboard below.</p>
          <code id="session-id-echo"></code>
        </div>
      </div>
    </section>
    <section id="dashboard-section">
      <h2>Dashboard</h2>
      <form id="compare-form">
        <input id="ids" placeholder="session ids, comma separated" size="60" />
        <button type="submit">load</button>
      </form>
      <div id="bars"></div>
      <div id="index-table"></div>
      <div id="metric-tables"></div>
      <div id="plot-controls"></div>
      <div id="plot"></div>
    </section>
  `;

  let sessionConsole: SessionConsole | null = null;
  let waitingTimer: number | null = null;

  const renderConsole = () => {
    if (!sessionConsole) return;
    const vm = sessionConsole.viewModel();
    byId("console").hidden = false;
    byId("counters").textContent =
      `Q ${vm.counters.attemptsQ}  ·  N ${vm.counters.totalQueriesN}  ·  SB ${vm.counters.sbCount}` +
      (vm.gauges.e !== null ? `  ·  E ${formatIndex(vm.gauges.e)}` : "") +
      (vm.gauges.c !== null ? `  ·  C ${formatIndex(vm.gauges.c)}` : "");
    const transcript = byId("transcript");
    transcript.innerHTML = "";
    for (const entry of vm.transcript) {
      const item = el("div", { class: "entry" });
      item.appendChild(el("p", { class: "prompt" }, `> ${entry.prompt}`));
      if (entry.status === "answer") {
        item.appendChild(el("pre", { class: "response" }, entry.response ?? ""));
      } else {
        item.appendChild(el("p", { class: "busy-badge" }, "server busy"));
      }
      item.appendChild(
        el("p", { class: "meta" }, `${formatLatency(entry.latencyS)}${entry.tag ? "  ·  " + entry.tag : ""}`),
      );
      transcript.appendChild(item);
    }
    (byId("send") as HTMLButtonElement).disabled = !vm.canPrompt;
    (byId("prompt") as HTMLTextAreaElement).disabled = !vm.canPrompt;
    const tags = byId("tags");
    tags.innerHTML = "";
    if (vm.canTag) {
      for (const tag of OUTCOME_TAGS) {
        const button = el("button", { type: "button" }, tag);
        button.addEventListener("click", () => {
          void sessionConsole?.tag(tag as OutcomeTag).then(renderConsole);
        });
        tags.appendChild(button);
      }
    }
    byId("evaluation-panel").hidden = !vm.showEvaluationPanel;
    byId("session-id-echo").textContent = sessionConsole.sessionId;
    byId("status-line").textContent = vm.busyBadge ? "last query returned server-busy" : "";
  };

  byId("open-form").addEventListener("submit", (event) => {
    event.preventDefault();
    const framework = (byId("framework") as HTMLInputElement).value.trim();
    const task = (byId("task") as HTMLInputElement).value.trim();
    void client
      .createSession(framework, task)
      .then(({ session_id }) => {
        sessionConsole = new SessionConsole(client, session_id);
        renderConsole();
      })
      .catch(showError);
  });

  byId("prompt-form").addEventListener("submit", (event) => {
    event.preventDefault();
    if (!sessionConsole) return;
    const promptBox = byId("prompt") as HTMLTextAreaElement;
    const text = promptBox.value.trim();
    if (!text) return;
    const newAttempt = (byId("new-attempt") as HTMLInputElement).checked;
    const started = performance.now();
    const statusLine = byId("status-line");
    waitingTimer = window.setInterval(() => {
      statusLine.textContent = formatWaiting((performance.now() - started) / 1000);
    }, 100);
    (byId("send") as HTMLButtonElement).disabled = true;
    void sessionConsole
      .sendPrompt(text, newAttempt)
      .then(() => {
        promptBox.value = "";
      })
      .catch(showError)
      .finally(() => {
        if (waitingTimer !== null) window.clearInterval(waitingTimer);
        statusLine.textContent = "";
        renderConsole();
      });
  });

  let dashboardIds: string[] = [];
  let plotVariable = "";
  let plotWindow: { start: number; end: number } | null = null;

  const renderPlot = () => {
    const first = dashboardIds[0];
    if (!first) return;
    void client
      .getPlot(first, plotVariable || undefined, plotWindow ?? undefined)
      .then((series) => {
        const vm = buildPlot(series);
        plotVariable = vm.variable;
        const controls = byId("plot-controls");
        controls.innerHTML = "";
        for (const variable of vm.variables) {
          const button = el("button", { type: "button" }, variable);
          button.addEventListener("click", () => {
            plotVariable = variable;
            renderPlot(); // window change refetches plot data only
          });
          controls.appendChild(button);
        }
        const fullButton = el("button", { type: "button" }, "full range");
        fullButton.addEventListener("click", () => {
          plotWindow = null;
          renderPlot();
        });
        controls.appendChild(fullButton);
        for (const preset of PRESET_WINDOWS) {
          const button = el("button", { type: "button" }, `${preset.start}–${preset.end}`);
          button.addEventListener("click", () => {
            plotWindow = preset;
            renderPlot();
          });
          controls.appendChild(button);
        }
        byId("plot").innerHTML = linePlotSvg([
          { label: "truth", index: vm.index, values: vm.truth, color: "#222" },
          { label: vm.frameworkLabel, index: vm.index, values: vm.prediction },
        ]);
      })
      .catch(showError);
  };

  byId("compare-form").addEventListener("submit", (event) => {
    event.preventDefault();
    dashboardIds = (byId("ids") as HTMLInputElement).value
      .split(",")
      .map((part) => part.trim())
      .filter(Boolean);
    if (dashboardIds.length === 0) {
      byId("bars").textContent = "no sessions selected";
      return;
    }
    void Promise.all(dashboardIds.map((id) => client.getIni(id)))
      .then(async (reports: IniReport[]) => {
        byId("bars").innerHTML = barChartSvg(buildBars(reports));
        const comparison = await client.compare(dashboardIds);
        const indexRows = buildIndexRows(comparison);
        const table = el("table");
        const head = el("tr");
        head.appendChild(el("th", {}, "framework"));
        for (const cell of indexRows[0]?.cells ?? []) head.appendChild(el("th", {}, cell.name));
        table.appendChild(head);
        for (const row of indexRows) {
          const tr = el("tr");
          tr.appendChild(el("td", {}, row.framework));
          for (const cell of row.cells) tr.appendChild(el("td", {}, cell.display));
          table.appendChild(tr);
        }
        const indexTable = byId("index-table");
        indexTable.innerHTML = "";
        indexTable.appendChild(table);

        const tablesDiv = byId("metric-tables");
        tablesDiv.innerHTML = "";
        for (const metricTable of Object.values(comparison.tables)) {
          const vm = buildMetricTable(metricTable);
          tablesDiv.appendChild(el("h4", {}, vm.metric));
          const mt = el("table");
          const mh = el("tr");
          mh.appendChild(el("th", {}, "framework"));
          for (const variable of vm.variables) mh.appendChild(el("th", {}, variable));
          mt.appendChild(mh);
          for (const row of vm.rows) {
            const tr = el("tr");
            tr.appendChild(el("td", {}, row.framework));
            for (const cell of row.cells) tr.appendChild(el("td", {}, cell));
            mt.appendChild(tr);
          }
          tablesDiv.appendChild(mt);
        }
        renderPlot();
      })
      .catch(showError);
  });

  function showError(error: unknown): void {
    const line = byId("status-line");
    if (error instanceof ApiError) {
      line.textContent = `${error.code}: ${error.message}`;
    } else {
      line.textContent = String(error);
    }
  }
}

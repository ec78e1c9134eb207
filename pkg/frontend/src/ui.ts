// DOM rendering. All numbers shown come straight from service response
// fields through the formatters; nothing is recomputed here.

import type { BoardController } from "./board.js";
import { formatDelta, formatF1, formatPercent, heatColor } from "./format.js";
import { ATTRIBUTES, BUCKETS, METHODS } from "./types.js";
import type { CombineResponse, HistoryEntry, Method } from "./types.js";

type Attrs = Record<string, string | boolean | ((e: Event) => void) | null>;

export function el(
  tag: string,
  attrs: Attrs = {},
  ...children: Array<string | Node | null>
): HTMLElement {
  const node = document.createElement(tag);
  for (const [key, value] of Object.entries(attrs)) {
    if (value == null || value === false) continue;
    if (key === "className" && typeof value === "string") node.className = value;
    else if (key.startsWith("on") && typeof value === "function")
      node.addEventListener(key.slice(2).toLowerCase(), value as EventListener);
    else if (value === true) node.setAttribute(key, "");
    else node.setAttribute(key, String(value));
  }
  for (const child of children) {
    if (typeof child === "string") node.appendChild(document.createTextNode(child));
    else if (child) node.appendChild(child);
  }
  return node;
}

export interface View {
  refresh(): void;
  showResult(response: CombineResponse): void;
  showError(message: string, retry?: () => void): void;
}

export function mountApp(root: HTMLElement, board: BoardController): View {
  const banner = el("div", { className: "banner hidden" });
  const tableBox = el("div", { className: "panel" });
  const controls = el("div", { className: "panel controls" });
  const resultBox = el("div", { className: "panel result" });
  const historyBox = el("div", { className: "panel history" });
  root.replaceChildren(
    el("h1", {}, "Combination board"),
    el("p", { className: "tagline" },
       "Pick base systems (or a rank interval), pick a combiner, and see ",
       "whether the combination beats the best single system."),
    banner, tableBox, controls, resultBox, historyBox,
  );

  let lastResponse: CombineResponse | null = null;

  function showError(message: string, retry?: () => void): void {
    banner.className = "banner error";
    const children: Node[] = [el("span", {}, message)];
    if (retry) children.push(el("button", { onclick: () => retry() }, "retry"));
    banner.replaceChildren(...children);
  }

  function clearError(): void {
    banner.className = "banner hidden";
    banner.replaceChildren();
  }

  async function submit(run: () => Promise<unknown>): Promise<void> {
    clearError();
    try {
      const outcome = (await run()) as Awaited<ReturnType<BoardController["submit"]>>;
      if (outcome) showResult(outcome.response);
    } catch (err) {
      showError(err instanceof Error ? err.message : String(err));
    }
    refresh();
  }

  function renderTable(): void {
    const chips = board.chipExpressions().map((expr) =>
      el("button", {
        className: "chip",
        onclick: () => {
          board.selectChip(expr);
          refresh();
        },
      }, expr),
    );
    const rows = board.systems.map((s) =>
      el("tr", {},
        el("td", {},
          el("input", {
            type: "checkbox",
            checked: board.selected.has(s.name),
            onclick: () => {
              board.toggleSystem(s.name);
              refresh();
            },
          }),
        ),
        el("td", {}, String(s.rank)),
        el("td", { className: "name" }, s.name),
        el("td", { className: "num" }, formatF1(s.overall_f1)),
      ),
    );
    tableBox.replaceChildren(
      el("div", { className: "chips" }, "rank intervals: ", ...chips),
      el("table", {},
        el("thead", {},
          el("tr", {},
            el("th", {}, ""), el("th", {}, "rank"),
            el("th", {}, "system"), el("th", {}, "F1"),
          ),
        ),
        el("tbody", {}, ...rows),
      ),
    );
  }

  function renderControls(): void {
    const methodButtons = METHODS.map((method) =>
      el("button", {
        className: board.method === method ? "method active" : "method",
        onclick: () => {
          board.setMethod(method as Method);
          refresh();
        },
      }, method),
    );
    controls.replaceChildren(
      el("div", { className: "methods" }, "combiner: ", ...methodButtons),
      el("button", {
        className: "submit",
        disabled: board.submitDisabled,
        onclick: () => void submit(() => board.submit()),
      }, board.busy ? "combining..." : "combine"),
      el("span", { className: "hint" },
         board.selected.size === 0
           ? "select at least one system"
           : `${board.selected.size} selected`),
    );
  }

  function renderHeatmaps(response: CombineResponse): HTMLElement {
    const grids = ATTRIBUTES.map((attr) => {
      const buckets = response.report.buckets[attr] ?? {};
      const cells = BUCKETS.map((bucket) => {
        const score = buckets[bucket];
        const f1 = score?.f1 ?? null;
        return el("td", {
          className: "cell",
          style: `background:${heatColor(f1 === null ? 0 : f1 - board.bestSingleF1)}`,
          title: score
            ? `${attr}/${bucket}: gold ${score.gold}, predicted ${score.predicted}`
            : "",
        }, f1 === null ? "-" : formatF1(f1));
      });
      return el("table", { className: "heatmap" },
        el("caption", {}, attr),
        el("thead", {}, el("tr", {}, ...BUCKETS.map((b) => el("th", {}, b)))),
        el("tbody", {}, el("tr", {}, ...cells)),
      );
    });
    return el("div", { className: "heatmaps" }, ...grids);
  }

  function showResult(response: CombineResponse): void {
    try {
      renderResult(response);
      lastResponse = response;
    } catch (err) {
      // malformed response: error card instead of a crash
      lastResponse = null;
      resultBox.replaceChildren(
        el("div", { className: "banner error" },
           "malformed combine response: "
           + (err instanceof Error ? err.message : String(err))),
      );
    }
    renderHistory();
  }

  function renderResult(response: CombineResponse): void {
    const report = response.report;
    const delta = report.overall.f1 - board.bestSingleF1;
    const perClass = Object.entries(report.per_class).map(([label, s]) =>
      el("tr", {},
        el("td", {}, label),
        el("td", { className: "num" }, formatPercent(s.precision)),
        el("td", { className: "num" }, formatPercent(s.recall)),
        el("td", { className: "num" }, formatF1(s.f1)),
        el("td", { className: "num" }, String(s.gold)),
      ),
    );
    resultBox.replaceChildren(
      el("div", { className: "scorecard" },
        el("div", { className: "headline" },
          el("span", { className: "big" }, formatF1(report.overall.f1)),
          el("span", {
            className: delta >= 0 ? "delta up" : "delta down",
            title: "difference against the best single system",
          }, `${formatDelta(delta)} vs best single`),
        ),
        el("div", { className: "sub" },
           `${report.method} over ${report.systems.join(", ")} · `
           + `${response.elapsed_seconds.toFixed(2)}s`),
      ),
      el("table", { className: "per-class" },
        el("thead", {},
          el("tr", {},
            el("th", {}, "class"), el("th", {}, "P"), el("th", {}, "R"),
            el("th", {}, "F1"), el("th", {}, "gold"),
          ),
        ),
        el("tbody", {}, ...perClass),
      ),
      renderHeatmaps(response),
    );
  }

  function renderHistory(): void {
    const rows = [...board.history].reverse().map((entry: HistoryEntry) =>
      el("tr", {},
        el("td", {}, new Date(entry.timestamp).toLocaleTimeString()),
        el("td", {}, entry.method),
        el("td", { className: "name" }, entry.systems.join(", ")),
        el("td", { className: "num" }, formatF1(entry.overallF1)),
        el("td", { className: "num" }, formatDelta(entry.deltaVsBest)),
        el("td", {},
          el("button", {
            onclick: () => void submit(() => board.replay(entry.id)),
          }, "replay"),
        ),
      ),
    );
    historyBox.replaceChildren(
      el("h2", {}, "session history"),
      rows.length === 0
        ? el("p", { className: "hint" }, "no combinations tried yet")
        : el("table", {},
            el("thead", {},
              el("tr", {},
                el("th", {}, "time"), el("th", {}, "method"),
                el("th", {}, "systems"), el("th", {}, "F1"),
                el("th", {}, "delta"), el("th", {}, ""),
              ),
            ),
            el("tbody", {}, ...rows),
          ),
    );
  }

  function refresh(): void {
    renderTable();
    renderControls();
    if (lastResponse) showResult(lastResponse); // also re-renders history
    else renderHistory();
  }

  return { refresh, showResult, showError };
}

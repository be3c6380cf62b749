// Wires one finished session into the page: projection grid, linked
// brushing, hover tooltip, ranking table, confusion filter and the local
// what-if card list. Kept separate from the boot script so the whole
// assembly can run against a mocked API.

import { ApiError, type ExplorerApi } from "./api.js";
import { WhatifCard } from "./cards.js";
import { CONFUSION_COLORS } from "./colors.js";
import { el, clear } from "./dom.js";
import { ProjectionGrid } from "./grid.js";
import { ViewState } from "./state.js";
import { Tooltip } from "./tooltip.js";
import type { ColorScheme, ConfusionCategory, ProjectionsDoc, RankingDoc } from "./types.js";

export interface ExplorerHandles {
  state: ViewState;
  grid: ProjectionGrid;
  tooltip: Tooltip;
  cards: Map<number, WhatifCard>;
  cardsHost: HTMLElement;
  /** Brush path used by every cell: extend selection, highlight everywhere,
      fetch details and open cards for ids that have none yet. */
  brush(ids: number[]): Promise<void>;
  /** Confusion-filter path: open a card without touching the brush set. */
  addCardByIndex(index: number): Promise<void>;
}

export function renderFailure(root: HTMLElement, err: unknown): void {
  clear(root);
  const box = el("div", { class: "failure-state" });
  if (err instanceof ApiError) {
    box.appendChild(el("strong", {}, err.code));
    box.appendChild(el("span", {}, ` ${err.message}`));
  } else {
    box.appendChild(el("span", {}, String(err)));
  }
  root.appendChild(box);
}

export async function startExplorer(
  root: HTMLElement,
  api: ExplorerApi,
  sessionId: string,
): Promise<ExplorerHandles> {
  let ranking: RankingDoc;
  let projections: ProjectionsDoc;
  try {
    [ranking, projections] = await Promise.all([
      api.ranking(sessionId),
      api.projections(sessionId),
    ]);
  } catch (err) {
    renderFailure(root, err);
    throw err;
  }

  const overlay = projections.samples;
  const state = new ViewState(sessionId, overlay.labels.length);
  const rankedMethods = ranking.table.methods;
  const tooltip = new Tooltip(api, sessionId);

  clear(root);
  const toolbar = el("div", { class: "toolbar" });
  toolbar.appendChild(el("span", { class: "session-label" }, `session ${sessionId}`));
  for (const scheme of ["labels", "predictions", "confusion"] as ColorScheme[]) {
    const lab = el("label", { class: "scheme-choice" });
    const radio = el("input", { type: "radio", name: "scheme", value: scheme });
    if (scheme === state.colorScheme) radio.setAttribute("checked", "");
    radio.addEventListener("change", () => state.setScheme(scheme));
    lab.appendChild(radio);
    lab.appendChild(el("span", {}, scheme));
    toolbar.appendChild(lab);
  }
  root.appendChild(toolbar);

  const gridHost = el("div", { class: "grid-host" });
  root.appendChild(gridHost);

  const grid = new ProjectionGrid(gridHost, projections, rankedMethods, state, {
    onBrush: (ids) => void handles.brush(ids),
    onHover: (index, ev) => {
      if (index === null) {
        state.setHovered([]);
        tooltip.hide();
        grid.highlight(state.brushed);
      } else {
        state.setHovered([index]);
        void tooltip.show(index, ev);
        grid.highlight(new Set([...state.brushed, index]));
      }
    },
  });

  root.appendChild(renderRankingTable(ranking));

  const filter = el("div", { class: "confusion-filter" });
  const filterList = el("div", { class: "filter-list" });
  for (const cat of ["TP", "TN", "FP", "FN"] as ConfusionCategory[]) {
    const count = overlay.confusion.filter((c) => c === cat).length;
    const b = el("button", { class: "filter-btn", "data-cat": cat }, `${cat} (${count})`);
    b.style.borderColor = CONFUSION_COLORS[cat];
    b.addEventListener("click", () => void showFilterList(cat));
    filter.appendChild(b);
  }
  filter.appendChild(filterList);
  root.appendChild(filter);

  const cardsHost = el("div", { class: "cards-host" });
  root.appendChild(cardsHost);

  const cards = new Map<number, WhatifCard>();
  const deps = { api, state, methods: rankedMethods, grid };
  state.on("cards", () => {
    const alive = new Set(state.cards.map((c) => c.id));
    for (const [id, view] of cards) {
      if (!alive.has(id)) {
        view.root.remove();
        cards.delete(id);
      }
    }
    for (const card of state.cards) {
      if (cards.has(card.id)) continue;
      const view = new WhatifCard(card, deps);
      cards.set(card.id, view);
      cardsHost.appendChild(view.root);
    }
  });
  state.on("scheme", () => grid.applyColors(state.colorScheme));

  const handles: ExplorerHandles = {
    state,
    grid,
    tooltip,
    cards,
    cardsHost,
    async brush(ids: number[]): Promise<void> {
      const fresh = state.brush(ids);
      grid.highlight(state.brushed);
      const details = await Promise.all(fresh.map((i) => api.sample(sessionId, i)));
      for (const d of details) state.addCard(d, rankedMethods[0] ?? "saliency");
    },
    async addCardByIndex(index: number): Promise<void> {
      if (state.cards.some((c) => c.sampleIndex === index)) return;
      const d = await api.sample(sessionId, index);
      state.addCard(d, rankedMethods[0] ?? "saliency");
    },
  };

  async function showFilterList(cat: ConfusionCategory): Promise<void> {
    clear(filterList);
    const indices: number[] = [];
    overlay.confusion.forEach((c, i) => {
      if (c === cat) indices.push(i);
    });
    const shown = indices.slice(0, 25);
    // per-sample attribution spread of the best-ranked method, fetched lazily
    const details = await Promise.all(shown.map((i) => api.sample(sessionId, i)));
    details.forEach((d) => {
      const row = el("div", { class: "filter-row" });
      const block = d.attributions[rankedMethods[0]];
      row.appendChild(el("span", {}, `#${d.index} label ${d.label} pred ${d.pred}`));
      if (block) row.appendChild(el("span", { class: "filter-std" }, `std ${block.std.toFixed(4)}`));
      const add = el("button", { class: "filter-add" }, "card");
      add.addEventListener("click", () => void handles.addCardByIndex(d.index));
      row.appendChild(add);
      filterList.appendChild(row);
    });
    if (indices.length > shown.length) {
      filterList.appendChild(
        el("div", { class: "filter-more" }, `${indices.length - shown.length} more not shown`),
      );
    }
  }

  return handles;
}

function renderRankingTable(ranking: RankingDoc): HTMLElement {
  const t = ranking.table;
  const wrap = el("div", { class: "ranking-panel" });
  wrap.appendChild(el("h3", {}, "attribution ranking"));
  const table = el("table", { class: "ranking-table" });
  const head = el("tr", {});
  head.appendChild(el("th", {}, "method"));
  for (const c of t.columns) head.appendChild(el("th", {}, c));
  head.appendChild(el("th", {}, "mean drop"));
  head.appendChild(el("th", {}, "beats random"));
  table.appendChild(head);
  for (const m of t.methods) {
    const row = el("tr", { "data-method": m });
    row.appendChild(el("td", {}, m));
    for (const c of t.columns) {
      const v = t.cells[m]?.[c];
      row.appendChild(el("td", {}, v === null || v === undefined ? "" : v.toFixed(4)));
    }
    row.appendChild(el("td", {}, t.mean_drop[m]?.toFixed(4) ?? ""));
    const br = t.beats_random[m];
    row.appendChild(el("td", {}, br === null || br === undefined ? "" : String(br)));
    table.appendChild(row);
  }
  wrap.appendChild(table);
  return wrap;
}

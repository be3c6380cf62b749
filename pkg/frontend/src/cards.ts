// Local what-if card: one sample, its attribution heatmap line chart, edit
// tools that accumulate EditOps, a Predict round trip, counterfactual
// variants and reprojection into the global grid. The card displays server
// numbers verbatim; edits are only collected here, never applied locally.

import { ApiError, type ExplorerApi } from "./api.js";
import { attributionColor, l2Unit } from "./colors.js";
import { el, svgEl, clear } from "./dom.js";
import type { ProjectionGrid } from "./grid.js";
import type { Card, ViewState } from "./state.js";
import type { EditOp, RegionOpName, UncertaintyDoc } from "./types.js";

const W = 320;
const H = 120;
const PLOT = { x0: 4, x1: 316, y0: 8, y1: 104 };

export interface CardDeps {
  api: ExplorerApi;
  state: ViewState;
  methods: string[];
  grid: ProjectionGrid | null;
}

export class WhatifCard {
  readonly root: HTMLElement;
  private chart!: SVGElement;
  private probsBox!: HTMLElement;
  private cfBox!: HTMLElement;
  private editsBox!: HTMLElement;
  private errorBox!: HTMLElement;
  private stdBox!: HTMLElement;
  private pending: AbortController | null = null;

  constructor(
    readonly card: Card,
    private readonly deps: CardDeps,
  ) {
    this.root = el("article", { class: "whatif-card", "data-card": String(card.id) });
    this.build();
    this.renderAll();
  }

  private build(): void {
    const d = this.card.detail;
    const head = el("header", { class: "card-head" });
    head.appendChild(el("strong", {}, `#${d.index}`));
    head.appendChild(
      el(
        "span",
        { class: "card-meta" },
        `label ${d.label}  pred ${d.pred}` + (d.confusion ? `  ${d.confusion}` : ""),
      ),
    );
    this.stdBox = el("span", { class: "card-std" });
    head.appendChild(this.stdBox);
    const close = el("button", { class: "card-close", title: "remove card" }, "x");
    close.addEventListener("click", () => this.deps.state.removeCard(this.card.id));
    head.appendChild(close);
    this.root.appendChild(head);

    const tools = el("div", { class: "card-tools" });
    const methodSel = el("select", { class: "method-select" });
    for (const m of this.deps.methods) {
      const opt = el("option", { value: m }, m);
      if (m === this.card.tool.method) opt.setAttribute("selected", "");
      methodSel.appendChild(opt);
    }
    methodSel.addEventListener("change", () => {
      this.card.tool.method = (methodSel as HTMLSelectElement).value;
      this.renderAll();
    });
    tools.appendChild(methodSel);

    const radius = el("input", {
      type: "range",
      min: "0",
      max: "20",
      value: String(this.card.tool.radius),
      class: "radius-slider",
      title: "drag smoothing radius",
    });
    radius.addEventListener("input", () => {
      this.card.tool.radius = Number((radius as HTMLInputElement).value);
    });
    tools.appendChild(radius);

    const actmax = el("button", { class: "actmax-toggle" }, "actmax");
    actmax.addEventListener("click", () => {
      this.card.tool.showActmax = !this.card.tool.showActmax;
      actmax.classList.toggle("on", this.card.tool.showActmax);
      this.renderChart();
    });
    tools.appendChild(actmax);
    this.root.appendChild(tools);

    this.chart = svgEl("svg", { viewBox: `0 0 ${W} ${H}`, class: "card-chart" });
    this.wireChartMouse();
    this.root.appendChild(this.chart);

    this.editsBox = el("div", { class: "card-edits" });
    this.root.appendChild(this.editsBox);

    const regionMenu = el("div", { class: "region-menu" });
    const ops: [RegionOpName, string][] = [
      ["global_mean", "global mean"],
      ["local_mean", "local mean"],
      ["inverse", "inverse"],
      ["actmax", "actmax"],
      ["moving_avg", "moving avg"],
      ["exp_smooth", "exp smooth"],
    ];
    const kInput = el("input", { type: "number", value: "3", min: "1", class: "k-input", title: "window" });
    const alphaInput = el("input", {
      type: "number",
      value: "0.5",
      step: "0.1",
      min: "0.01",
      max: "1",
      class: "alpha-input",
      title: "alpha",
    });
    for (const [op, label] of ops) {
      const b = el("button", { "data-op": op }, label);
      b.addEventListener("click", () => {
        const extra: { k?: number; alpha?: number; target_class?: number } = {};
        if (op === "moving_avg") extra.k = Number((kInput as HTMLInputElement).value);
        if (op === "exp_smooth") extra.alpha = Number((alphaInput as HTMLInputElement).value);
        if (op === "actmax") extra.target_class = this.card.detail.pred;
        this.issueRegion(op, extra);
      });
      regionMenu.appendChild(b);
    }
    regionMenu.appendChild(kInput);
    regionMenu.appendChild(alphaInput);
    this.root.appendChild(regionMenu);

    const actions = el("div", { class: "card-actions" });
    const predict = el("button", { class: "predict-btn" }, "Predict");
    predict.addEventListener("click", () => void this.predict());
    actions.appendChild(predict);

    const cfSel = el("select", { class: "cf-select" });
    cfSel.appendChild(el("option", { value: "native" }, "native"));
    cfSel.appendChild(el("option", { value: "wachter" }, "wachter"));
    actions.appendChild(cfSel);
    const cfBtn = el("button", { class: "cf-btn" }, "Counterfactual");
    cfBtn.addEventListener("click", () =>
      void this.counterfactual((cfSel as HTMLSelectElement).value as "native" | "wachter"),
    );
    actions.appendChild(cfBtn);

    const reproject = el("button", { class: "reproject-btn" }, "Reproject");
    reproject.addEventListener("click", () => this.reproject());
    actions.appendChild(reproject);
    this.root.appendChild(actions);

    this.errorBox = el("div", { class: "card-error", hidden: "" });
    this.root.appendChild(this.errorBox);
    this.probsBox = el("div", { class: "card-probs" });
    this.root.appendChild(this.probsBox);
    this.cfBox = el("div", { class: "card-cf" });
    this.root.appendChild(this.cfBox);
  }

  // -- edit issuing ---------------------------------------------------------

  /** Record a drag edit at point t towards `value` with the current radius. */
  issueDrag(t: number, value: number): void {
    const edit: EditOp = { kind: "drag", t, value, radius: this.card.tool.radius };
    this.card.edits.push(edit);
    this.renderEdits();
    this.renderChart();
  }

  setRegion(a: number, b: number): void {
    const lo = Math.max(0, Math.min(a, b));
    const hi = Math.min(this.card.detail.series.length - 1, Math.max(a, b));
    this.card.tool.region = [lo, hi];
    this.renderChart();
  }

  /** Record a region edit over the current brushed range. */
  issueRegion(op: RegionOpName, extra: { k?: number; alpha?: number; target_class?: number } = {}): void {
    const region = this.card.tool.region;
    if (!region) {
      this.showError("NoRegion", "brush a region on the chart first");
      return;
    }
    const edit: EditOp = { kind: "region", a: region[0], b: region[1], op, ...extra };
    this.card.edits.push(edit);
    this.renderEdits();
    this.renderChart();
  }

  clearEdits(): void {
    this.card.edits.length = 0;
    this.card.result = null;
    this.renderAll();
  }

  // -- server round trips ---------------------------------------------------

  /** POST the accumulated edits; the request body is exactly the issued ops. */
  async predict(): Promise<void> {
    this.pending?.abort();
    const ctrl = new AbortController();
    this.pending = ctrl;
    this.clearError();
    try {
      const resp = await this.deps.api.whatif(
        this.deps.state.sessionId,
        { base: this.card.sampleIndex, edits: this.card.edits },
        ctrl.signal,
      );
      if (ctrl !== this.pending) return; // superseded by a newer click
      this.card.result = resp;
      this.renderAll();
    } catch (err) {
      if (ctrl !== this.pending) return;
      this.surface(err);
    }
  }

  async counterfactual(method: "native" | "wachter"): Promise<void> {
    this.clearError();
    try {
      const resp = await this.deps.api.counterfactual(this.deps.state.sessionId, {
        idx: this.card.sampleIndex,
        method,
      });
      this.card.cf = resp.counterfactual;
      this.card.cfCoords = resp.coords;
      this.renderAll();
    } catch (err) {
      this.surface(err);
    }
  }

  /** Marker plus origin line in every visible cell, for the edited variant
      and the counterfactual when present. Returns markers drawn. */
  reproject(): number {
    const grid = this.deps.grid;
    if (!grid) return 0;
    const tag = `card${this.card.id}`;
    grid.clearProjections(tag);
    let n = 0;
    if (this.card.result) n += grid.addProjection(this.card.result.coords, this.card.sampleIndex, tag);
    if (this.card.cfCoords) n += grid.addProjection(this.card.cfCoords, this.card.sampleIndex, tag);
    return n;
  }

  private surface(err: unknown): void {
    if (err instanceof ApiError) this.showError(err.code, err.message);
    else this.showError("Error", String(err));
  }

  private showError(code: string, message: string): void {
    this.errorBox.textContent = `${code}: ${message}`;
    this.errorBox.removeAttribute("hidden");
  }

  private clearError(): void {
    this.errorBox.textContent = "";
    this.errorBox.setAttribute("hidden", "");
  }

  // -- rendering ------------------------------------------------------------

  private renderAll(): void {
    this.renderChart();
    this.renderEdits();
    this.renderProbs();
    this.renderCf();
    const block = this.card.detail.attributions[this.card.tool.method];
    this.stdBox.textContent = block ? `attr std ${block.std.toFixed(4)}` : "";
  }

  private xAt(i: number, T: number): number {
    return PLOT.x0 + (T < 2 ? 0 : (i / (T - 1)) * (PLOT.x1 - PLOT.x0));
  }

  private renderChart(): void {
    clear(this.chart);
    const d = this.card.detail;
    const T = d.series.length;
    const traces: number[][] = [d.series];
    if (this.card.result) traces.push(this.card.result.series);
    if (this.card.cf) traces.push(this.card.cf.series);
    if (this.card.tool.showActmax) traces.push(d.actmax);
    const dragValues = this.card.edits.filter((e) => e.kind === "drag").map((e) => (e as { value: number }).value);
    let lo = Math.min(...traces.flat(), ...(dragValues.length ? dragValues : [Infinity]));
    let hi = Math.max(...traces.flat(), ...(dragValues.length ? dragValues : [-Infinity]));
    if (lo === hi) {
      lo -= 1;
      hi += 1;
    }
    const yAt = (v: number): number => PLOT.y1 - ((v - lo) / (hi - lo)) * (PLOT.y1 - PLOT.y0);

    // heatmap background from the selected method, unit-L2 color scale
    const attrSource = this.card.result
      ? this.card.result.attributions[this.card.tool.method]?.values
      : d.attributions[this.card.tool.method]?.values;
    if (attrSource) {
      const unit = l2Unit(attrSource);
      const bg = svgEl("g", { class: "attr-heatmap" });
      const bw = (PLOT.x1 - PLOT.x0) / T;
      unit.forEach((v, i) => {
        bg.appendChild(
          svgEl("rect", {
            x: r2(PLOT.x0 + i * bw),
            y: PLOT.y0,
            width: r2(bw + 0.1),
            height: PLOT.y1 - PLOT.y0,
            fill: attributionColor(v),
            "data-i": i,
          }),
        );
      });
      this.chart.appendChild(bg);
    }

    if (this.card.tool.region) {
      const [a, b] = this.card.tool.region;
      this.chart.appendChild(
        svgEl("rect", {
          class: "region-band",
          x: r2(this.xAt(a, T)),
          y: PLOT.y0,
          width: r2(this.xAt(b, T) - this.xAt(a, T) || 2),
          height: PLOT.y1 - PLOT.y0,
        }),
      );
    }

    // counterfactual difference band: mark the changed points
    if (this.card.cf) {
      const g = svgEl("g", { class: "cf-diff" });
      const bw = (PLOT.x1 - PLOT.x0) / T;
      this.card.cf.changed_mask.forEach((on, i) => {
        if (!on) return;
        g.appendChild(
          svgEl("rect", {
            x: r2(PLOT.x0 + i * bw),
            y: PLOT.y1 + 2,
            width: r2(bw + 0.1),
            height: 4,
          }),
        );
      });
      this.chart.appendChild(g);
    }

    const line = (values: number[], cls: string): SVGElement =>
      svgEl("polyline", {
        class: cls,
        fill: "none",
        points: values.map((v, i) => `${r2(this.xAt(i, T))},${r2(yAt(v))}`).join(" "),
      });
    this.chart.appendChild(line(d.series, "trace-base"));
    if (this.card.tool.showActmax) this.chart.appendChild(line(d.actmax, "trace-actmax"));
    if (this.card.result) this.chart.appendChild(line(this.card.result.series, "trace-edit"));
    if (this.card.cf) this.chart.appendChild(line(this.card.cf.series, "trace-cf"));

    // pending drag handles, drawn at the issued (t, value) targets
    for (const e of this.card.edits) {
      if (e.kind !== "drag") continue;
      this.chart.appendChild(
        svgEl("circle", {
          class: "pending-edit",
          cx: r2(this.xAt(e.t, T)),
          cy: r2(yAt(e.value)),
          r: 2.4,
        }),
      );
    }
  }

  private renderEdits(): void {
    clear(this.editsBox);
    if (!this.card.edits.length) return;
    const list = el("ul", { class: "edit-list" });
    this.card.edits.forEach((e, i) => {
      const item = el("li", {});
      item.appendChild(
        el(
          "span",
          {},
          e.kind === "drag"
            ? `drag t=${e.t} to ${e.value} r=${e.radius}`
            : `${e.op} [${e.a}, ${e.b}]`,
        ),
      );
      const rm = el("button", { class: "edit-remove" }, "x");
      rm.addEventListener("click", () => {
        this.card.edits.splice(i, 1);
        this.renderEdits();
        this.renderChart();
      });
      item.appendChild(rm);
      list.appendChild(item);
    });
    this.editsBox.appendChild(list);
  }

  private renderProbs(): void {
    clear(this.probsBox);
    const src = this.card.result ?? this.card.detail;
    const unc: UncertaintyDoc = src.uncertainty;
    this.probsBox.appendChild(
      el("div", { class: "probs-pred" }, `pred ${src.pred}`),
    );
    src.probs.forEach((p, k) => {
      const row = el("div", { class: "prob-row", "data-class": String(k) });
      row.appendChild(el("span", { class: "prob-label" }, `class ${k}`));
      const bar = el("div", { class: "prob-bar" });
      const fill = el("div", { class: "prob-fill" });
      fill.style.width = `${Math.round(p * 1000) / 10}%`;
      bar.appendChild(fill);
      // error bar from the MC-dropout spread around the mean probability
      const err = el("div", { class: "prob-err" });
      err.style.left = `${Math.max(0, (unc.mean[k] - unc.std[k]) * 100)}%`;
      err.style.width = `${Math.min(100, 2 * unc.std[k] * 100)}%`;
      bar.appendChild(err);
      row.appendChild(bar);
      row.appendChild(
        el("span", { class: "prob-value" }, `${p.toFixed(4)} (${unc.mean[k].toFixed(4)}±${unc.std[k].toFixed(4)})`),
      );
      this.probsBox.appendChild(row);
    });
  }

  private renderCf(): void {
    clear(this.cfBox);
    const cf = this.card.cf;
    if (!cf) return;
    const head = el("div", { class: "cf-head" });
    head.appendChild(el("span", {}, `${cf.method} cf, now class ${cf.predicted_class}`));
    if (cf.degenerate) {
      head.appendChild(el("span", { class: "badge badge-degenerate" }, "full NUN copy"));
    }
    this.cfBox.appendChild(head);
    const bits = [`l1 ${cf.l1.toFixed(3)}`, `l2 ${cf.l2.toFixed(3)}`];
    if (cf.guided_by) bits.push(`guided by ${cf.guided_by}`);
    if (cf.nun_train_row !== undefined) bits.push(`nun row ${cf.nun_train_row}`);
    if (cf.target_class !== undefined) bits.push(`target ${cf.target_class}`);
    this.cfBox.appendChild(el("div", { class: "cf-meta" }, bits.join("  ")));
  }

  // drag to move a point, shift-drag to select a region
  private wireChartMouse(): void {
    let downIndex: number | null = null;
    let regionStart: number | null = null;
    const T = (): number => this.card.detail.series.length;
    const toIndex = (ev: MouseEvent): number => {
      const r = (this.chart as SVGGraphicsElement).getBoundingClientRect();
      const w = r.width || 1;
      const x = ((ev.clientX - r.left) / w) * W;
      const t = Math.round(((x - PLOT.x0) / (PLOT.x1 - PLOT.x0)) * (T() - 1));
      return Math.max(0, Math.min(T() - 1, t));
    };
    const toValue = (ev: MouseEvent): number => {
      const r = (this.chart as SVGGraphicsElement).getBoundingClientRect();
      const h = r.height || 1;
      const y = ((ev.clientY - r.top) / h) * H;
      const d = this.card.detail;
      const all = [d.series, this.card.result?.series ?? []].flat();
      let lo = Math.min(...all);
      let hi = Math.max(...all);
      if (lo === hi) {
        lo -= 1;
        hi += 1;
      }
      return lo + ((PLOT.y1 - y) / (PLOT.y1 - PLOT.y0)) * (hi - lo);
    };
    this.chart.addEventListener("mousedown", (ev) => {
      const me = ev as MouseEvent;
      if (me.shiftKey) regionStart = toIndex(me);
      else downIndex = toIndex(me);
    });
    this.chart.addEventListener("mouseup", (ev) => {
      const me = ev as MouseEvent;
      if (regionStart !== null) {
        this.setRegion(regionStart, toIndex(me));
        regionStart = null;
      } else if (downIndex !== null) {
        this.issueDrag(downIndex, Math.round(toValue(me) * 1000) / 1000);
        downIndex = null;
      }
    });
  }
}

function r2(v: number): number {
  return Math.round(v * 100) / 100;
}

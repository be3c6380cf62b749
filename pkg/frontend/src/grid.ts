// Global projection matrix: rows are techniques, columns are sources in
// reading order raw, transforms, activations, then attribution columns
// sorted best-first by the perturbation ranking. Each visible cell is a
// scatter with confusion-colored marginal histograms; hidden cells are
// collapsed stubs.

import { sampleColor, scoreFrameColor, CONFUSION_COLORS, NEUTRAL } from "./colors.js";
import { el, svgEl, clear } from "./dom.js";
import type { ViewState } from "./state.js";
import type { CellDoc, ColorScheme, OosCoord, ProjectionsDoc } from "./types.js";

const VIEW = 100; // svg viewBox is VIEW x VIEW
const SCATTER = { x0: 13, x1: 99, y0: 1, y1: 86 };
const HIST_BINS = 12;

export interface GridHandlers {
  onBrush?: (ids: number[]) => void;
  onHover?: (index: number | null, ev?: MouseEvent) => void;
}

export function orderSources(sources: string[], rankedMethods: string[]): string[] {
  const rank = new Map(rankedMethods.map((m, i) => [m, i]));
  const attrs = sources
    .filter((s) => s.startsWith("attr:"))
    .sort((a, b) => (rank.get(a.slice(5)) ?? 1e9) - (rank.get(b.slice(5)) ?? 1e9));
  const mids = sources.filter(
    (s) => s !== "raw" && s !== "activations" && !s.startsWith("attr:"),
  );
  return [
    ...sources.filter((s) => s === "raw"),
    ...mids,
    ...sources.filter((s) => s === "activations"),
    ...attrs,
  ];
}

interface Scales {
  sx: (v: number) => number;
  sy: (v: number) => number;
}

function makeScales(coords: [number, number][]): Scales {
  let xmin = Infinity;
  let xmax = -Infinity;
  let ymin = Infinity;
  let ymax = -Infinity;
  for (const [x, y] of coords) {
    if (x < xmin) xmin = x;
    if (x > xmax) xmax = x;
    if (y < ymin) ymin = y;
    if (y > ymax) ymax = y;
  }
  const xspan = xmax - xmin || 1;
  const yspan = ymax - ymin || 1;
  return {
    sx: (v) => SCATTER.x0 + ((v - xmin) / xspan) * (SCATTER.x1 - SCATTER.x0),
    // flip y so larger coordinate values sit higher
    sy: (v) => SCATTER.y1 - ((v - ymin) / yspan) * (SCATTER.y1 - SCATTER.y0),
  };
}

interface CellView {
  doc: CellDoc;
  box: HTMLElement;
  svg: SVGElement;
  pointsLayer: SVGElement;
  markerLayer: SVGElement;
  points: SVGElement[];
  scales: Scales;
}

export class ProjectionGrid {
  readonly root: HTMLElement;
  private views = new Map<string, CellView>();
  private overlay: ProjectionsDoc["samples"];
  private scheme: ColorScheme;

  constructor(
    container: HTMLElement,
    private readonly doc: ProjectionsDoc,
    rankedMethods: string[],
    state: ViewState,
    private readonly handlers: GridHandlers = {},
  ) {
    this.overlay = doc.samples;
    this.scheme = state.colorScheme;
    const sources = orderSources(doc.sources, rankedMethods);
    const techniques = doc.techniques;

    this.root = el("div", { class: "projection-grid" });
    this.root.style.gridTemplateColumns = `auto repeat(${sources.length}, minmax(0, 1fr))`;
    this.root.appendChild(el("div", { class: "grid-corner" }));
    for (const s of sources) {
      this.root.appendChild(el("div", { class: "grid-col-head", "data-source": s }, s));
    }

    const combinedValues = doc.cells
      .filter((c) => c.visible && c.score)
      .map((c) => c.score!.combined);
    const lo = Math.min(...combinedValues);
    const hi = Math.max(...combinedValues);
    const median = quantile(combinedValues, 0.5);

    for (const t of techniques) {
      this.root.appendChild(el("div", { class: "grid-row-head" }, t));
      for (const s of sources) {
        const cell = doc.cells.find((c) => c.source === s && c.technique === t);
        this.root.appendChild(this.buildCell(cell, lo, hi, median));
      }
    }
    clear(container);
    container.appendChild(this.root);
  }

  private buildCell(cell: CellDoc | undefined, lo: number, hi: number, median: number): HTMLElement {
    if (!cell) return el("div", { class: "cell cell-missing" });
    const key = cellKey(cell.source, cell.technique);
    if (!cell.visible) {
      // collapsed stub, no scatter at all
      const stub = el("div", { class: "cell cell-collapsed", "data-cell": key });
      stub.appendChild(el("span", { class: "cell-collapsed-label" }, `${cell.source} hidden`));
      return stub;
    }
    const box = el("div", { class: "cell", "data-cell": key });
    const combined = cell.score ? cell.score.combined : null;
    if (combined !== null && combined < median) box.classList.add("cell-small");
    const frameT = combined === null || hi === lo ? 0 : (combined - lo) / (hi - lo);
    box.style.borderColor = scoreFrameColor(frameT);

    const head = el("div", { class: "cell-head" });
    head.appendChild(el("span", { class: "cell-title" }, `${cell.source} / ${cell.technique}`));
    head.appendChild(
      el(
        "span",
        { class: "cell-score" },
        combined === null ? "unscored" : combined.toFixed(2),
      ),
    );
    if (cell.degenerate) head.appendChild(el("span", { class: "cell-degenerate" }, "degenerate"));
    box.appendChild(head);

    const svg = svgEl("svg", { viewBox: `0 0 ${VIEW} ${VIEW}`, class: "cell-plot" });
    const scales = makeScales(cell.coords);
    this.drawHistograms(svg, cell.coords, scales);

    const pointsLayer = svgEl("g", { class: "points" });
    const points: SVGElement[] = [];
    cell.coords.forEach(([x, y], i) => {
      const c = svgEl("circle", {
        cx: round2(scales.sx(x)),
        cy: round2(scales.sy(y)),
        r: 1.6,
        "data-i": i,
        fill: sampleColor(i, this.scheme, this.overlay),
      });
      c.addEventListener("mouseenter", (ev) => this.handlers.onHover?.(i, ev as MouseEvent));
      c.addEventListener("mouseleave", () => this.handlers.onHover?.(null));
      pointsLayer.appendChild(c);
      points.push(c);
    });
    svg.appendChild(pointsLayer);
    const markerLayer = svgEl("g", { class: "markers" });
    svg.appendChild(markerLayer);
    this.wireBrush(svg, cell);
    box.appendChild(svg);

    this.views.set(key, { doc: cell, box, svg, pointsLayer, markerLayer, points, scales });
    return box;
  }

  // left and bottom strips: per-bin counts stacked by confusion category
  private drawHistograms(svg: SVGElement, coords: [number, number][], scales: Scales): void {
    const cats = ["TP", "TN", "FP", "FN", null] as const;
    const xBins: number[][] = Array.from({ length: HIST_BINS }, () => [0, 0, 0, 0, 0]);
    const yBins: number[][] = Array.from({ length: HIST_BINS }, () => [0, 0, 0, 0, 0]);
    coords.forEach(([x, y], i) => {
      const cat = this.overlay.confusion[i];
      const ci = cat === null ? 4 : cats.indexOf(cat);
      const bx = binOf(scales.sx(x), SCATTER.x0, SCATTER.x1);
      const by = binOf(scales.sy(y), SCATTER.y0, SCATTER.y1);
      xBins[bx][ci] += 1;
      yBins[by][ci] += 1;
    });
    const peak = Math.max(1, ...xBins.map(sum), ...yBins.map(sum));
    const g = svgEl("g", { class: "marginals" });
    const bw = (SCATTER.x1 - SCATTER.x0) / HIST_BINS;
    xBins.forEach((counts, b) => {
      let y = VIEW; // stack upward from the bottom edge
      counts.forEach((n, ci) => {
        if (!n) return;
        const h = (n / peak) * (VIEW - SCATTER.y1 - 2);
        y -= h;
        g.appendChild(
          svgEl("rect", {
            x: round2(SCATTER.x0 + b * bw),
            y: round2(y),
            width: round2(bw - 0.3),
            height: round2(h),
            fill: cats[ci] === null ? NEUTRAL : CONFUSION_COLORS[cats[ci] as string],
          }),
        );
      });
    });
    const bh = (SCATTER.y1 - SCATTER.y0) / HIST_BINS;
    yBins.forEach((counts, b) => {
      let x = 0;
      counts.forEach((n, ci) => {
        if (!n) return;
        const w = (n / peak) * (SCATTER.x0 - 3);
        g.appendChild(
          svgEl("rect", {
            x: round2(x),
            y: round2(SCATTER.y0 + b * bh),
            width: round2(w),
            height: round2(bh - 0.3),
            fill: cats[ci] === null ? NEUTRAL : CONFUSION_COLORS[cats[ci] as string],
          }),
        );
        x += w;
      });
    });
    svg.appendChild(g);
  }

  private wireBrush(svg: SVGElement, cell: CellDoc): void {
    let start: [number, number] | null = null;
    let band: SVGElement | null = null;
    const toLocal = (ev: MouseEvent): [number, number] => {
      const r = (svg as SVGGraphicsElement).getBoundingClientRect();
      const w = r.width || 1;
      const h = r.height || 1;
      return [((ev.clientX - r.left) / w) * VIEW, ((ev.clientY - r.top) / h) * VIEW];
    };
    svg.addEventListener("mousedown", (ev) => {
      if ((ev.target as Element).tagName === "circle") return;
      start = toLocal(ev as MouseEvent);
      band = svgEl("rect", { class: "brush-band", fill: "rgba(80,120,200,0.2)" });
      svg.appendChild(band);
    });
    svg.addEventListener("mousemove", (ev) => {
      if (!start || !band) return;
      const [x, y] = toLocal(ev as MouseEvent);
      band.setAttribute("x", String(Math.min(start[0], x)));
      band.setAttribute("y", String(Math.min(start[1], y)));
      band.setAttribute("width", String(Math.abs(x - start[0])));
      band.setAttribute("height", String(Math.abs(y - start[1])));
    });
    svg.addEventListener("mouseup", (ev) => {
      if (!start) return;
      const [x, y] = toLocal(ev as MouseEvent);
      const rect: [number, number, number, number] = [
        Math.min(start[0], x),
        Math.min(start[1], y),
        Math.max(start[0], x),
        Math.max(start[1], y),
      ];
      band?.remove();
      start = null;
      band = null;
      const ids = this.pointsInRect(cell.source, cell.technique, rect);
      if (ids.length) this.handlers.onBrush?.(ids);
    });
  }

  /** Ids whose rendered position falls inside [x0, y0, x1, y1] (viewBox units). */
  pointsInRect(source: string, technique: string, rect: [number, number, number, number]): number[] {
    const view = this.views.get(cellKey(source, technique));
    if (!view) return [];
    const [x0, y0, x1, y1] = rect;
    const out: number[] = [];
    view.points.forEach((p, i) => {
      const cx = Number(p.getAttribute("cx"));
      const cy = Number(p.getAttribute("cy"));
      if (cx >= x0 && cx <= x1 && cy >= y0 && cy <= y1) out.push(i);
    });
    return out;
  }

  /** Keys of the rendered (visible) cells, row-major. */
  cellKeys(): string[] {
    return [...this.views.keys()];
  }

  cellView(source: string, technique: string): CellView | undefined {
    return this.views.get(cellKey(source, technique));
  }

  /** Re-tint every point for the given scheme. Positions are never touched;
      switching schemes only rewrites fill attributes. */
  applyColors(scheme: ColorScheme): void {
    this.scheme = scheme;
    for (const view of this.views.values()) {
      view.points.forEach((p, i) => {
        p.setAttribute("fill", sampleColor(i, scheme, this.overlay));
      });
    }
  }

  /** Same highlight set in every cell. */
  highlight(ids: Iterable<number>): void {
    const set = new Set(ids);
    for (const view of this.views.values()) {
      view.points.forEach((p, i) => {
        p.classList.toggle("hl", set.has(i));
        p.classList.toggle("dim", set.size > 0 && !set.has(i));
      });
    }
  }

  /** Drop a reprojection marker into every cell its coords mention, with a
      line anchored at the origin sample's rendered point. Returns how many
      markers were drawn. */
  addProjection(coords: OosCoord[], originIndex: number | null, tag: string): number {
    let drawn = 0;
    for (const c of coords) {
      const view = this.views.get(cellKey(c.source, c.technique));
      if (!view) continue;
      const x = view.scales.sx(c.x);
      const y = view.scales.sy(c.y);
      if (originIndex !== null && view.points[originIndex]) {
        const o = view.points[originIndex];
        view.markerLayer.appendChild(
          svgEl("line", {
            class: "reproject-line",
            "data-tag": tag,
            x1: o.getAttribute("cx") ?? 0,
            y1: o.getAttribute("cy") ?? 0,
            x2: round2(x),
            y2: round2(y),
          }),
        );
      }
      const m = svgEl("path", {
        class: "reproject-marker",
        "data-tag": tag,
        d: `M ${round2(x - 2)} ${round2(y)} L ${round2(x + 2)} ${round2(y)} M ${round2(x)} ${round2(y - 2)} L ${round2(x)} ${round2(y + 2)}`,
      });
      view.markerLayer.appendChild(m);
      drawn += 1;
    }
    return drawn;
  }

  clearProjections(tag?: string): void {
    for (const view of this.views.values()) {
      const sel = tag ? `[data-tag="${tag}"]` : ".reproject-marker, .reproject-line";
      view.markerLayer.querySelectorAll(sel).forEach((n) => n.remove());
    }
  }
}

export function cellKey(source: string, technique: string): string {
  return `${source}|${technique}`;
}

function round2(v: number): number {
  return Math.round(v * 100) / 100;
}

function binOf(v: number, lo: number, hi: number): number {
  const t = (v - lo) / (hi - lo || 1);
  return Math.max(0, Math.min(HIST_BINS - 1, Math.floor(t * HIST_BINS)));
}

function sum(xs: number[]): number {
  return xs.reduce((a, b) => a + b, 0);
}

function quantile(xs: number[], q: number): number {
  if (!xs.length) return NaN;
  const s = [...xs].sort((a, b) => a - b);
  const pos = (s.length - 1) * q;
  const lo = Math.floor(pos);
  const hi = Math.ceil(pos);
  return s[lo] + (s[hi] - s[lo]) * (pos - lo);
}

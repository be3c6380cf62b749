// Hover tooltip. Fields come straight from GET /samples/{i}; details are
// cached per index so re-hovering does not refetch.

import type { ExplorerApi } from "./api.js";
import { el } from "./dom.js";
import type { SampleDetail } from "./types.js";

export class Tooltip {
  readonly node: HTMLDivElement;
  private cache = new Map<number, SampleDetail>();
  private current: number | null = null;

  constructor(
    private readonly api: ExplorerApi,
    private readonly sessionId: string,
  ) {
    this.node = el("div", { class: "tooltip", hidden: "" });
    document.body.appendChild(this.node);
  }

  async show(index: number, ev?: MouseEvent): Promise<void> {
    this.current = index;
    let detail = this.cache.get(index);
    if (!detail) {
      detail = await this.api.sample(this.sessionId, index);
      this.cache.set(index, detail);
    }
    if (this.current !== index) return; // superseded while fetching
    const conf = detail.probs[detail.pred];
    this.node.textContent =
      `#${detail.index}  label ${detail.label}  pred ${detail.pred}` +
      `  conf ${conf.toFixed(4)}` +
      (detail.confusion ? `  ${detail.confusion}` : "");
    this.node.removeAttribute("hidden");
    if (ev) {
      this.node.style.left = `${ev.clientX + 12}px`;
      this.node.style.top = `${ev.clientY + 12}px`;
    }
  }

  hide(): void {
    this.current = null;
    this.node.setAttribute("hidden", "");
  }
}

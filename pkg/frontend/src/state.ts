// Client-side view state: which ids are hovered or brushed, which samples
// have a local card, and the one active color scheme. Holds no numbers of
// its own beyond bookkeeping ids; everything model-related lives in the
// payload records referenced here.

import type {
  ColorScheme,
  CounterfactualDoc,
  EditOp,
  OosCoord,
  SampleDetail,
  WhatifResponse,
} from "./types.js";

export interface ToolState {
  radius: number;
  region: [number, number] | null;
  method: string; // attribution method driving the heatmap background
  showActmax: boolean;
}

export interface Card {
  id: number;
  sampleIndex: number;
  detail: SampleDetail;
  edits: EditOp[];
  result: WhatifResponse | null;
  cf: CounterfactualDoc | null;
  cfCoords: OosCoord[] | null;
  tool: ToolState;
}

export type StateEvent = "scheme" | "hover" | "brush" | "cards";

export class ViewState {
  colorScheme: ColorScheme = "labels";
  hovered = new Set<number>();
  brushed = new Set<number>();
  readonly cards: Card[] = [];
  private nextCard = 1;
  private listeners = new Map<StateEvent, Array<() => void>>();

  constructor(
    readonly sessionId: string,
    readonly sampleCount: number,
  ) {}

  on(event: StateEvent, fn: () => void): void {
    const arr = this.listeners.get(event) ?? [];
    arr.push(fn);
    this.listeners.set(event, arr);
  }

  private emit(event: StateEvent): void {
    for (const fn of this.listeners.get(event) ?? []) fn();
  }

  setScheme(scheme: ColorScheme): void {
    if (scheme === this.colorScheme) return;
    this.colorScheme = scheme;
    this.emit("scheme");
  }

  setHovered(ids: Iterable<number>): void {
    this.hovered = new Set(this.valid(ids));
    this.emit("hover");
  }

  /** Add ids to the brushed set. Returns the ids that still need a card;
      re-brushing already-carded samples is a no-op for the card list. */
  brush(ids: Iterable<number>): number[] {
    const valid = this.valid(ids);
    for (const i of valid) this.brushed.add(i);
    this.emit("brush");
    return valid.filter((i) => !this.cards.some((c) => c.sampleIndex === i));
  }

  clearBrush(): void {
    this.brushed.clear();
    this.emit("brush");
  }

  /** Create a card for a fetched sample unless one already exists. */
  addCard(detail: SampleDetail, method: string): Card | null {
    if (this.cards.some((c) => c.sampleIndex === detail.index)) return null;
    const card: Card = {
      id: this.nextCard++,
      sampleIndex: detail.index,
      detail,
      edits: [],
      result: null,
      cf: null,
      cfCoords: null,
      tool: { radius: 0, region: null, method, showActmax: false },
    };
    this.cards.push(card);
    this.emit("cards");
    return card;
  }

  removeCard(id: number): void {
    const at = this.cards.findIndex((c) => c.id === id);
    if (at < 0) return;
    this.cards.splice(at, 1);
    this.emit("cards");
  }

  // brushed/hovered ids must stay inside the dataset index range
  private valid(ids: Iterable<number>): number[] {
    const out: number[] = [];
    for (const i of ids) {
      if (Number.isInteger(i) && i >= 0 && i < this.sampleCount) out.push(i);
    }
    return out;
  }
}

// Linked brushing and hover: one id set highlighted everywhere, cards
// opened once per sample, tooltip fields passed through from /samples/{i}.

import { beforeEach, describe, expect, it, vi } from "vitest";
import { startExplorer } from "../src/app.js";
import { makeMockApi, SID } from "./fixtures.js";

beforeEach(() => {
  document.body.innerHTML = "";
});

async function boot() {
  const mock = makeMockApi();
  const root = document.createElement("div");
  document.body.appendChild(root);
  const handles = await startExplorer(root, mock.api, SID);
  return { root, handles, calls: mock.calls };
}

function highlightedIds(cell: Element): number[] {
  return [...cell.querySelectorAll("circle.hl")]
    .map((c) => Number(c.getAttribute("data-i")))
    .sort((a, b) => a - b);
}

describe("linked brushing", () => {
  it("highlights the same ids in every cell and opens one card per id", async () => {
    const { root, handles } = await boot();
    await handles.brush([3, 7]);
    const cells = [...root.querySelectorAll(".cell-plot")];
    expect(cells.length).toBe(6);
    for (const cell of cells) {
      expect(highlightedIds(cell)).toEqual([3, 7]);
    }
    expect(handles.state.cards.map((c) => c.sampleIndex).sort()).toEqual([3, 7]);
    expect(root.querySelectorAll(".whatif-card").length).toBe(2);
  });

  it("never duplicates a card when the same id is brushed again", async () => {
    const { root, handles } = await boot();
    await handles.brush([3, 7]);
    await handles.brush([3]);
    await handles.brush([7, 3]);
    expect(handles.state.cards.length).toBe(2);
    expect(root.querySelectorAll(".whatif-card").length).toBe(2);
  });

  it("drops ids outside the dataset index range", async () => {
    const { handles } = await boot();
    await handles.brush([99, -1, 3.5]);
    expect(handles.state.brushed.size).toBe(0);
    expect(handles.state.cards.length).toBe(0);
  });

  it("extends an existing selection", async () => {
    const { root, handles } = await boot();
    await handles.brush([1]);
    await handles.brush([4]);
    for (const cell of root.querySelectorAll(".cell-plot")) {
      expect(highlightedIds(cell)).toEqual([1, 4]);
    }
  });

  it("adds a card from the confusion filter without brushing", async () => {
    const { handles } = await boot();
    await handles.addCardByIndex(5);
    expect(handles.state.cards.map((c) => c.sampleIndex)).toEqual([5]);
    expect(handles.state.brushed.size).toBe(0);
  });
});

describe("hover tooltip", () => {
  it("shows the /samples/{i} fields and highlights the id everywhere", async () => {
    const { root, handles, calls } = await boot();
    const circle = root.querySelector('circle[data-i="5"]')!;
    circle.dispatchEvent(new MouseEvent("mouseenter"));
    await vi.waitFor(() => {
      expect(handles.tooltip.node.hasAttribute("hidden")).toBe(false);
    });
    const text = handles.tooltip.node.textContent!;
    expect(text).toContain("#5");
    expect(text).toContain("label 1");
    expect(text).toContain("pred 1");
    expect(text).toContain("0.8137"); // probs[pred] from the payload
    expect(text).toContain("TP");
    expect(calls.some((c) => c.url.endsWith("/samples/5"))).toBe(true);
    for (const cell of root.querySelectorAll(".cell-plot")) {
      expect(highlightedIds(cell)).toEqual([5]);
    }
  });

  it("clears the hover highlight on leave but keeps the brush", async () => {
    const { root, handles } = await boot();
    await handles.brush([2]);
    const circle = root.querySelector('circle[data-i="5"]')!;
    circle.dispatchEvent(new MouseEvent("mouseenter"));
    await vi.waitFor(() => {
      expect(highlightedIds(root.querySelector(".cell-plot")!)).toEqual([2, 5]);
    });
    circle.dispatchEvent(new MouseEvent("mouseleave"));
    for (const cell of root.querySelectorAll(".cell-plot")) {
      expect(highlightedIds(cell)).toEqual([2]);
    }
    expect(handles.tooltip.node.hasAttribute("hidden")).toBe(true);
  });

  it("fetches each hovered sample once, then reuses the cache", async () => {
    const { root, handles, calls } = await boot();
    const circle = root.querySelector('circle[data-i="5"]')!;
    circle.dispatchEvent(new MouseEvent("mouseenter"));
    await vi.waitFor(() => expect(handles.tooltip.node.hasAttribute("hidden")).toBe(false));
    circle.dispatchEvent(new MouseEvent("mouseleave"));
    circle.dispatchEvent(new MouseEvent("mouseenter"));
    await vi.waitFor(() => expect(handles.tooltip.node.hasAttribute("hidden")).toBe(false));
    expect(calls.filter((c) => c.url.endsWith("/samples/5")).length).toBe(1);
  });
});

// Canned API payloads plus a recording fetch stub. Tests talk to the real
// ExplorerApi client wired to this stub, so request bodies are asserted at
// the HTTP boundary, exactly as the server would see them.

import { ExplorerApi } from "../src/api.js";
import type {
  CellDoc,
  CounterfactualResponse,
  ProjectionsDoc,
  RankingDoc,
  SampleDetail,
  SamplesOverlay,
  WhatifResponse,
} from "../src/types.js";

export const SID = "s1";
export const N = 8;

// binary overlay covering all four confusion categories (positive class 1)
export function makeOverlay(): SamplesOverlay {
  const labels = [0, 1, 0, 1, 0, 1, 0, 1];
  const preds = [0, 1, 1, 0, 0, 1, 0, 1];
  const confusion = labels.map((l, i) => {
    if (l === 1 && preds[i] === 1) return "TP" as const;
    if (l === 0 && preds[i] === 0) return "TN" as const;
    if (l === 0 && preds[i] === 1) return "FP" as const;
    return "FN" as const;
  });
  return {
    labels,
    preds,
    confusion,
    color_index: confusion.map((c) => ["TP", "TN", "FP", "FN"].indexOf(c)),
    origin_split: labels.map(() => "test"),
    class_count: 2,
  };
}

export const DEFAULT_SOURCES = ["raw", "activations", "attr:saliency"];
export const DEFAULT_TECHNIQUES = ["pca", "tsne"];

// six distinct combined scores; median 1.9, so 1.2 / 0.4 / 1.8 shrink
const COMBINED = [3.0, 1.2, 2.0, 0.4, 2.6, 1.8];

export interface ProjectionOpts {
  sources?: string[];
  techniques?: string[];
  hide?: string[]; // "source|technique" keys rendered invisible
}

export function makeProjectionsDoc(opts: ProjectionOpts = {}): ProjectionsDoc {
  const sources = opts.sources ?? DEFAULT_SOURCES;
  const techniques = opts.techniques ?? DEFAULT_TECHNIQUES;
  const hide = new Set(opts.hide ?? []);
  const cells: CellDoc[] = [];
  let cellNo = 0;
  for (const source of sources) {
    for (const technique of techniques) {
      const coords: [number, number][] = [];
      for (let i = 0; i < N; i++) {
        coords.push([i + cellNo * 0.1, ((i * 7) % 5) - cellNo * 0.2]);
      }
      const combined = COMBINED[cellNo % COMBINED.length];
      cells.push({
        source,
        technique,
        coords,
        score: {
          db_labels: 0.5,
          db_preds: 0.7,
          cdist_labels: combined,
          cdist_preds: combined,
          combined,
          degenerate_labels: false,
          degenerate_preds: false,
        },
        degenerate: false,
        visible: !hide.has(`${source}|${technique}`),
      });
      cellNo += 1;
    }
  }
  return { sources, techniques, cells, samples: makeOverlay() };
}

export function makeRankingDoc(methods: string[] = ["saliency", "occlusion"]): RankingDoc {
  const columns = ["point/zero@top10", "time/swap@top10/L5"];
  const drops: Record<string, Record<string, number>> = {};
  methods.forEach((m, i) => {
    drops[m] = { [columns[0]]: 0.41 - i * 0.1, [columns[1]]: 0.33 - i * 0.1 };
  });
  return {
    table: {
      columns,
      methods,
      cells: drops,
      mean_drop: Object.fromEntries(methods.map((m, i) => [m, 0.37 - i * 0.1])),
      mean_random_drop: Object.fromEntries(methods.map((m) => [m, 0.02])),
      beats_random: Object.fromEntries(methods.map((m) => [m, true])),
    },
    eval: methods.flatMap((m) =>
      columns.map((c) => ({
        method: m,
        config: c,
        acc_before: 0.95,
        acc_after: 0.6,
        drop: drops[m][c],
        random_drop: 0.02,
        beats_random: true,
      })),
    ),
  };
}

export const T = 16;

export function makeSampleDetail(index: number): SampleDetail {
  const overlay = makeOverlay();
  const pred = overlay.preds[index % N];
  const series = Array.from({ length: T }, (_, t) => Math.round(Math.sin(t + index) * 100) / 100);
  const attr = Array.from({ length: T }, (_, t) => (t % 2 ? 0.2 : -0.1) + index * 0.01);
  return {
    index,
    series,
    label: overlay.labels[index % N],
    pred,
    probs: pred === 0 ? [0.8137, 0.1863] : [0.1863, 0.8137],
    confusion: overlay.confusion[index % N],
    color_index: overlay.color_index[index % N],
    attributions: {
      saliency: { values: attr, std: 0.4242, params: {} },
      occlusion: { values: attr.map((v) => v * 0.5), std: 0.1234, params: { window: 1 } },
    },
    actmax: Array.from({ length: T }, (_, t) => 0.5 + 0.01 * t),
    uncertainty: {
      mean: pred === 0 ? [0.79, 0.21] : [0.21, 0.79],
      std: [0.031, 0.027],
    },
  };
}

export function coordsForVisible(doc: ProjectionsDoc): { source: string; technique: string; x: number; y: number }[] {
  return doc.cells
    .filter((c) => c.visible)
    .map((c) => ({ source: c.source, technique: c.technique, x: 9.9, y: -3.3 }));
}

export function makeWhatifResponse(doc: ProjectionsDoc, pred = 1): WhatifResponse {
  const series = Array.from({ length: T }, (_, t) => t * 0.1);
  return {
    series,
    pred,
    probs: [0.0869, 0.9131],
    uncertainty: { mean: [0.1012, 0.8988], std: [0.0123, 0.0456] },
    attributions: {
      saliency: { values: series.map((v) => v - 0.5), target_class: pred },
      occlusion: { values: series.map((v) => v * 0.2), target_class: pred },
    },
    coords: coordsForVisible(doc),
  };
}

export function makeCfResponse(doc: ProjectionsDoc, degenerate = false): CounterfactualResponse {
  return {
    counterfactual: {
      origin_index: 1,
      series: Array.from({ length: T }, (_, t) => 1 - t * 0.05),
      predicted_class: 0,
      method: "native",
      changed_mask: Array.from({ length: T }, (_, t) => t >= 4 && t < 8),
      l1: 2.4067,
      l2: 1.3031,
      degenerate,
      nun_train_row: 12,
      guided_by: "saliency",
    },
    coords: coordsForVisible(doc),
  };
}

export interface MockCall {
  method: string;
  url: string;
  body?: unknown;
  signal: AbortSignal | null;
}

export interface ErrorSpec {
  status: number;
  code: string;
  message: string;
}

export interface MockOpts {
  projections?: ProjectionsDoc;
  ranking?: RankingDoc;
  sampleFor?: (index: number) => SampleDetail;
  whatif?: (body: unknown, callNo: number) => WhatifResponse | ErrorSpec;
  counterfactual?: (body: unknown) => CounterfactualResponse | ErrorSpec;
  failAll?: ErrorSpec;
}

function isErrorSpec(v: unknown): v is ErrorSpec {
  return typeof v === "object" && v !== null && "status" in v && "code" in v;
}

export function makeMockApi(opts: MockOpts = {}) {
  const projections = opts.projections ?? makeProjectionsDoc();
  const ranking = opts.ranking ?? makeRankingDoc();
  const calls: MockCall[] = [];
  let whatifCount = 0;

  const respond = (doc: unknown, status = 200) =>
    new Response(JSON.stringify(doc), {
      status,
      headers: { "Content-Type": "application/json" },
    });
  const failure = (f: ErrorSpec) => respond({ code: f.code, message: f.message }, f.status);

  const fetchFn = async (url: string, init?: RequestInit): Promise<Response> => {
    const method = init?.method ?? "GET";
    const body = typeof init?.body === "string" ? JSON.parse(init.body) : undefined;
    const signal = init?.signal ?? null;
    calls.push({ method, url, body, signal });
    await Promise.resolve(); // let callers interleave, like a real request
    if (signal?.aborted) throw new DOMException("The operation was aborted.", "AbortError");
    if (opts.failAll) return failure(opts.failAll);

    let m: RegExpMatchArray | null;
    if (url.endsWith("/ranking")) return respond(ranking);
    if (url.endsWith("/projections")) return respond(projections);
    if ((m = url.match(/\/samples\/(\d+)$/))) {
      const i = Number(m[1]);
      return respond((opts.sampleFor ?? makeSampleDetail)(i));
    }
    if (url.endsWith("/whatif")) {
      whatifCount += 1;
      const out = (opts.whatif ?? (() => makeWhatifResponse(projections)))(body, whatifCount);
      return isErrorSpec(out) ? failure(out) : respond(out);
    }
    if (url.endsWith("/counterfactual")) {
      const out = (opts.counterfactual ?? (() => makeCfResponse(projections)))(body);
      return isErrorSpec(out) ? failure(out) : respond(out);
    }
    if (url.endsWith("/sessions") && method === "POST") {
      return respond({ id: SID, state: "pending" }, 201);
    }
    if (url.endsWith("/sessions")) {
      return respond({ sessions: [{ id: SID, state: "done", stage: null }] });
    }
    if (url.endsWith("/status")) {
      return respond({ state: "done", stage: null, reason: null, stages_done: [] });
    }
    if (url.includes("/neighbors")) {
      return respond({ space: "euclidean", neighbors: [{ index: 2, distance: 0.5 }] });
    }
    return failure({ status: 404, code: "SessionNotFound", message: `no route ${url}` });
  };

  return { api: new ExplorerApi("/api", fetchFn), calls, projections, ranking };
}

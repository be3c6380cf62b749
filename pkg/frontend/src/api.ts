// Thin typed client for the session server. Every method is a single
// request; error bodies {code, message} become ApiError instances so the
// view layer can branch on the code without string-matching messages.

import type {
  CellDoc,
  CounterfactualResponse,
  NeighborsDoc,
  ProjectionsDoc,
  RankingDoc,
  SampleDetail,
  SessionRow,
  StatusDoc,
  WhatifRequest,
  WhatifResponse,
} from "./types.js";

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    message: string,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

export class ExplorerApi {
  constructor(
    private readonly base: string = "/api",
    private readonly fetchFn: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async request<T>(
    method: string,
    path: string,
    body?: unknown,
    signal?: AbortSignal,
  ): Promise<T> {
    const init: RequestInit = { method, signal };
    if (body !== undefined) {
      init.headers = { "Content-Type": "application/json" };
      init.body = JSON.stringify(body);
    }
    const resp = await this.fetchFn(this.base + path, init);
    if (!resp.ok) {
      let code = "HttpError";
      let message = `status ${resp.status}`;
      try {
        const doc = await resp.json();
        if (doc && typeof doc.code === "string") code = doc.code;
        if (doc && typeof doc.message === "string") message = doc.message;
      } catch {
        // non-JSON error body, keep the generic code
      }
      throw new ApiError(resp.status, code, message);
    }
    return (await resp.json()) as T;
  }

  createSession(config: unknown): Promise<{ id: string; state: string }> {
    return this.request("POST", "/sessions", config);
  }

  listSessions(): Promise<{ sessions: SessionRow[] }> {
    return this.request("GET", "/sessions");
  }

  status(id: string): Promise<StatusDoc> {
    return this.request("GET", `/sessions/${id}/status`);
  }

  ranking(id: string): Promise<RankingDoc> {
    return this.request("GET", `/sessions/${id}/ranking`);
  }

  projections(id: string): Promise<ProjectionsDoc> {
    return this.request("GET", `/sessions/${id}/projections`);
  }

  cells(id: string): Promise<{ cells: CellDoc[] }> {
    return this.request("GET", `/sessions/${id}/cells`);
  }

  sample(id: string, index: number): Promise<SampleDetail> {
    return this.request("GET", `/sessions/${id}/samples/${index}`);
  }

  neighbors(id: string, idx: number, space = "euclidean", k = 5): Promise<NeighborsDoc> {
    const q = `idx=${idx}&space=${encodeURIComponent(space)}&k=${k}`;
    return this.request("GET", `/sessions/${id}/neighbors?${q}`);
  }

  whatif(id: string, body: WhatifRequest, signal?: AbortSignal): Promise<WhatifResponse> {
    return this.request("POST", `/sessions/${id}/whatif`, body, signal);
  }

  counterfactual(
    id: string,
    body: { idx: number; method: "native" | "wachter" },
  ): Promise<CounterfactualResponse> {
    return this.request("POST", `/sessions/${id}/counterfactual`, body);
  }
}

// Payload shapes of the session HTTP API, mirrored field by field.
// The UI never derives model numbers itself; everything rendered comes
// out of one of these records.

export type ColorScheme = "labels" | "predictions" | "confusion";

export type ConfusionCategory = "TP" | "TN" | "FP" | "FN";

export interface SessionRow {
  id: string;
  state: string;
  stage: string | null;
}

export interface StatusDoc {
  state: string;
  stage: string | null;
  reason: string | null;
  stages_done: string[];
}

/** Cluster quality block of one projection cell; null fields mean the
    statistic was undefined for that grouping (single class, coincident
    centroids). */
export interface ScoreDoc {
  db_labels: number | null;
  db_preds: number | null;
  cdist_labels: number | null;
  cdist_preds: number | null;
  combined: number;
  degenerate_labels: boolean;
  degenerate_preds: boolean;
}

export interface CellDoc {
  source: string;
  technique: string;
  coords: [number, number][];
  score: ScoreDoc | null;
  degenerate: boolean;
  visible: boolean;
}

/** Per-sample overlay served with the projection grid: one entry per
    working-set row, index-aligned with every cell's coords. */
export interface SamplesOverlay {
  labels: number[];
  preds: number[];
  confusion: (ConfusionCategory | null)[];
  color_index: number[];
  origin_split: string[];
  class_count: number;
}

export interface ProjectionsDoc {
  sources: string[];
  techniques: string[];
  cells: CellDoc[];
  samples: SamplesOverlay;
}

export interface RankingTable {
  columns: string[];
  methods: string[];
  cells: Record<string, Record<string, number | null>>;
  mean_drop: Record<string, number>;
  mean_random_drop: Record<string, number | null>;
  beats_random: Record<string, boolean | null>;
}

export interface EvalRow {
  method: string;
  config: string;
  acc_before: number;
  acc_after: number;
  drop: number;
  random_drop: number | null;
  beats_random: boolean | null;
}

export interface RankingDoc {
  table: RankingTable;
  eval: EvalRow[];
}

export interface AttributionBlock {
  values: number[];
  std: number;
  params: Record<string, unknown>;
}

export interface UncertaintyDoc {
  mean: number[];
  std: number[];
}

export interface SampleDetail {
  index: number;
  series: number[];
  label: number;
  pred: number;
  probs: number[];
  confusion: ConfusionCategory | null;
  color_index: number;
  attributions: Record<string, AttributionBlock>;
  actmax: number[];
  uncertainty: UncertaintyDoc;
}

export type RegionOpName =
  | "global_mean"
  | "local_mean"
  | "inverse"
  | "actmax"
  | "moving_avg"
  | "exp_smooth";

// Wire form of one edit. Field names match what the server parses.
export type EditOp =
  | { kind: "drag"; t: number; value: number; radius: number }
  | {
      kind: "region";
      a: number;
      b: number;
      op: RegionOpName;
      k?: number;
      alpha?: number;
      target_class?: number;
    };

export interface OosCoord {
  source: string;
  technique: string;
  x: number;
  y: number;
}

export interface WhatifRequest {
  base: number | number[];
  edits: EditOp[];
}

export interface WhatifResponse {
  series: number[];
  pred: number;
  probs: number[];
  uncertainty: UncertaintyDoc;
  attributions: Record<string, { values: number[]; target_class: number }>;
  coords: OosCoord[];
}

export interface CounterfactualDoc {
  origin_index: number;
  series: number[];
  predicted_class: number;
  method: string;
  changed_mask: boolean[];
  l1: number;
  l2: number;
  degenerate: boolean;
  nun_train_row?: number;
  guided_by?: string;
  target_class?: number;
}

export interface CounterfactualResponse {
  counterfactual: CounterfactualDoc;
  coords: OosCoord[];
}

export interface NeighborsDoc {
  space: string;
  neighbors: { index: number; distance: number }[];
}

export interface ApiErrorBody {
  code: string;
  message: string;
}

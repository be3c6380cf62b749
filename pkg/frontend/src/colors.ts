// Color scales. All of this is presentation: scaling a payload value onto
// a ramp, never producing a number that gets displayed.

import type { ColorScheme, SamplesOverlay } from "./types.js";

export const CONFUSION_COLORS: Record<string, string> = {
  TP: "#4e79a7",
  TN: "#76b7b2",
  FP: "#f28e2c",
  FN: "#e15759",
};

export const NEUTRAL = "#9b9b9b";

// qualitative palette, good for up to twelve classes
export const QUALITATIVE = [
  "#4e79a7",
  "#f28e2c",
  "#e15759",
  "#76b7b2",
  "#59a14f",
  "#edc948",
  "#b07aa1",
  "#ff9da7",
  "#9c755f",
  "#bab0ac",
  "#86bcb6",
  "#d37295",
];

function hexToRgb(hex: string): [number, number, number] {
  return [
    parseInt(hex.slice(1, 3), 16),
    parseInt(hex.slice(3, 5), 16),
    parseInt(hex.slice(5, 7), 16),
  ];
}

function mix(a: string, b: string, t: number): string {
  const ca = hexToRgb(a);
  const cb = hexToRgb(b);
  const c = ca.map((v, i) => Math.round(v + (cb[i] - v) * t));
  return `#${c.map((v) => v.toString(16).padStart(2, "0")).join("")}`;
}

/** Diverging blue-white-red ramp over t in [0, 1], 0.5 is neutral. */
export function divergingColor(t: number): string {
  const u = Math.max(0, Math.min(1, t));
  return u < 0.5 ? mix("#2166ac", "#f7f7f7", u * 2) : mix("#f7f7f7", "#b2182b", (u - 0.5) * 2);
}

export function classColor(k: number, classCount: number): string {
  if (classCount <= QUALITATIVE.length) {
    return QUALITATIVE[((k % QUALITATIVE.length) + QUALITATIVE.length) % QUALITATIVE.length];
  }
  // beyond twelve classes fall back to an interpolated ramp
  return divergingColor(classCount <= 1 ? 0.5 : k / (classCount - 1));
}

export function sampleColor(i: number, scheme: ColorScheme, overlay: SamplesOverlay): string {
  if (scheme === "confusion") {
    const c = overlay.confusion[i];
    return c ? CONFUSION_COLORS[c] : NEUTRAL;
  }
  const k = scheme === "labels" ? overlay.labels[i] : overlay.preds[i];
  return classColor(k, overlay.class_count);
}

/** Sequential gray-to-blue ramp used for the score frame of a cell. */
export function scoreFrameColor(t: number): string {
  return mix("#c8c8c8", "#2a6fb0", Math.max(0, Math.min(1, t)));
}

/** Unit-L2 rescale of a signed vector, so one diverging color scale is
    comparable across samples. A display transform, not a statistic: the
    numbers shown anywhere stay the raw payload values. */
export function l2Unit(values: number[]): number[] {
  let s = 0;
  for (const v of values) s += v * v;
  const n = Math.sqrt(s);
  if (n === 0) return values.map(() => 0);
  return values.map((v) => v / n);
}

/** Color for one signed, unit-scaled attribution value. */
export function attributionColor(v: number): string {
  return divergingColor(0.5 + 0.5 * Math.max(-1, Math.min(1, v * 3)));
}

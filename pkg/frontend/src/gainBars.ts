import { Row, median, requireColumns } from "./csv.js";
import { Figure, PALETTE } from "./svg.js";

export interface Bar {
  algorithm: string;
  transform: string;
  gain: number;
  ciLo: number;
  ciHi: number;
}

export interface GainBarLayout {
  metric: string;
  bars: Bar[];
  transforms: string[];
  algorithms: string[];
}

/** Median gain over the GMA baseline with CI whiskers, one bar per
 * (algorithm, transform); the CI bounds are mapped into gain space
 * against the same baseline. */
export function gainBarLayout(rows: Row[], metric: string): GainBarLayout {
  requireColumns(rows, ["algorithm", "transform", "metric", "median", "ci_lo", "ci_hi", "gain_pct"], "aggregate.csv");
  const selected = rows.filter((r) => r.metric === metric && r.gain_pct !== "");
  if (selected.length === 0) {
    throw new Error(`aggregate.csv: no rows with gains for metric '${metric}'`);
  }
  const baselines = new Map<string, number>();
  for (const r of selected) {
    if (r.algorithm === "gma") baselines.set(r.transform, Number(r.median));
  }
  const bars: Bar[] = [];
  for (const r of selected) {
    const base = baselines.get(r.transform);
    if (base === undefined) {
      throw new Error(`aggregate.csv: no GMA baseline for transform '${r.transform}'`);
    }
    bars.push({
      algorithm: r.algorithm,
      transform: r.transform,
      gain: Number(r.gain_pct),
      ciLo: (Number(r.ci_lo) / base - 1) * 100,
      ciHi: (Number(r.ci_hi) / base - 1) * 100,
    });
  }
  bars.sort((a, b) =>
    a.transform === b.transform
      ? a.algorithm.localeCompare(b.algorithm)
      : a.transform.localeCompare(b.transform),
  );
  return {
    metric,
    bars,
    transforms: [...new Set(bars.map((b) => b.transform))],
    algorithms: [...new Set(bars.map((b) => b.algorithm))].sort(),
  };
}

export function renderGainBars(layout: GainBarLayout, width = 640, height = 400): Figure {
  const fig = new Figure(width, height);
  const margin = { left: 60, right: 20, top: 40, bottom: 60 };
  const plotW = width - margin.left - margin.right;
  const plotH = height - margin.top - margin.bottom;

  const lo = Math.min(0, ...layout.bars.map((b) => Math.min(b.gain, b.ciLo)));
  const hi = Math.max(0, ...layout.bars.map((b) => Math.max(b.gain, b.ciHi)));
  const pad = Math.max(1, (hi - lo) * 0.1);
  const yMin = lo - pad;
  const yMax = hi + pad;
  const yOf = (v: number) => margin.top + ((yMax - v) / (yMax - yMin)) * plotH;

  const groupW = plotW / layout.transforms.length;
  const barW = (groupW * 0.8) / layout.algorithms.length;
  const colorOf = new Map(layout.algorithms.map((a, i) => [a, PALETTE[i % PALETTE.length]]));

  const zeroY = yOf(0);
  fig.add({ kind: "line", x1: margin.left, y1: zeroY, x2: width - margin.right, y2: zeroY, stroke: "black", width: 1, cls: "zero-line" });
  for (const bar of layout.bars) {
    const gi = layout.transforms.indexOf(bar.transform);
    const ai = layout.algorithms.indexOf(bar.algorithm);
    const x = margin.left + gi * groupW + groupW * 0.1 + ai * barW;
    const y = yOf(Math.max(0, bar.gain));
    const h = Math.abs(yOf(bar.gain) - zeroY);
    fig.add({ kind: "rect", x, y, w: barW * 0.9, h, fill: colorOf.get(bar.algorithm)!, cls: "bar" });
    const cx = x + barW * 0.45;
    fig.add({ kind: "line", x1: cx, y1: yOf(bar.ciLo), x2: cx, y2: yOf(bar.ciHi), stroke: "black", width: 1, cls: "whisker" });
    fig.add({ kind: "line", x1: cx - 3, y1: yOf(bar.ciLo), x2: cx + 3, y2: yOf(bar.ciLo), stroke: "black", width: 1 });
    fig.add({ kind: "line", x1: cx - 3, y1: yOf(bar.ciHi), x2: cx + 3, y2: yOf(bar.ciHi), stroke: "black", width: 1 });
  }
  layout.transforms.forEach((tr, gi) => {
    fig.add({ kind: "text", x: margin.left + gi * groupW + groupW / 2, y: height - margin.bottom + 20, text: tr, size: 12, anchor: "middle" });
  });
  layout.algorithms.forEach((alg, i) => {
    const x = margin.left + i * 110;
    fig.add({ kind: "rect", x, y: 10, w: 12, h: 12, fill: colorOf.get(alg)!, cls: "legend" });
    fig.add({ kind: "text", x: x + 16, y: 20, text: alg, size: 11 });
  });
  for (const v of ticks(yMin, yMax, 6)) {
    fig.add({ kind: "line", x1: margin.left - 4, y1: yOf(v), x2: margin.left, y2: yOf(v), stroke: "black", width: 1 });
    fig.add({ kind: "text", x: margin.left - 8, y: yOf(v) + 4, text: `${v.toFixed(0)}%`, size: 10, anchor: "end" });
  }
  fig.add({ kind: "text", x: width / 2, y: height - 10, text: `median gain vs GMA (${layout.metric})`, size: 12, anchor: "middle" });
  return fig;
}

function ticks(lo: number, hi: number, n: number): number[] {
  const step = (hi - lo) / (n - 1);
  return Array.from({ length: n }, (_, i) => lo + i * step);
}

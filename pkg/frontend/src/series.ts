import { Row, median, requireColumns } from "./csv.js";
import { Figure, PALETTE } from "./svg.js";

export interface SeriesLine {
  algorithm: string;
  points: [number, number][]; // (t, median value)
  band: [number, number, number][]; // (t, min, max) run spread
}

export interface SeriesLayout {
  metric: string;
  lines: SeriesLine[];
}

/** Per-algorithm median metric over t with a min-max run-spread band. */
export function seriesLayout(rows: Row[], metric: string): SeriesLayout {
  requireColumns(rows, ["algorithm", "metric", "t", "value"], "series.csv");
  const selected = rows.filter((r) => r.metric === metric);
  if (selected.length === 0) {
    throw new Error(`series.csv: no rows for metric '${metric}'`);
  }
  const byAlg = new Map<string, Map<number, number[]>>();
  for (const r of selected) {
    const alg = r.algorithm;
    const t = Number(r.t);
    if (!byAlg.has(alg)) byAlg.set(alg, new Map());
    const perT = byAlg.get(alg)!;
    if (!perT.has(t)) perT.set(t, []);
    perT.get(t)!.push(Number(r.value));
  }
  const lines: SeriesLine[] = [];
  for (const alg of [...byAlg.keys()].sort()) {
    const perT = byAlg.get(alg)!;
    const ts = [...perT.keys()].sort((a, b) => a - b);
    lines.push({
      algorithm: alg,
      points: ts.map((t) => [t, median(perT.get(t)!)]),
      band: ts.map((t) => {
        const vs = perT.get(t)!;
        return [t, Math.min(...vs), Math.max(...vs)];
      }),
    });
  }
  return { metric, lines };
}

export function renderSeries(layout: SeriesLayout, width = 640, height = 360): Figure {
  const fig = new Figure(width, height);
  const margin = { left: 55, right: 20, top: 30, bottom: 40 };
  const plotW = width - margin.left - margin.right;
  const plotH = height - margin.top - margin.bottom;
  const allT = layout.lines.flatMap((l) => l.points.map(([t]) => t));
  const allV = layout.lines.flatMap((l) => l.band.flatMap(([, lo, hi]) => [lo, hi]));
  const tMin = Math.min(...allT);
  const tMax = Math.max(...allT);
  const vMin = Math.min(0, ...allV);
  const vMax = Math.max(1, ...allV);
  const xOf = (t: number) => margin.left + ((t - tMin) / Math.max(1e-9, tMax - tMin)) * plotW;
  const yOf = (v: number) => margin.top + ((vMax - v) / (vMax - vMin)) * plotH;

  fig.add({ kind: "line", x1: margin.left, y1: yOf(vMin), x2: margin.left, y2: yOf(vMax), stroke: "black", width: 1 });
  fig.add({ kind: "line", x1: margin.left, y1: yOf(vMin), x2: width - margin.right, y2: yOf(vMin), stroke: "black", width: 1 });

  layout.lines.forEach((line, i) => {
    const color = PALETTE[i % PALETTE.length];
    const band: [number, number][] = [
      ...line.band.map(([t, lo]) => [xOf(t), yOf(lo)] as [number, number]),
      ...[...line.band].reverse().map(([t, , hi]) => [xOf(t), yOf(hi)] as [number, number]),
    ];
    fig.add({ kind: "polygon", points: band, fill: color, opacity: 0.15, cls: "band" });
    fig.add({
      kind: "polyline",
      points: line.points.map(([t, v]) => [xOf(t), yOf(v)] as [number, number]),
      stroke: color, width: 1.8, cls: "series-line",
    });
    fig.add({ kind: "rect", x: margin.left + i * 110, y: 8, w: 12, h: 12, fill: color, cls: "legend" });
    fig.add({ kind: "text", x: margin.left + i * 110 + 16, y: 18, text: line.algorithm, size: 11 });
  });
  fig.add({ kind: "text", x: width / 2, y: height - 8, text: `snapshot`, size: 11, anchor: "middle" });
  fig.add({ kind: "text", x: 14, y: height / 2, text: layout.metric, size: 11 });
  return fig;
}

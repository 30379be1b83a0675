import { Row, requireColumns } from "./csv.js";
import { Figure, PALETTE } from "./svg.js";

export interface Block {
  t: number;
  community: number;
  size: number;
  y0: number;
  y1: number;
  color: string;
}

export interface Ribbon {
  tFrom: number;
  tTo: number;
  from: number;
  to: number;
  width: number; // node count
  y0From: number;
  y1From: number;
  y0To: number;
  y1To: number;
}

export interface FlowLayout {
  snapshots: number[];
  columns: Block[][];
  ribbons: Ribbon[];
}

/** Alluvial layout: one column of community blocks per sampled snapshot,
 * ribbons between consecutive columns with width = number of shared nodes.
 * Colors stay stable via greedy maximal-overlap matching. */
export function flowLayout(rows: Row[], snapshots: number[]): FlowLayout {
  requireColumns(rows, ["t", "node", "community"], "partition CSV");
  const byT = new Map<number, Map<number, number>>();
  for (const r of rows) {
    const t = Number(r.t);
    if (!byT.has(t)) byT.set(t, new Map());
    byT.get(t)!.set(Number(r.node), Number(r.community));
  }
  for (const t of snapshots) {
    if (!byT.has(t)) {
      throw new Error(`partition CSV: snapshot ${t} absent`);
    }
  }

  const membership = snapshots.map((t) => byT.get(t)!);
  const communitiesAt = membership.map((m) => {
    const sizes = new Map<number, number>();
    for (const c of m.values()) sizes.set(c, (sizes.get(c) ?? 0) + 1);
    return sizes;
  });

  // stable colors: first column by size order, then inherit from the
  // maximally-overlapping predecessor community (greedy, one color each)
  const colorOf: Map<number, string>[] = [];
  let nextColor = 0;
  const firstOrder = [...communitiesAt[0].entries()].sort((a, b) => b[1] - a[1] || a[0] - b[0]);
  colorOf.push(new Map(firstOrder.map(([c]) => [c, PALETTE[nextColor++ % PALETTE.length]])));
  for (let i = 1; i < snapshots.length; i++) {
    const overlaps: [number, number, number][] = []; // (count, prevC, curC)
    for (const [node, c] of membership[i]) {
      const prevC = membership[i - 1].get(node);
      if (prevC !== undefined) {
        const hit = overlaps.find(([, p, q]) => p === prevC && q === c);
        if (hit) hit[0] += 1;
        else overlaps.push([1, prevC, c]);
      }
    }
    overlaps.sort((a, b) => b[0] - a[0] || a[1] - b[1] || a[2] - b[2]);
    const assigned = new Map<number, string>();
    const usedPrev = new Set<number>();
    for (const [, prevC, curC] of overlaps) {
      if (!assigned.has(curC) && !usedPrev.has(prevC)) {
        const color = colorOf[i - 1].get(prevC);
        if (color) {
          assigned.set(curC, color);
          usedPrev.add(prevC);
        }
      }
    }
    for (const c of [...communitiesAt[i].keys()].sort((a, b) => a - b)) {
      if (!assigned.has(c)) assigned.set(c, PALETTE[nextColor++ % PALETTE.length]);
    }
    colorOf.push(assigned);
  }

  const gap = 4;
  const columns: Block[][] = [];
  for (let i = 0; i < snapshots.length; i++) {
    // order blocks to follow the previous column's matched layout
    const order = [...communitiesAt[i].keys()].sort((a, b) => {
      const ca = colorOf[i].get(a)!;
      const cb = colorOf[i].get(b)!;
      const ia = PALETTE.indexOf(ca);
      const ib = PALETTE.indexOf(cb);
      return ia - ib || a - b;
    });
    let y = 0;
    const col: Block[] = [];
    for (const c of order) {
      const size = communitiesAt[i].get(c)!;
      col.push({ t: snapshots[i], community: c, size, y0: y, y1: y + size, color: colorOf[i].get(c)! });
      y += size + gap;
    }
    columns.push(col);
  }

  const ribbons: Ribbon[] = [];
  for (let i = 1; i < snapshots.length; i++) {
    const flows = new Map<string, number>();
    for (const [node, c] of membership[i]) {
      const prevC = membership[i - 1].get(node);
      if (prevC !== undefined) {
        const key = `${prevC}:${c}`;
        flows.set(key, (flows.get(key) ?? 0) + 1);
      }
    }
    const fromOffsets = new Map<number, number>();
    const toOffsets = new Map<number, number>();
    const fromOrder = columns[i - 1].map((b) => b.community);
    const toOrder = columns[i].map((b) => b.community);
    const entries = [...flows.entries()]
      .map(([key, width]) => {
        const [from, to] = key.split(":").map(Number);
        return { from, to, width };
      })
      .sort(
        (a, b) =>
          fromOrder.indexOf(a.from) - fromOrder.indexOf(b.from) ||
          toOrder.indexOf(a.to) - toOrder.indexOf(b.to),
      );
    for (const { from, to, width } of entries) {
      const fromBlock = columns[i - 1].find((b) => b.community === from)!;
      const toBlock = columns[i].find((b) => b.community === to)!;
      const fo = fromOffsets.get(from) ?? 0;
      const to_ = toOffsets.get(to) ?? 0;
      ribbons.push({
        tFrom: snapshots[i - 1],
        tTo: snapshots[i],
        from,
        to,
        width,
        y0From: fromBlock.y0 + fo,
        y1From: fromBlock.y0 + fo + width,
        y0To: toBlock.y0 + to_,
        y1To: toBlock.y0 + to_ + width,
      });
      fromOffsets.set(from, fo + width);
      toOffsets.set(to, to_ + width);
    }
  }
  return { snapshots, columns, ribbons };
}

/** Inbound/outbound ribbon width totals per block (for conservation checks). */
export function ribbonTotals(layout: FlowLayout): {
  inbound: Map<string, number>;
  outbound: Map<string, number>;
} {
  const inbound = new Map<string, number>();
  const outbound = new Map<string, number>();
  for (const r of layout.ribbons) {
    const kin = `${r.tTo}:${r.to}`;
    const kout = `${r.tFrom}:${r.from}`;
    inbound.set(kin, (inbound.get(kin) ?? 0) + r.width);
    outbound.set(kout, (outbound.get(kout) ?? 0) + r.width);
  }
  return { inbound, outbound };
}

export function renderFlow(layout: FlowLayout, width = 720, height = 440): Figure {
  const fig = new Figure(width, height);
  const margin = { left: 50, right: 20, top: 30, bottom: 30 };
  const plotW = width - margin.left - margin.right;
  const plotH = height - margin.top - margin.bottom;
  const maxY = Math.max(...layout.columns.map((col) => col[col.length - 1].y1));
  const yScale = plotH / maxY;
  const colW = 16;
  const step = layout.snapshots.length > 1 ? (plotW - colW) / (layout.snapshots.length - 1) : 0;
  const xOf = (i: number) => margin.left + i * step;
  const yOf = (v: number) => margin.top + v * yScale;

  layout.ribbons.forEach((r) => {
    const i = layout.snapshots.indexOf(r.tFrom);
    const x1 = xOf(i) + colW;
    const x2 = xOf(i + 1);
    const color = layout.columns[i].find((b) => b.community === r.from)!.color;
    const points: [number, number][] = [];
    for (let s = 0; s <= 12; s++) {
      const u = s / 12;
      points.push([x1 + (x2 - x1) * u, ease(yOf(r.y0From), yOf(r.y0To), u)]);
    }
    for (let s = 12; s >= 0; s--) {
      const u = s / 12;
      points.push([x1 + (x2 - x1) * u, ease(yOf(r.y1From), yOf(r.y1To), u)]);
    }
    fig.add({ kind: "polygon", points, fill: color, opacity: 0.45, cls: "ribbon" });
  });
  layout.columns.forEach((col, i) => {
    for (const block of col) {
      fig.add({
        kind: "rect", x: xOf(i), y: yOf(block.y0), w: colW,
        h: (block.y1 - block.y0) * yScale, fill: block.color, cls: "block",
      });
    }
    fig.add({ kind: "text", x: xOf(i) + colW / 2, y: height - 8, text: `t=${layout.snapshots[i]}`, size: 11, anchor: "middle" });
  });
  return fig;
}

function ease(a: number, b: number, u: number): number {
  const w = u * u * (3 - 2 * u); // smoothstep between the anchors
  return a + (b - a) * w;
}

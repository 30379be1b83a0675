import { readFileSync } from "node:fs";

export type Row = Record<string, string>;

/** Parse a simple (unquoted) CSV file into header-keyed rows. */
export function parseCsv(text: string): Row[] {
  const lines = text.split(/\r?\n/).filter((l) => l.length > 0);
  if (lines.length === 0) return [];
  const header = lines[0].split(",");
  return lines.slice(1).map((line) => {
    const cells = line.split(",");
    const row: Row = {};
    header.forEach((h, i) => (row[h] = cells[i] ?? ""));
    return row;
  });
}

export function readCsv(path: string): Row[] {
  return parseCsv(readFileSync(path, "utf8"));
}

export function requireColumns(rows: Row[], columns: string[], context: string): void {
  if (rows.length === 0) {
    throw new Error(`${context}: input has no data rows`);
  }
  for (const col of columns) {
    if (!(col in rows[0])) {
      throw new Error(`${context}: missing column '${col}'`);
    }
  }
}

export function median(values: number[]): number {
  if (values.length === 0) throw new Error("median of empty list");
  const sorted = [...values].sort((a, b) => a - b);
  const mid = Math.floor(sorted.length / 2);
  return sorted.length % 2 ? sorted[mid] : (sorted[mid - 1] + sorted[mid]) / 2;
}
